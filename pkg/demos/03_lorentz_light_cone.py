"""Light-cone coordinates on the Lorentz cone.

For a light-like vector b = (1, u) with |u| = 1, the observable
f_b = (sqrt(m)/2) log((b.x)^2 / q(x)) has unit gradient and constant Laplacian
(n - 1)/sqrt(n + 1).  At beta = 2 each f_b is therefore a Brownian motion with
drift (n - 1)/(2 sqrt(n + 1)), and two of them co-vary according to Sigma.

Run:  python demos/03_lorentz_light_cone.py
"""

import numpy as np

from conelangevin import (LorentzGeometry, SimulationConfig, laplace_beltrami, lorentz_aux_field, lorentz_mu,
                          lorentz_theorem_test, make_light_vector, simulate_bm)
from conelangevin.geometry import gradient_norm2

g = LorentzGeometry(4)
n = g.spatial_dim
b = make_light_vector([0.6, 0.8, 0.0])
f = lorentz_aux_field(b)
x = np.array([2.0, 0.3, -0.4, 0.5])
print(f"|grad f_b|^2 at x = {gradient_norm2(g, x, f.gradient(x)):.12f}")
print(f"Delta f_b at x    = {laplace_beltrami(g, f, x):.12f}  (expected {(n - 1) / np.sqrt(n + 1):.12f})")
print(f"drift mu          = {lorentz_mu(n)}")

cfg = SimulationConfig(beta=2.0, dt=1e-3, horizon=5.0, replicas=256, seed=3)
path = simulate_bm(g, [1.0, 0.0, 0.0, 0.0], cfg)
report = lorentz_theorem_test(path, g)
print()
for key in sorted(report.estimate):
    print(f"{key:12s} {report.estimate[key]:8.4f} ± {report.stderr[key]:.4f}   expected {report.expected[key]:8.4f}"
          f"   {'pass' if report.verdict[key] else 'FAIL'}")
print("overall:", "pass" if report.passed else "FAIL")
