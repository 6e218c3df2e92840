"""Long-time behaviour of the Riemannian Langevin equation on (0, 1).

With E = alpha F and beta = 1, the stationary Lebesgue density is
exp(-alpha F) sqrt(det g) = exp((1 - alpha) F): uniform for alpha = 1 and
(pi/2) sin(pi x) for alpha = 2.  With E = 0 the volume form itself is not
integrable and the test refuses to run.

Run:  python demos/04_gibbs_stationarity.py
"""

import numpy as np

from conelangevin import CubeGeometry, EnergySpec, PreconditionError, SimulationConfig, simulate_rle, \
    stationary_histogram_test

g = CubeGeometry(1)
for alpha in (1.0, 2.0):
    E = EnergySpec.barrier(g, alpha)
    cfg = SimulationConfig(beta=1.0, dt=2e-3, horizon=20.0, replicas=4096, seed=5, save_every=10000)
    ends = simulate_rle(g, E, [0.5], cfg).endpoints
    report = stationary_histogram_test(ends, g, E, beta=1.0)
    hist = np.histogram(ends, bins=10, range=(0, 1), density=True)[0]
    print(f"alpha = {alpha:g}: {report.summary()}")
    print("  density by decile:", " ".join(f"{h:.2f}" for h in hist))

try:
    stationary_histogram_test(np.full(10, 0.5), g, EnergySpec.barrier(g, 0.0), beta=1.0)
except PreconditionError as exc:
    print("alpha = 0:", exc)

# Concentration as beta grows, with E = (x - 0.3)^2.
E = EnergySpec.quadratic([0.3], 2.0)
for beta in (1.0, 10.0, 100.0):
    cfg = SimulationConfig(beta=beta, dt=1e-2, horizon=30.0, replicas=512, seed=2, save_every=3000)
    ends = simulate_rle(g, E, [0.5], cfg).endpoints
    print(f"beta = {beta:5g}: mean {ends.mean():.3f}, variance {ends.var():.5f}")
