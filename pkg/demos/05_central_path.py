"""The interior-point central path as a Riemannian gradient flow.

x(theta) = argmin F + theta c.x satisfies dx/dtheta = -g^{-1} c.  We compute it
by damped Newton with theta-doubling and by RK4 integration of the flow, and
compare both with the orthant closed form x_i = 1/(theta c_i).

Run:  python demos/05_central_path.py
"""

import numpy as np

from conelangevin import ConicProgram, LorentzGeometry, OrthantGeometry, flow_central_path, newton_central_point, \
    solve_conic

c = np.array([1.0, 2.0, 4.0])
prog = ConicProgram(OrthantGeometry(3), c)
print(" theta    objective      3/theta     Newton its   |x - 1/(theta c)|")
for p in solve_conic(prog, 1024.0):
    err = np.max(np.abs(p.x - 1 / (p.theta * c)))
    print(f"{p.theta:6g}  {prog.objective(p.x):.6e}  {3 / p.theta:.6e}  {p.iterations:5d}        {err:.1e}")

start = newton_central_point(prog, 1.0, np.ones(3))
end = flow_central_path(prog, 1.0, 10.0, start)[-1]
print(f"\nflow 1 -> 10 on the orthant: error {np.max(np.abs(end.x - 1 / (10 * c))):.1e}")

lprog = ConicProgram(LorentzGeometry(4), [2.0, 1.0, 0.0, 0.0])
lstart = newton_central_point(lprog, 1.0, lprog.default_start())
lend = flow_central_path(lprog, 1.0, 10.0, lstart)[-1]
lnewton = newton_central_point(lprog, 10.0, lstart.x)
print(f"flow vs Newton on the Lorentz cone at theta = 10: {np.linalg.norm(lend.x - lnewton.x):.1e}")
print(f"c.x(10) = {lprog.objective(lnewton.x):.12f}, nu/theta = {4 / 10}")
