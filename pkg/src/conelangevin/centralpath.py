"""Central path of ``min c.x`` over a cone with barrier ``F``.

``x(theta) = argmin F(x) + theta c.x`` is computed two ways: by damped Newton
at fixed ``theta`` and by integrating the gradient flow
``dx/dtheta = -g(x)^{-1} c`` with classical RK4.  On a cone the path satisfies
``c.x(theta) = nu / theta`` for barrier parameter ``nu``.
"""

from dataclasses import dataclass
import csv

import numpy as np

from .cones import CubeGeometry, LorentzGeometry, OrthantGeometry
from .errors import ConvergenceError, DomainError, UsageError
from .geometry import check_interior, solve_metric

__all__ = [
    "ConicProgram",
    "CentralPathPoint",
    "newton_central_point",
    "flow_central_path",
    "solve_conic",
    "write_trajectory_csv",
    "trajectory_summary",
]

MAX_NEWTON = 200
FULL_STEP = 0.25


class ConicProgram:
    """``min c.x`` over the interior of ``geometry``.

    For the built-in cones ``c`` must lie in the interior of the dual cone
    (both are self-dual), otherwise the central path does not exist.
    """

    def __init__(self, geometry, c):
        self.geometry = geometry
        self.c = np.asarray(c, dtype=float)
        if self.c.shape != (geometry.dim,):
            raise UsageError(f"cost must have length {geometry.dim}")
        if isinstance(geometry, OrthantGeometry) and not np.all(self.c > 0):
            raise UsageError("orthant cost must be strictly positive (interior of the dual cone)")
        if isinstance(geometry, LorentzGeometry) and not self.c[0] > np.linalg.norm(self.c[1:]):
            raise UsageError("Lorentz cost must satisfy c0 > |spatial(c)| (interior of the dual cone)")

    def default_start(self):
        g = self.geometry
        if isinstance(g, CubeGeometry):
            return np.full(g.dim, 0.5)
        if isinstance(g, LorentzGeometry):
            return np.eye(g.dim)[0]
        return np.ones(g.dim)

    def objective(self, x):
        return float(self.c @ x)


@dataclass(frozen=True)
class CentralPathPoint:
    theta: float
    x: np.ndarray
    newton_decrement: float
    iterations: int = 0

    def residual(self, prog):
        """First-order residual ``|dF + theta c|`` in the local dual norm."""
        r = prog.geometry.gradient(self.x) + self.theta * prog.c
        return float(np.sqrt(r @ solve_metric(prog.geometry, self.x, r)))


def newton_central_point(prog, theta, x_init, tol=1e-10):
    """Minimize ``F + theta c.x`` by damped Newton.

    Full steps once the Newton decrement is below 1/4, otherwise the step is
    scaled by ``1/(1 + decrement)``.  Stops once the decrement is below
    ``tol`` after taking that last full step.

    Raises:
        ConvergenceError: no convergence within 200 iterations.
        DomainError: an iterate left the domain.
    """
    if theta < 0:
        raise UsageError("theta must be nonnegative")
    g = prog.geometry
    x = check_interior(g, x_init).copy()
    lam = np.inf
    for it in range(MAX_NEWTON + 1):
        r = g.gradient(x) + theta * prog.c
        step = -solve_metric(g, x, r)
        lam = float(np.sqrt(max(-(r @ step), 0.0)))
        if lam < tol:
            # the closing full step costs nothing and squares the error
            x_final = x + step
            return CentralPathPoint(float(theta), x_final if g.contains(x_final) else x, lam, it)
        if it == MAX_NEWTON:
            break
        x = x + (step if lam < FULL_STEP else step / (1.0 + lam))
        if not g.contains(x):
            raise DomainError(f"Newton iterate left the domain at theta={theta}: {x}")
    raise ConvergenceError(f"Newton did not converge in {MAX_NEWTON} iterations (decrement {lam:.3g})", lam)


def flow_central_path(prog, theta0, theta1, start, step=1e-2):
    """Integrate ``dx/dtheta = -g^{-1} c`` from ``theta0`` to ``theta1`` with RK4.

    Args:
        start: a ``CentralPathPoint`` at ``theta0``.
        step: nominal theta increment; the last step is shortened to land on
            ``theta1``.

    Returns:
        list of ``CentralPathPoint`` (first element is ``start``); their
        ``newton_decrement`` field holds the local first-order residual.
    """
    if not 0 < theta0 <= theta1:
        raise UsageError("need 0 < theta0 <= theta1")
    if abs(start.theta - theta0) > 1e-12 * max(1.0, theta0):
        raise UsageError("starting point does not sit at theta0")
    g = prog.geometry
    x = check_interior(g, start.x).copy()
    if theta1 == theta0:
        return [start]

    def rhs(th, y):
        if not g.contains(y):
            raise DomainError(f"flow left the domain at theta={th:.6g}")
        return -solve_metric(g, y, prog.c)

    out = [start]
    n = max(1, int(np.ceil((theta1 - theta0) / step - 1e-12)))
    thetas = np.linspace(theta0, theta1, n + 1)
    for th, th_next in zip(thetas[:-1], thetas[1:]):
        h = th_next - th
        k1 = rhs(th, x)
        k2 = rhs(th + h / 2, x + h / 2 * k1)
        k3 = rhs(th + h / 2, x + h / 2 * k2)
        k4 = rhs(th + h, x + h * k3)
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not g.contains(x):
            raise DomainError(f"flow left the domain at theta={th_next:.6g}")
        pt = CentralPathPoint(float(th_next), x.copy(), 0.0)
        out.append(CentralPathPoint(pt.theta, pt.x, pt.residual(prog)))
    return out


def solve_conic(prog, theta_max, tol=1e-10, theta0=1.0, x_init=None):
    """Follow the central path by theta-doubling with warm-started Newton.

    Returns:
        list of ``CentralPathPoint`` at ``theta0, 2 theta0, ...`` up to
        ``theta_max``; objectives follow from ``prog.objective``.
    """
    if theta_max < theta0:
        raise UsageError("theta_max must be at least theta0")
    x = prog.default_start() if x_init is None else np.asarray(x_init, dtype=float)
    points = []
    theta = float(theta0)
    while theta <= theta_max * (1 + 1e-12):
        pt = newton_central_point(prog, theta, x, tol)
        points.append(pt)
        x = pt.x
        theta *= 2.0
    return points


def trajectory_summary(prog, points):
    return {
        "geometry": prog.geometry.name,
        "dim": prog.geometry.dim,
        "cost": prog.c.tolist(),
        "stages": len(points),
        "iterations": [p.iterations for p in points],
        "total_iterations": int(sum(p.iterations for p in points)),
        "residuals": [p.residual(prog) for p in points],
        "final_theta": points[-1].theta,
        "final_objective": prog.objective(points[-1].x),
    }


def write_trajectory_csv(file, prog, points):
    """``theta,objective,x0..x{n-1}`` rows with 17 significant digits."""
    writer = csv.writer(file, lineterminator="\n")
    writer.writerow(["theta", "objective"] + [f"x{i}" for i in range(prog.geometry.dim)])
    for p in points:
        writer.writerow([f"{v:.17g}" for v in [p.theta, prog.objective(p.x), *p.x]])

