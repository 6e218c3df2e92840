"""Hessian barrier geometries and their differential operators.

A geometry is an open convex domain together with a barrier ``F`` whose
Hessian ``g = D^2 F`` is used as the Riemannian metric.  All geometry methods
are vectorized over leading axes: a point array of shape ``(..., dim)``
yields barrier values of shape ``(...)``, gradients of shape ``(..., dim)``
and metrics of shape ``(..., dim, dim)``.

The module-level functions (``riemannian_gradient``, ``drift_vector`` ...)
operate on a single point and validate it first.
"""

from dataclasses import dataclass
from typing import Callable
import warnings

import numpy as np
from scipy import linalg

from .errors import DomainError, NumericalError, StencilError, UsageError

__all__ = [
    "BarrierGeometry",
    "ScalarField",
    "check_interior",
    "riemannian_gradient",
    "drift_vector",
    "laplace_beltrami",
    "monge_ampere_residual",
    "cone_identity_check",
    "finite_difference_oracle",
    "gradient_norm2",
    "solve_metric",
    "certify_geometry",
]

FD_STEP = 1e-5
CONDITION_WARNING = 1e12


@dataclass(frozen=True)
class ScalarField:
    """A smooth function together with its first and second derivatives.

    Each callable takes points of shape ``(..., dim)``.  ``gradient`` returns
    ``(..., dim)`` and ``hessian`` returns ``(..., dim, dim)``.
    """

    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    hessian: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = "f"

    def __call__(self, x):
        return self.value(x)


class BarrierGeometry:
    """Base class for a domain equipped with a Hessian barrier metric.

    Subclasses implement ``contains``, ``barrier``, ``gradient`` and
    ``metric``.  Closed forms for ``inverse_metric`` and
    ``inverse_metric_divergence`` should be supplied where known; the
    defaults fall back to a matrix inverse and central differences.

    Attributes:
        dim: ambient dimension.
        is_cone: whether the domain is a cone with a logarithmically
            homogeneous barrier.
        canonical: whether ``F = 1/2 log det D^2 F`` holds, which lets the
            drift use ``dF`` in place of ``d(1/2 log det g)``.
    """

    name = "geometry"
    is_cone = False
    canonical = True

    def __init__(self, dim):
        dim = int(dim)
        if dim < 1:
            raise UsageError(f"dimension must be positive, got {dim}")
        self.dim = dim

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"

    @property
    def barrier_parameter(self):
        """Degree of logarithmic homogeneity (cones only)."""
        if not self.is_cone:
            raise UsageError(f"{self.name} is not a cone")
        return float(self.dim)

    # -- to be provided by subclasses -------------------------------------
    def contains(self, x):
        raise NotImplementedError

    def barrier(self, x):
        raise NotImplementedError

    def gradient(self, x):
        raise NotImplementedError

    def metric(self, x):
        raise NotImplementedError

    def sample_interior(self, rng, size=None):
        raise NotImplementedError

    # -- generic fallbacks --------------------------------------------------
    def inverse_metric(self, x):
        return np.linalg.inv(self.metric(x))

    def inverse_metric_divergence(self, x):
        """``d_j g^{ij}`` by central differences (h = 1e-5)."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for j in range(self.dim):
            e = np.zeros(self.dim)
            e[j] = FD_STEP
            dg = (self.inverse_metric(x + e) - self.inverse_metric(x - e)) / (2 * FD_STEP)
            out += dg[..., :, j]
        return out

    def log_volume_gradient(self, x):
        """``d_i (1/2 log det g)``; equals ``dF`` for a canonical barrier."""
        if self.canonical:
            return self.gradient(x)
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for j in range(self.dim):
            e = np.zeros(self.dim)
            e[j] = FD_STEP
            hi = np.linalg.slogdet(self.metric(x + e))[1]
            lo = np.linalg.slogdet(self.metric(x - e))[1]
            out[..., j] = 0.25 * (hi - lo) / FD_STEP
        return out

    def drift(self, x):
        """Vector ``b`` with ``Laplace-Beltrami f = g^{ij} f_ij + b^i f_i``."""
        ginv = self.inverse_metric(x)
        return self.inverse_metric_divergence(x) + np.einsum(
            "...ij,...j->...i", ginv, self.log_volume_gradient(x)
        )

    def noise_factor(self, x):
        """Lower-triangular ``S`` with ``S S^T = g^{-1}``."""
        try:
            return np.linalg.cholesky(self.inverse_metric(x))
        except np.linalg.LinAlgError as exc:
            raise NumericalError("inverse metric is not positive definite") from exc

    def barrier_field(self):
        return ScalarField(self.barrier, self.gradient, self.metric, name="F")


def check_interior(geometry, x):
    """Return ``x`` as a float vector, raising if it is not strictly interior."""
    x = np.asarray(x, dtype=float)
    if x.shape != (geometry.dim,):
        raise UsageError(f"expected a point of shape ({geometry.dim},), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError(f"point has non-finite coordinates: {x}")
    if not geometry.contains(x):
        raise DomainError(f"point {x} is not in the interior of the {geometry.name}")
    return x


def _factor_metric(geometry, x):
    g = geometry.metric(x)
    cond = np.linalg.cond(g)
    if not np.isfinite(cond):
        raise NumericalError(f"metric is singular at {x} (condition number {cond:.3g})")
    if cond > CONDITION_WARNING:
        warnings.warn(f"metric condition number {cond:.3g} at {x}", RuntimeWarning, stacklevel=3)
    try:
        return linalg.cho_factor(g)
    except linalg.LinAlgError as exc:
        raise NumericalError(f"metric is not positive definite at {x} (condition number {cond:.3g})") from exc


def solve_metric(geometry, x, v):
    """Solve ``g(x) u = v`` with a Cholesky factorization of the metric."""
    return linalg.cho_solve(_factor_metric(geometry, x), np.asarray(v, dtype=float))


def riemannian_gradient(geometry, x, df):
    """Raise the index of a covector: ``g^{-1}(x) df``."""
    x = check_interior(geometry, x)
    df = np.asarray(df, dtype=float)
    if df.shape != (geometry.dim,):
        raise UsageError(f"covector must have length {geometry.dim}")
    return solve_metric(geometry, x, df)


def drift_vector(geometry, x):
    """First-order coefficient of the Laplace-Beltrami operator at ``x``.

    ``b^i = d_j g^{ij} + g^{ij} d_j F``; for cones the second term is ``-x``.
    """
    x = check_interior(geometry, x)
    return geometry.drift(x)


def laplace_beltrami(geometry, f, x):
    """Evaluate ``Delta f = g^{ij} d_i d_j f + b^i d_i f`` at an interior point."""
    x = check_interior(geometry, x)
    if f.hessian is None:
        hess = finite_difference_oracle(f.value, x, order=2, domain=geometry.contains)
    else:
        hess = f.hessian(x)
    ginv = geometry.inverse_metric(x)
    return float(np.sum(ginv * hess) + geometry.drift(x) @ f.gradient(x))


def gradient_norm2(geometry, x, df, dh=None):
    """g-inner product ``g^{ij} df_i dh_j`` (vectorized over leading axes)."""
    dh = df if dh is None else dh
    return np.einsum("...i,...ij,...j->...", df, geometry.inverse_metric(x), dh)


def monge_ampere_residual(geometry, x, hessian=None):
    """``F(x) - 1/2 log det D^2 F(x)``; zero for a canonical barrier.

    ``hessian`` may be passed to certify an externally computed Hessian
    (for instance a finite-difference one).
    """
    x = check_interior(geometry, x)
    g = geometry.metric(x) if hessian is None else np.asarray(hessian, dtype=float)
    sign, logdet = np.linalg.slogdet(g)
    if sign <= 0 or np.linalg.eigvalsh(0.5 * (g + g.T))[0] <= 0:
        raise NumericalError(f"barrier Hessian is not positive definite at {x}")
    return float(geometry.barrier(x) - 0.5 * logdet)


def cone_identity_check(geometry, x):
    """Residuals of the three cone identities at ``x``.

    Returns ``(grad F + x, |dF|_g^2 - nu, Delta F)``, all of which vanish for
    the canonical barrier of a cone with barrier parameter ``nu``.
    """
    if not geometry.is_cone:
        raise UsageError(f"cone identities are undefined on the non-cone {geometry.name}")
    x = check_interior(geometry, x)
    dF = geometry.gradient(x)
    grad = riemannian_gradient(geometry, x, dF)
    norm2 = float(dF @ grad) - geometry.barrier_parameter
    lap = laplace_beltrami(geometry, geometry.barrier_field(), x)
    return grad + x, norm2, lap


def finite_difference_oracle(f, x, order=1, h=FD_STEP, domain=None):
    """Central-difference gradient (``order=1``) or Hessian (``order=2``).

    Args:
        f: scalar function of a point.
        x: evaluation point.
        order: 1 for the gradient, 2 for the Hessian.
        h: step size; truncation error is O(h^2).
        domain: optional predicate; every stencil point must satisfy it.

    Raises:
        StencilError: a stencil point falls outside ``domain`` (or ``f``
            raises a ``DomainError`` there).
    """
    if h <= 0:
        raise UsageError("step size must be positive")
    if order not in (1, 2):
        raise UsageError("order must be 1 or 2")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = x.size

    def ev(point, coord):
        if domain is not None and not domain(point):
            raise StencilError(coord)
        try:
            return float(np.squeeze(f(point)))
        except DomainError as exc:
            raise StencilError(coord) from exc

    eye = np.eye(n) * h
    if order == 1:
        return np.array([(ev(x + eye[i], i) - ev(x - eye[i], i)) / (2 * h) for i in range(n)])
    hess = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            pp = ev(x + eye[i] + eye[j], i)
            pm = ev(x + eye[i] - eye[j], j)
            mp = ev(x - eye[i] + eye[j], j)
            mm = ev(x - eye[i] - eye[j], i)
            hess[i, j] = hess[j, i] = (pp - pm - mp + mm) / (4 * h * h)
    return hess


def _rel(a, b):
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


def certify_geometry(geometry, points, tol=1e-8, fd_tol=1e-4, h=FD_STEP):
    """Evaluate every closed-form identity of ``geometry`` at ``points``.

    Returns a dict ``check -> {"max_residual", "tol", "status"}`` where status
    is ``pass``, ``fail`` or ``skipped`` (cone identities on non-cones).
    Closed-form checks use absolute residuals against ``tol``; the
    finite-difference cross-checks use relative errors against ``fd_tol``.
    """
    closed = {"monge_ampere": [], "metric_inverse": [], "metric_symmetry": []}
    fd = {"gradient_fd": [], "hessian_fd": [], "monge_ampere_fd": [], "drift_fd": []}
    cone = {"grad_identity": [], "norm_identity": [], "laplacian_identity": [], "log_homogeneity": []}
    eye = np.eye(geometry.dim)
    for x in np.atleast_2d(points):
        x = check_interior(geometry, x)
        g = geometry.metric(x)
        closed["monge_ampere"].append(abs(monge_ampere_residual(geometry, x)))
        closed["metric_inverse"].append(np.max(np.abs(g @ geometry.inverse_metric(x) - eye)))
        closed["metric_symmetry"].append(np.max(np.abs(g - g.T)))

        fd_grad = finite_difference_oracle(geometry.barrier, x, 1, h, geometry.contains)
        fd_hess = finite_difference_oracle(geometry.barrier, x, 2, h, geometry.contains)
        fd["gradient_fd"].append(_rel(fd_grad, geometry.gradient(x)))
        fd["hessian_fd"].append(_rel(fd_hess, g))
        fd["monge_ampere_fd"].append(abs(monge_ampere_residual(geometry, x, hessian=fd_hess)))
        generic = BarrierGeometry.inverse_metric_divergence(geometry, x) + geometry.inverse_metric(x) @ geometry.gradient(x)
        fd["drift_fd"].append(_rel(generic, geometry.drift(x)))

        if geometry.is_cone:
            a, b, c = cone_identity_check(geometry, x)
            cone["grad_identity"].append(np.max(np.abs(a)))
            cone["norm_identity"].append(abs(b))
            cone["laplacian_identity"].append(abs(c))
            F = geometry.barrier(x)
            nu = geometry.barrier_parameter
            cone["log_homogeneity"].append(
                max(abs(geometry.barrier(lam * x) - F + nu * np.log(lam)) for lam in (0.5, 2.0, 10.0))
            )

    report = {}
    for checks, limit in ((closed, tol), (fd, fd_tol), (cone, tol)):
        for name, vals in checks.items():
            if not vals:
                report[name] = {"max_residual": None, "tol": limit, "status": "skipped"}
                continue
            worst = float(np.max(vals))
            report[name] = {"max_residual": worst, "tol": limit, "status": "pass" if worst < limit else "fail"}
    return report
