"""Closed-form geometries: positive orthant, unit cube and Lorentz cone.

Also the light-cone machinery of the Lorentz cone: light vectors ``b``
(``b^0 > 0``, ``b^T B b = 0``), the observables

    f_b(x) = sqrt(m)/2 * log((b^T x)^2 / x^T A x),     m = n + 1,

and the constant drift / state-dependent covariance of those observables.
"""

import numpy as np

from .errors import DomainError, UsageError
from .geometry import BarrierGeometry, ScalarField

__all__ = [
    "OrthantGeometry",
    "CubeGeometry",
    "LorentzGeometry",
    "GEOMETRIES",
    "make_geometry",
    "make_light_vector",
    "default_light_vectors",
    "lorentz_aux_f",
    "lorentz_aux_gradient",
    "lorentz_aux_field",
    "lorentz_sigma",
    "lorentz_mu",
    "minkowski_product",
]


def _diag(v):
    # batched diagonal matrix from (..., n)
    return v[..., :, None] * np.eye(v.shape[-1])


class OrthantGeometry(BarrierGeometry):
    """Positive orthant with ``F(x) = -sum log x^i`` and ``g = diag(1/x^2)``."""

    name = "orthant"
    is_cone = True

    def contains(self, x):
        return np.all(np.asarray(x) > 0, axis=-1)

    def barrier(self, x):
        return -np.sum(np.log(x), axis=-1)

    def gradient(self, x):
        return -1.0 / np.asarray(x, dtype=float)

    def metric(self, x):
        return _diag(1.0 / np.square(x))

    def inverse_metric(self, x):
        return _diag(np.square(x))

    def inverse_metric_divergence(self, x):
        return 2.0 * np.asarray(x, dtype=float)

    def drift(self, x):
        # 2x from the divergence, -x from g^{-1} dF
        return np.array(x, dtype=float)

    def noise_factor(self, x):
        return _diag(np.asarray(x, dtype=float))

    def sample_interior(self, rng, size=None):
        shape = (self.dim,) if size is None else (size, self.dim)
        return np.exp(rng.uniform(-1.0, 1.0, shape))


class CubeGeometry(BarrierGeometry):
    """Unit cube ``(0, 1)^n`` with ``F(x) = -sum log(sin(pi x^i) / pi)``.

    Points closer than ``EDGE`` to a face are treated as outside: the metric
    ``pi^2 / sin^2`` loses all precision there.
    """

    name = "cube"
    EDGE = 1e-8

    def contains(self, x):
        x = np.asarray(x)
        return np.all((x > self.EDGE) & (x < 1.0 - self.EDGE), axis=-1)

    @property
    def bounds(self):
        return (0.0, 1.0)

    def barrier(self, x):
        return -np.sum(np.log(np.sin(np.pi * np.asarray(x)) / np.pi), axis=-1)

    def gradient(self, x):
        return -np.pi / np.tan(np.pi * np.asarray(x, dtype=float))

    def metric(self, x):
        return _diag(np.square(np.pi / np.sin(np.pi * np.asarray(x, dtype=float))))

    def inverse_metric(self, x):
        return _diag(np.square(np.sin(np.pi * np.asarray(x, dtype=float)) / np.pi))

    def inverse_metric_divergence(self, x):
        return np.sin(2 * np.pi * np.asarray(x, dtype=float)) / np.pi

    def drift(self, x):
        return np.sin(2 * np.pi * np.asarray(x, dtype=float)) / (2 * np.pi)

    def noise_factor(self, x):
        return _diag(np.sin(np.pi * np.asarray(x, dtype=float)) / np.pi)

    def sample_interior(self, rng, size=None):
        shape = (self.dim,) if size is None else (size, self.dim)
        return rng.uniform(0.1, 0.9, shape)


def minkowski_product(x, y):
    """``x^T A y`` with ``A = diag(1, -1, ..., -1)``, batched over leading axes."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return x[..., 0] * y[..., 0] - np.sum(x[..., 1:] * y[..., 1:], axis=-1)


class LorentzGeometry(BarrierGeometry):
    """Lorentz cone ``K_{n+1} = {x^0 > |(x^1..x^n)|}`` in ambient dimension ``dim = n + 1``.

    With ``m = dim`` and ``q = x^T A x``:

        F      = -(m/2) log q + (m/2) log m
        g_ij   = -(m/q) (A_ij - 2 (Ax)_i (Ax)_j / q)
        g^ij   = -(1/m) (q B^ij - 2 x^i x^j),      B = A^{-1}

    ``B`` and ``A`` coincide numerically but are kept apart to track index
    positions.
    """

    name = "lorentz"
    is_cone = True

    def __init__(self, dim):
        super().__init__(dim)
        if self.dim < 2:
            raise UsageError("the Lorentz cone needs ambient dimension >= 2")
        self.A = np.diag([1.0] + [-1.0] * (self.dim - 1))
        self.B = np.linalg.inv(self.A)

    @property
    def spatial_dim(self):
        return self.dim - 1

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        return x[..., 0] > np.linalg.norm(x[..., 1:], axis=-1)

    def _q(self, x):
        return minkowski_product(x, x)

    def barrier(self, x):
        m = self.dim
        return -0.5 * m * np.log(self._q(x)) + 0.5 * m * np.log(m)

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        return -self.dim * (x @ self.A) / self._q(x)[..., None]

    def metric(self, x):
        x = np.asarray(x, dtype=float)
        q = self._q(x)[..., None, None]
        ax = x @ self.A
        return -(self.dim / q) * (self.A - 2.0 * ax[..., :, None] * ax[..., None, :] / q)

    def inverse_metric(self, x):
        x = np.asarray(x, dtype=float)
        q = self._q(x)[..., None, None]
        return -(q * self.B - 2.0 * x[..., :, None] * x[..., None, :]) / self.dim

    def inverse_metric_divergence(self, x):
        # d_j(q B^ij) = 2 x^i, d_j(x^i x^j) = (m + 1) x^i
        return 2.0 * np.asarray(x, dtype=float)

    def drift(self, x):
        return np.array(x, dtype=float)

    def sample_interior(self, rng, size=None):
        count = 1 if size is None else size
        x0 = rng.uniform(1.0, 3.0, count)
        n = self.spatial_dim
        direction = rng.standard_normal((count, n))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        radius = 0.8 * x0 * rng.uniform(0.0, 1.0, count) ** (1.0 / n)
        pts = np.column_stack([x0, direction * radius[:, None]])
        return pts[0] if size is None else pts


GEOMETRIES = {
    "orthant": OrthantGeometry,
    "cube": CubeGeometry,
    "lorentz": LorentzGeometry,
}


def make_geometry(name, dim):
    """Build a geometry from its CLI name (``orthant``, ``cube`` or ``lorentz``)."""
    try:
        cls = GEOMETRIES[name]
    except KeyError:
        raise UsageError(f"unknown geometry {name!r}; choose from {sorted(GEOMETRIES)}") from None
    return cls(dim)


# -- light cone -------------------------------------------------------------

def make_light_vector(u):
    """Light vector ``b = (1, u)`` for a spatial unit vector ``u``."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.ndim != 1 or abs(np.linalg.norm(u) - 1.0) >= 1e-12:
        raise UsageError(f"spatial direction must be a unit vector, got norm {np.linalg.norm(u)!r}")
    return np.concatenate([[1.0], u])


def default_light_vectors(n):
    """The family ``b_i = (1, e_i)``, i = 1..n."""
    return [make_light_vector(e) for e in np.eye(n)]


def _check_light(b):
    b = np.asarray(b, dtype=float)
    if b[0] <= 0 or abs(minkowski_product(b, b)) >= 1e-12:
        raise UsageError(f"{b} is not a future light vector")
    return b


def lorentz_aux_f(b, x):
    """``f_b(x) = sqrt(m)/2 log((b^T x)^2 / x^T A x)``; homogeneous of degree 0."""
    b = _check_light(b)
    x = np.asarray(x, dtype=float)
    bx = x @ b
    q = minkowski_product(x, x)
    if np.any(bx <= 0) or np.any(q <= 0):
        raise DomainError("f_b needs b^T x > 0 and x^T A x > 0")
    return 0.5 * np.sqrt(b.size) * np.log(bx * bx / q)


def lorentz_aux_gradient(b, x):
    b = np.asarray(b, dtype=float)
    x = np.asarray(x, dtype=float)
    ax = np.concatenate([x[..., :1], -x[..., 1:]], axis=-1)
    return np.sqrt(b.size) * (b / (x @ b)[..., None] - ax / minkowski_product(x, x)[..., None])


def lorentz_aux_hessian(b, x):
    b = np.asarray(b, dtype=float)
    x = np.asarray(x, dtype=float)
    m = b.size
    A = np.diag([1.0] + [-1.0] * (m - 1))
    bx = (x @ b)[..., None, None]
    q = minkowski_product(x, x)[..., None, None]
    ax = x @ A
    return np.sqrt(m) * (
        -np.outer(b, b) / bx**2 - A / q + 2.0 * ax[..., :, None] * ax[..., None, :] / q**2
    )


def lorentz_aux_field(b):
    b = _check_light(b)
    return ScalarField(
        lambda x: lorentz_aux_f(b, x),
        lambda x: lorentz_aux_gradient(b, x),
        lambda x: lorentz_aux_hessian(b, x),
        name=f"f_b{tuple(np.round(b, 6))}",
    )


def lorentz_sigma(b_i, b_j, f_i, f_j):
    """Covariance ``1 - (b_i^T B b_j) exp(-(f_i + f_j)/sqrt(m))`` of two light observables."""
    b_i = np.asarray(b_i, dtype=float)
    b_j = np.asarray(b_j, dtype=float)
    f_i = np.asarray(f_i, dtype=float)
    f_j = np.asarray(f_j, dtype=float)
    if not (np.all(np.isfinite(f_i)) and np.all(np.isfinite(f_j))):
        raise UsageError("observable values must be finite")
    return 1.0 - minkowski_product(b_i, b_j) * np.exp(-(f_i + f_j) / np.sqrt(b_i.size))


def lorentz_mu(n):
    """Drift ``(n-1) / (2 sqrt(n+1))`` of each spatial light observable at beta = 2."""
    if n < 1:
        raise UsageError("spatial dimension must be >= 1")
    return (n - 1) / (2.0 * np.sqrt(n + 1))
