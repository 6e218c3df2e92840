"""Path statistics and Monte Carlo tests of the Brownian-motion identities.

Normalization used throughout: under the generator ``(1/beta) Delta`` a smooth
observable ``f`` of Brownian motion has drift ``(1/beta) Delta f`` and
quadratic variation rate ``(2/beta) |grad f|_g^2`` (see ``qv_rate_factor``).
The expected values computed here follow that convention; callers comparing
against other normalizations pass their own expectations to
``bm_conformance_test``.
"""

from dataclasses import dataclass, field, asdict
import json
import math
import warnings

import numpy as np
from scipy import integrate, stats

from .cones import LorentzGeometry, default_light_vectors, lorentz_aux_f, lorentz_mu, lorentz_sigma
from .errors import ObservableError, PreconditionError, UsageError
from .geometry import gradient_norm2

__all__ = [
    "ScalarPath",
    "StatReport",
    "qv_rate_factor",
    "observable_path",
    "realized_covariation",
    "predicted_covariation",
    "bm_conformance_test",
    "lorentz_theorem_test",
    "stationary_histogram_test",
    "gibbs_density",
    "MIN_REPLICAS",
]

MIN_REPLICAS = 64


def qv_rate_factor(beta):
    """Quadratic variation per unit time of a unit-gradient observable: ``2 / beta``."""
    return 2.0 / beta


@dataclass(frozen=True, eq=False)
class ScalarPath:
    """An observable along an ensemble: ``values`` has shape ``(replicas, K+1)``."""

    times: np.ndarray
    values: np.ndarray

    @property
    def replicas(self):
        return self.values.shape[0]

    @property
    def horizon(self):
        return float(self.times[-1] - self.times[0])

    def increments(self):
        return np.diff(self.values, axis=1)

    def __sub__(self, other):
        if isinstance(other, ScalarPath):
            _check_grid(self, other)
            return ScalarPath(self.times, self.values - other.values)
        return ScalarPath(self.times, self.values - other)

    def __mul__(self, k):
        return ScalarPath(self.times, self.values * k)

    __rmul__ = __mul__

    def centered(self):
        """Subtract each replica's initial value."""
        return ScalarPath(self.times, self.values - self.values[:, :1])


@dataclass
class StatReport:
    """Outcome of a statistical check; serializes to JSON."""

    test: str
    estimate: dict = field(default_factory=dict)
    stderr: dict = field(default_factory=dict)
    expected: dict = field(default_factory=dict)
    ks_statistic: float | None = None
    ks_p: float | None = None
    verdict: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    @property
    def passed(self):
        return bool(self.verdict) and all(self.verdict.values())

    def to_dict(self):
        d = asdict(self)
        d["verdict"] = {k: ("pass" if v else "fail") for k, v in self.verdict.items()}
        d["verdict"]["overall"] = "pass" if self.passed else "fail"
        return d

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), default=_jsonable, sort_keys=True, **kwargs)

    def summary(self):
        parts = []
        for k, v in self.estimate.items():
            text = f"{k}={v:.5g}"
            if k in self.stderr:
                text += f"±{self.stderr[k]:.2g}"
            if k in self.expected:
                text += f" (expected {self.expected[k]:.5g})"
            parts.append(text)
        if self.ks_p is not None:
            parts.append(f"ks_p={self.ks_p:.3g}")
        return f"{self.test}: {'PASS' if self.passed else 'FAIL'} " + ", ".join(parts)


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return str(obj)


def _check_grid(p, q):
    if p.values.shape != q.values.shape or not np.array_equal(p.times, q.times):
        raise UsageError("scalar paths live on different time grids")


def observable_path(path, f):
    """Evaluate ``f`` (vectorized over points) at every stored state."""
    with np.errstate(all="ignore"):
        values = np.asarray(f(path.states), dtype=float)
    if values.shape != path.states.shape[:2]:
        raise UsageError(f"observable returned shape {values.shape}, expected {path.states.shape[:2]}")
    bad = ~np.isfinite(values)
    if bad.any():
        step = int(np.flatnonzero(bad.any(axis=0))[0])
        raise ObservableError(int(path.steps[step]) if hasattr(path, "steps") else step,
                              "observable is not finite")
    return ScalarPath(path.times, values)


def realized_covariation(p, q=None):
    """Running sum of increment products; ``q=None`` gives realized quadratic variation."""
    q = p if q is None else q
    _check_grid(p, q)
    prod = p.increments() * q.increments()
    out = np.zeros_like(p.values)
    np.cumsum(prod, axis=1, out=out[:, 1:])
    return ScalarPath(p.times, out)


def predicted_covariation(path, geometry, grad1, grad2=None, beta=1.0, chunk=2048):
    """Left-point quadrature of ``(2/beta) g^{ij} d_i f1 d_j f2`` along each trajectory.

    ``grad1``/``grad2`` map points ``(..., dim)`` to covectors.
    """
    grad2 = grad1 if grad2 is None else grad2
    R, K1, _ = path.states.shape
    rate = np.empty((R, K1 - 1))
    for start in range(0, K1 - 1, chunk):
        x = path.states[:, start:min(start + chunk, K1 - 1)]
        rate[:, start:start + x.shape[1]] = gradient_norm2(geometry, x, grad1(x), grad2(x))
    dt = np.diff(path.times)
    out = np.zeros((R, K1))
    np.cumsum(qv_rate_factor(beta) * rate * dt, axis=1, out=out[:, 1:])
    return ScalarPath(path.times, out)


def _mean_se(samples):
    samples = np.asarray(samples, dtype=float)
    return float(samples.mean()), float(samples.std(ddof=1) / math.sqrt(samples.size))


def _block_size(p, block):
    dt = float(p.times[1] - p.times[0])
    L = int(round(block / dt))
    if L < 1 or abs(L * dt - block) > 1e-6 * block:
        raise UsageError(f"block length {block} is not a multiple of the grid spacing {dt}")
    return L, L * dt


def bm_conformance_test(p, expected_drift, expected_qv_rate, block=0.1, alpha=0.01, n_sigma=3.0, name="bm_conformance"):
    """Check that a scalar ensemble behaves like Brownian motion with given rates.

    Three checks: the mean terminal displacement per unit time against
    ``expected_drift``, the mean terminal realized quadratic variation per
    unit time against ``expected_qv_rate`` (both within ``n_sigma``
    replica-standard errors), and a Kolmogorov-Smirnov test of standardized
    non-overlapping block increments against N(0, 1) at level ``alpha``.
    """
    if p.replicas < MIN_REPLICAS:
        raise UsageError(f"need at least {MIN_REPLICAS} replicas, got {p.replicas}")
    T = p.horizon
    drift, drift_se = _mean_se((p.values[:, -1] - p.values[:, 0]) / T)
    qv, qv_se = _mean_se(realized_covariation(p).values[:, -1] / T)

    L, tau = _block_size(p, block)
    nblocks = (p.values.shape[1] - 1) // L
    blocks = np.diff(p.values[:, : nblocks * L + 1 : L], axis=1).ravel()
    z = (blocks - expected_drift * tau) / math.sqrt(expected_qv_rate * tau)
    ks = stats.kstest(z, "norm")

    return StatReport(
        test=name,
        estimate={"drift": drift, "qv_rate": qv},
        stderr={"drift": drift_se, "qv_rate": qv_se},
        expected={"drift": float(expected_drift), "qv_rate": float(expected_qv_rate)},
        ks_statistic=float(ks.statistic),
        ks_p=float(ks.pvalue),
        verdict={
            "drift": abs(drift - expected_drift) <= n_sigma * drift_se,
            "qv_rate": abs(qv - expected_qv_rate) <= n_sigma * qv_se,
            "ks": ks.pvalue > alpha,
        },
        config={"replicas": p.replicas, "horizon": T, "block": tau, "alpha": alpha, "n_sigma": n_sigma},
    )


def lorentz_theorem_test(path, geometry, light_vectors=None, beta=2.0, block=0.1, alpha=0.01,
                         n_sigma=3.0, cov_rel_tol=0.1):
    """Test the light-cone observables of Lorentz-cone Brownian motion at beta = 2.

    With ``m = n + 1``, ``f^0 = F / sqrt(m)`` and ``f^i = f_{b_i}``:

    * ``f^0`` has drift 0 and ``f^i`` has drift ``(n-1)/(2 sqrt(m))``;
    * each has quadratic variation rate ``(2/beta) * 1``;
    * for ``i != j`` the realized covariation tracks the path integral of
      ``(2/beta) Sigma^{ij}(f^i_t, f^j_t)``; the ensemble-mean discrepancy
      relative to the predicted value must stay below ``cov_rel_tol``.
    """
    if not isinstance(geometry, LorentzGeometry):
        raise UsageError("the light-cone test needs a Lorentz geometry")
    if beta != 2.0:
        raise UsageError("the light-cone drift/covariance identities are stated at beta = 2 only")
    n = geometry.spatial_dim
    m = geometry.dim
    bs = default_light_vectors(n) if light_vectors is None else [np.asarray(b, float) for b in light_vectors]

    f0 = observable_path(path, lambda x: geometry.barrier(x) / math.sqrt(m))
    fs = [observable_path(path, lambda x, b=b: lorentz_aux_f(b, x)) for b in bs]
    scale = qv_rate_factor(beta)
    mu = lorentz_mu(n) * (2.0 / beta)

    report = StatReport(test="lorentz_light_cone", config={"beta": beta, "spatial_dim": n,
                                                           "replicas": path.replicas, "horizon": f0.horizon})
    ks_p = []
    for label, p, drift in [("f0", f0, 0.0)] + [(f"f{i + 1}", f, mu) for i, f in enumerate(fs)]:
        r = bm_conformance_test(p, drift, scale, block=block, alpha=alpha, n_sigma=n_sigma)
        for key in ("drift", "qv_rate"):
            report.estimate[f"{label}_{key}"] = r.estimate[key]
            report.stderr[f"{label}_{key}"] = r.stderr[key]
            report.expected[f"{label}_{key}"] = r.expected[key]
            report.verdict[f"{label}_{key}"] = r.verdict[key]
        report.verdict[f"{label}_ks"] = r.verdict["ks"]
        ks_p.append(r.ks_p)
    report.ks_p = min(ks_p)

    dt = np.diff(path.times)
    for i in range(len(bs)):
        for j in range(i + 1, len(bs)):
            real = realized_covariation(fs[i], fs[j]).values[:, -1]
            sigma = lorentz_sigma(bs[i], bs[j], fs[i].values[:, :-1], fs[j].values[:, :-1])
            pred = (scale * sigma * dt).sum(axis=1)
            rel = abs(real.mean() - pred.mean()) / abs(pred.mean())
            key = f"cov_f{i + 1}f{j + 1}"
            report.estimate[key] = float(real.mean())
            report.stderr[key] = _mean_se(real - pred)[1]
            report.expected[key] = float(pred.mean())
            report.verdict[key] = rel < cov_rel_tol
    return report


def gibbs_density(geometry, energy, beta):
    """Unnormalized stationary Lebesgue density ``exp(-beta E) sqrt(det g)``."""

    def rho(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        logvol = 0.5 * np.linalg.slogdet(geometry.metric(x))[1]
        e = 0.0 if energy is None else energy.value(x)
        return float(np.exp(logvol - beta * e))

    return rho


def _normalizer(rho, lo, hi):
    # integrate on shrinking inner intervals; a divergent integral keeps growing
    masses = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for eps in (1e-6, 1e-9, 1e-12):
            mass = 0.0
            for a, b in ((lo + eps, 0.5 * (lo + hi)), (0.5 * (lo + hi), hi - eps)):
                mass += integrate.quad(rho, a, b, limit=200)[0]
            masses.append(mass)
    if not np.all(np.isfinite(masses)) or abs(masses[2] - masses[1]) > 1e-3 * abs(masses[1]):
        raise PreconditionError(
            "the integral of exp(-beta E) sqrt(det g) over the domain diverges at the boundary "
            f"(inner-interval masses {masses[0]:.4g}, {masses[1]:.4g}, {masses[2]:.4g})"
        )
    return masses[2]


def stationary_histogram_test(endpoints, geometry, energy, beta, bins=20, tv_tol=0.05):
    """Compare an endpoint histogram with the normalized Gibbs density.

    Supports one-dimensional bounded geometries.  Reports the total-variation
    distance between bin frequencies and exact bin probabilities, and a
    chi-squared p-value.

    Raises:
        PreconditionError: the target is not normalizable.
    """
    if geometry.dim != 1 or not hasattr(geometry, "bounds"):
        raise UsageError("stationary histogram test supports one-dimensional bounded domains")
    lo, hi = geometry.bounds
    rho = gibbs_density(geometry, energy, beta)
    Z = _normalizer(rho, lo, hi)
    x = np.asarray(endpoints, dtype=float).reshape(-1)
    edges = np.linspace(lo, hi, bins + 1)
    counts = np.histogram(x, bins=edges)[0]
    inner = edges.copy()
    inner[0] += 1e-12
    inner[-1] -= 1e-12
    probs = np.array([integrate.quad(rho, a, b, limit=200)[0] for a, b in zip(inner[:-1], inner[1:])]) / Z
    probs /= probs.sum()
    N = x.size
    tv = 0.5 * float(np.abs(counts / N - probs).sum())
    chi = stats.chisquare(counts, N * probs)
    return StatReport(
        test="stationary_histogram",
        estimate={"tv_distance": tv, "chi2": float(chi.statistic), "chi2_p": float(chi.pvalue)},
        expected={"tv_distance": 0.0},
        verdict={"tv_distance": tv < tv_tol},
        config={"beta": beta, "bins": bins, "samples": N, "tv_tol": tv_tol,
                "energy": None if energy is None else energy.kind},
    )
