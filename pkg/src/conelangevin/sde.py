"""Stochastic integrators for Brownian motion and the Riemannian Langevin equation.

Brownian motion at inverse temperature ``beta`` is the diffusion with generator
``(1/beta) Delta``.  In ambient coordinates its Ito form is

    dX = (1/beta) b(X) dt + sqrt(2/beta) S(X) dW,      S S^T = g^{-1},

with ``b`` the first-order coefficient of the Laplace-Beltrami operator.  The
Langevin equation adds ``-g^{-1} dE``.  On flat space this is the classical
``dX = -grad E dt + sqrt(2/beta) dW``.

Every replica draws from its own Philox stream keyed by ``(seed, replica)``,
so results do not depend on how replicas are batched or scheduled.
"""

from dataclasses import dataclass, field, asdict
import re

import numpy as np

from .cones import CubeGeometry, OrthantGeometry
from .errors import StepFailure, UsageError
from .geometry import check_interior

__all__ = [
    "SimulationConfig",
    "EnergySpec",
    "Path",
    "parse_energy",
    "replica_generators",
    "simulate_bm",
    "euler_maruyama_step",
    "simulate_rle",
    "exact_transform_bm",
    "transform_coordinates",
]

_CHUNK = 512


@dataclass(frozen=True)
class SimulationConfig:
    """Parameters of a Monte Carlo run.

    ``save_every`` thins the stored grid (1 keeps every step); the integrator
    always advances with step ``dt``.
    """

    beta: float = 1.0
    dt: float = 1e-3
    horizon: float = 10.0
    seed: int = 0
    replicas: int = 256
    boundary_policy: str = "resample"
    max_tries: int = 100
    scheme: str = "euler_maruyama"
    save_every: int = 1

    def __post_init__(self):
        if not self.beta > 0:
            raise UsageError("beta must be positive")
        if not (self.dt > 0 and self.horizon > 0):
            raise UsageError("dt and horizon must be positive")
        if not self.dt < self.horizon:
            raise UsageError("dt must be smaller than the horizon")
        if abs(self.n_steps * self.dt - self.horizon) > 1e-9 * self.horizon:
            raise UsageError("horizon must be an integer multiple of dt")
        if self.replicas < 1:
            raise UsageError("replicas must be positive")
        if self.boundary_policy not in ("resample", "abort"):
            raise UsageError(f"unknown boundary policy {self.boundary_policy!r}")
        if self.max_tries < 1:
            raise UsageError("max_tries must be >= 1")
        if self.scheme not in ("euler_maruyama", "exact_transform"):
            raise UsageError(f"unknown scheme {self.scheme!r}")
        if self.save_every < 1 or self.n_steps % self.save_every:
            raise UsageError("save_every must divide the number of steps")
        if not 0 <= int(self.seed) < 2**64:
            raise UsageError("seed must be a 64-bit unsigned integer")

    @property
    def n_steps(self):
        return int(round(self.horizon / self.dt))

    def replace(self, **changes):
        return SimulationConfig(**{**asdict(self), **changes})


@dataclass(frozen=True, eq=False)
class EnergySpec:
    """Potential ``E`` for the Langevin equation.

    kinds: ``linear`` (``c . x``), ``quadratic`` (``1/2 (x-m)^T Q (x-m)``) and
    ``barrier`` (``alpha F``).
    """

    kind: str
    c: np.ndarray | None = None
    m: np.ndarray | None = None
    Q: np.ndarray | None = None
    alpha: float = 0.0
    geometry: object = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind == "linear":
            if self.c is None:
                raise UsageError("linear energy needs c")
        elif self.kind == "quadratic":
            if self.m is None or self.Q is None:
                raise UsageError("quadratic energy needs m and Q")
            Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
            if not np.allclose(Q, Q.T) or np.linalg.eigvalsh(Q)[0] < -1e-12:
                raise UsageError("Q must be symmetric positive semidefinite")
        elif self.kind == "barrier":
            if self.geometry is None:
                raise UsageError("barrier energy needs a geometry")
        else:
            raise UsageError(f"unknown energy kind {self.kind!r}")

    @classmethod
    def linear(cls, c):
        return cls("linear", c=np.atleast_1d(np.asarray(c, dtype=float)))

    @classmethod
    def quadratic(cls, m, Q):
        m = np.atleast_1d(np.asarray(m, dtype=float))
        Q = np.asarray(Q, dtype=float)
        if Q.ndim == 0:
            Q = Q * np.eye(m.size)
        return cls("quadratic", m=m, Q=Q)

    @classmethod
    def barrier(cls, geometry, alpha):
        return cls("barrier", alpha=float(alpha), geometry=geometry)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "linear":
            return x @ self.c
        if self.kind == "quadratic":
            d = x - self.m
            return 0.5 * np.einsum("...i,ij,...j->...", d, self.Q, d)
        return self.alpha * self.geometry.barrier(x)

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "linear":
            return np.broadcast_to(self.c, x.shape).copy()
        if self.kind == "quadratic":
            return (x - self.m) @ self.Q
        return self.alpha * self.geometry.gradient(x)

    def is_zero(self):
        if self.kind == "linear":
            return not np.any(self.c)
        if self.kind == "quadratic":
            return not np.any(self.Q)
        return self.alpha == 0.0


def parse_energy(text, geometry):
    """Parse ``linear:c=...``, ``quadratic:m=...,q=...`` or ``barrier:alpha=...``.

    Vector values are comma separated; a new ``key=`` starts the next field.
    ``q`` is either a scalar (times identity) or ``dim*dim`` row-major entries.
    """
    kind, _, rest = text.partition(":")
    fields = {}
    for item in re.split(r",(?=[A-Za-z_]+=)", rest) if rest else []:
        key, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"malformed energy field {item!r}")
        try:
            fields[key.strip()] = np.array([float(v) for v in val.split(",")])
        except ValueError:
            raise UsageError(f"non-numeric value in energy field {item!r}") from None
    n = geometry.dim
    try:
        if kind == "linear":
            return EnergySpec.linear(np.broadcast_to(fields["c"], (n,)))
        if kind == "quadratic":
            q = fields["q"]
            Q = q[0] * np.eye(n) if q.size == 1 else q.reshape(n, n)
            return EnergySpec.quadratic(np.broadcast_to(fields["m"], (n,)), Q)
        if kind == "barrier":
            return EnergySpec.barrier(geometry, fields["alpha"][0])
    except KeyError as exc:
        raise UsageError(f"energy {kind!r} is missing field {exc.args[0]!r}") from None
    except ValueError as exc:
        raise UsageError(f"bad energy shape: {exc}") from None
    raise UsageError(f"unknown energy kind {kind!r}")


@dataclass(frozen=True, eq=False)
class Path:
    """An ensemble of trajectories on a common time grid.

    Attributes:
        times: grid of shape ``(K+1,)``.
        states: array of shape ``(replicas, K+1, dim)``.
        rejection_counts: resampled proposals per replica.
        steps: integrator step index of each stored time.
    """

    times: np.ndarray
    states: np.ndarray
    rejection_counts: np.ndarray
    steps: np.ndarray
    config: SimulationConfig | None = None

    @property
    def replicas(self):
        return self.states.shape[0]

    @property
    def dim(self):
        return self.states.shape[2]

    @property
    def endpoints(self):
        return self.states[:, -1, :]

    @property
    def rejection_count(self):
        return int(self.rejection_counts.sum())

    def replica(self, r):
        return Path(self.times, self.states[r:r + 1], self.rejection_counts[r:r + 1], self.steps, self.config)

    def to_csv(self, file):
        """Write ``replica,step,time,x0..x{n-1}`` rows with 17 significant digits."""
        R, K1, n = self.states.shape
        header = ",".join(["replica", "step", "time"] + [f"x{i}" for i in range(n)])
        cols = np.empty((R * K1, 3 + n))
        cols[:, 0] = np.repeat(np.arange(R), K1)
        cols[:, 1] = np.tile(self.steps, R)
        cols[:, 2] = np.tile(self.times, R)
        cols[:, 3:] = self.states.reshape(R * K1, n)
        fmt = ["%d", "%d"] + ["%.17g"] * (1 + n)
        np.savetxt(file, cols, fmt=fmt, delimiter=",", header=header, comments="")

    def __eq__(self, other):
        return (
            isinstance(other, Path)
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.states, other.states)
            and np.array_equal(self.rejection_counts, other.rejection_counts)
        )


def replica_generators(seed, replica, streams=2):
    """Independent Philox streams fully determined by ``(seed, replica)``."""
    return [
        np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(replica), s))))
        for s in range(streams)
    ]


def _start(geometry, x0, cfg):
    x0 = np.asarray(x0, dtype=float)
    if x0.ndim == 2:
        if x0.shape != (cfg.replicas, geometry.dim):
            raise UsageError("per-replica starting points must have shape (replicas, dim)")
        for row in x0:
            check_interior(geometry, row)
        return x0.copy()
    return np.tile(check_interior(geometry, x0), (cfg.replicas, 1))


def _integrate(geometry, energy, x0, cfg):
    if cfg.scheme != "euler_maruyama":
        raise UsageError("generic integration supports only the euler_maruyama scheme")
    x = _start(geometry, x0, cfg)
    R, n = x.shape
    K = cfg.n_steps
    rngs = [replica_generators(cfg.seed, r) for r in range(R)]
    every = cfg.save_every
    states = np.empty((R, K // every + 1, n))
    states[:, 0] = x
    rejections = np.zeros(R, dtype=np.int64)
    scale = np.sqrt(2.0 * cfg.dt / cfg.beta)
    use_energy = energy is not None and not energy.is_zero()

    for k in range(K):
        j = k % _CHUNK
        if j == 0:
            width = min(_CHUNK, K - k)
            noise = np.stack([g[0].standard_normal((width, n)) for g in rngs])
        base, S = _deterministic_part(geometry, energy if use_energy else None, x, cfg.dt, cfg.beta)
        proposal = base + scale * np.einsum("rij,rj->ri", S, noise[:, j])
        ok = geometry.contains(proposal) & np.all(np.isfinite(proposal), axis=1)
        for r in np.flatnonzero(~ok):
            if cfg.boundary_policy == "abort":
                raise StepFailure(r, k * cfg.dt, x[r], 0)
            for _ in range(cfg.max_tries):
                rejections[r] += 1
                cand = base[r] + scale * S[r] @ rngs[r][1].standard_normal(n)
                if geometry.contains(cand) and np.all(np.isfinite(cand)):
                    proposal[r] = cand
                    break
            else:
                raise StepFailure(r, k * cfg.dt, x[r], cfg.max_tries)
        x = proposal
        if (k + 1) % every == 0:
            states[:, (k + 1) // every] = x

    steps = np.arange(0, K + 1, every)
    return Path(steps * cfg.dt, states, rejections, steps, cfg)


def _deterministic_part(geometry, energy, x, dt, beta):
    drift = (1.0 / beta) * geometry.drift(x)
    if energy is not None:
        drift = drift - np.einsum("...ij,...j->...i", geometry.inverse_metric(x), energy.gradient(x))
    return x + drift * dt, geometry.noise_factor(x)


def euler_maruyama_step(geometry, x, xi, dt, beta, energy=None):
    """One step ``x + drift dt + sqrt(2 dt / beta) S(x) xi`` (no domain check)."""
    x = np.asarray(x, dtype=float)
    base, S = _deterministic_part(geometry, energy, x, dt, beta)
    return base + np.sqrt(2.0 * dt / beta) * np.einsum("...ij,...j->...i", S, xi)


def simulate_bm(geometry, x0, cfg):
    """Euler-Maruyama Brownian motion at inverse temperature ``cfg.beta``.

    Args:
        geometry: a ``BarrierGeometry``.
        x0: interior starting point, or one per replica ``(replicas, dim)``.
        cfg: ``SimulationConfig``.

    Returns:
        Path: ensemble of ``cfg.replicas`` trajectories.

    Raises:
        DomainError: ``x0`` is not interior.
        StepFailure: a step stayed outside the domain after ``max_tries``
            resamples (or at once under the ``abort`` policy).
    """
    if cfg.scheme == "exact_transform":
        return exact_transform_bm(geometry, x0, cfg)
    return _integrate(geometry, None, x0, cfg)


def simulate_rle(geometry, energy, x0, cfg):
    """Euler-Maruyama for ``dX = -grad E dt + dB`` (Brownian motion at ``cfg.beta``).

    The stationary Lebesgue density, when normalizable, is proportional to
    ``exp(-beta E) sqrt(det g)``.
    """
    return _integrate(geometry, energy, x0, cfg)


def transform_coordinates(geometry, x):
    """Coordinates in which Brownian motion is a flat Gaussian walk.

    ``log x`` on the orthant, ``log tan(pi x / 2)`` on the cube.
    """
    x = np.asarray(x, dtype=float)
    if isinstance(geometry, OrthantGeometry):
        return np.log(x)
    if isinstance(geometry, CubeGeometry):
        return np.log(np.tan(0.5 * np.pi * x))
    raise UsageError(f"no flattening transform for {geometry.name}")


def _inverse_transform(geometry, y):
    if isinstance(geometry, OrthantGeometry):
        return np.exp(y)
    return np.arctan(np.exp(y)) * (2.0 / np.pi)


def exact_transform_bm(geometry, x0, cfg):
    """Sample orthant or cube Brownian motion exactly at the grid times.

    In the flattening coordinates each component is an independent Gaussian
    walk with per-step variance ``2 dt / beta`` (the quadratic variation rate
    of a unit-gradient function under the generator ``(1/beta) Delta``).
    Uses the same per-replica streams as ``simulate_bm``.
    """
    if not isinstance(geometry, (OrthantGeometry, CubeGeometry)):
        raise UsageError(f"exact sampling is only available for the orthant and the cube, not {geometry.name}")
    x = _start(geometry, x0, cfg)
    R, n = x.shape
    K = cfg.n_steps
    every = cfg.save_every
    y = transform_coordinates(geometry, x)
    scale = np.sqrt(2.0 * cfg.dt / cfg.beta)
    states = np.empty((R, K // every + 1, n))
    for r in range(R):
        gen = replica_generators(cfg.seed, r, streams=1)[0]
        walk = np.empty((K + 1, n))
        walk[0] = y[r]
        done = 0
        while done < K:
            width = min(_CHUNK, K - done)
            walk[done + 1:done + 1 + width] = scale * gen.standard_normal((width, n))
            done += width
        walk = np.cumsum(walk, axis=0)
        states[r] = _inverse_transform(geometry, walk[::every])
    steps = np.arange(0, K + 1, every)
    return Path(steps * cfg.dt, states, np.zeros(R, dtype=np.int64), steps, cfg)
