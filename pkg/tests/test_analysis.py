import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, HealthCheck
from hypothesis import strategies as st

from conelangevin.analysis import (ScalarPath, StatReport, bm_conformance_test, gibbs_density, lorentz_theorem_test,
                                   observable_path, predicted_covariation, qv_rate_factor, realized_covariation,
                                   stationary_histogram_test)
from conelangevin.cones import (CubeGeometry, LorentzGeometry, OrthantGeometry, lorentz_aux_f, lorentz_aux_gradient,
                                make_light_vector)
from conelangevin.errors import ObservableError, PreconditionError, UsageError
from conelangevin.sde import EnergySpec, Path, SimulationConfig, exact_transform_bm, simulate_bm, simulate_rle, \
    transform_coordinates


def coordinate(i):
    return lambda x: x[..., i]


# -- observables -------------------------------------------------------------------------

def test_observable_first_values():
    cfg = SimulationConfig(dt=0.1, horizon=1.0, replicas=3)
    g = OrthantGeometry(2)
    p = observable_path(simulate_bm(g, np.ones(2), cfg), g.barrier)
    np.testing.assert_array_equal(p.values[:, 0], 0.0)
    lg = LorentzGeometry(4)
    b = np.array([1.0, 1, 0, 0])
    p = observable_path(simulate_bm(lg, [1.0, 0, 0, 0], cfg.replace(beta=2.0)), lambda x: lorentz_aux_f(b, x))
    np.testing.assert_array_equal(p.values[:, 0], 0.0)


def test_observable_coordinate_matches_csv_column(tmp_path):
    cfg = SimulationConfig(dt=0.1, horizon=1.0, replicas=2, seed=3)
    path = simulate_bm(CubeGeometry(2), [0.5, 0.5], cfg)
    with open(tmp_path / "p.csv", "w") as fh:
        path.to_csv(fh)
    column = np.loadtxt(tmp_path / "p.csv", delimiter=",", skiprows=1)[:, 4]
    np.testing.assert_array_equal(observable_path(path, coordinate(1)).values.ravel(), column)


def test_observable_failure_reports_step():
    states = np.ones((2, 4, 1))
    states[1, 2, 0] = -1.0
    path = Path(np.arange(4) * 0.5, states, np.zeros(2, int), np.arange(0, 8, 2))
    with pytest.raises(ObservableError) as exc:
        observable_path(path, lambda x: np.log(x[..., 0]))
    assert exc.value.step == 4
    with pytest.raises(UsageError):
        observable_path(path, lambda x: x)


# -- covariation ------------------------------------------------------------------------

@pytest.mark.parametrize("K", [10, 100, 1000])
def test_realized_qv_of_ramp(K):
    a, T = 3.0, 2.0
    t = np.linspace(0, T, K + 1)
    p = ScalarPath(t, (a * t)[None, :])
    qv = realized_covariation(p).values[0]
    assert qv[-1] == pytest.approx(a ** 2 * T * T / K, rel=1e-12)
    assert qv[0] == 0 and np.all(np.diff(qv) >= 0)


def test_realized_covariation_bilinear():
    rng = np.random.default_rng(0)
    t = np.linspace(0, 1, 11)
    p = ScalarPath(t, rng.standard_normal((3, 11)))
    q = ScalarPath(t, rng.standard_normal((3, 11)))
    s = ScalarPath(t, p.values + q.values)
    lhs = realized_covariation(s).values
    rhs = realized_covariation(p).values + 2 * realized_covariation(p, q).values + realized_covariation(q).values
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_grid_mismatch():
    p = ScalarPath(np.linspace(0, 1, 11), np.zeros((2, 11)))
    with pytest.raises(UsageError):
        realized_covariation(p, ScalarPath(np.linspace(0, 2, 11), np.zeros((2, 11))))
    with pytest.raises(UsageError):
        realized_covariation(p, ScalarPath(np.linspace(0, 1, 6), np.zeros((2, 6))))


def test_predicted_covariation_is_left_riemann_sum():
    g = OrthantGeometry(1)
    states = np.array([[[1.0], [2.0], [4.0]]])
    path = Path(np.array([0.0, 0.5, 1.0]), states, np.zeros(1, int), np.arange(3))
    # |grad x|^2 = x^2 on the half-line
    pred = predicted_covariation(path, g, lambda x: np.ones_like(x), beta=4.0)
    np.testing.assert_allclose(pred.values[0], [0.0, 0.5 * 0.5, 0.5 * (0.5 + 2.0)])


def test_qv_rate_factor():
    assert qv_rate_factor(1.0) == 2.0
    assert qv_rate_factor(2.0) == 1.0


# -- Brownian-motion conformance ------------------------------------------------------------

@pytest.mark.parametrize("geometry, x0", [(OrthantGeometry(2), [1.0, 1.0]), (CubeGeometry(1), [0.5])],
                         ids=["orthant", "cube"])
@pytest.mark.parametrize("beta", [1.0, 2.0])
def test_conformance_on_exact_sampler(geometry, x0, beta):
    cfg = SimulationConfig(dt=0.01, horizon=10.0, replicas=256, beta=beta, seed=17)
    path = exact_transform_bm(geometry, x0, cfg)
    p = observable_path(path, lambda x: transform_coordinates(geometry, x)[..., 0])
    report = bm_conformance_test(p, 0.0, qv_rate_factor(beta))
    assert report.passed, report.summary()


def test_conformance_detects_wrong_rate():
    cfg = SimulationConfig(dt=0.01, horizon=10.0, replicas=256, seed=17)
    g = OrthantGeometry(1)
    p = observable_path(exact_transform_bm(g, [1.0], cfg), lambda x: np.log(x[..., 0]))
    report = bm_conformance_test(p, 0.0, 1.0)
    assert not report.verdict["qv_rate"] and not report.verdict["ks"]
    report = bm_conformance_test(p, 0.5, 2.0)
    assert not report.verdict["drift"]


def test_conformance_needs_replicas_and_aligned_blocks():
    t = np.linspace(0, 1, 101)
    with pytest.raises(UsageError):
        bm_conformance_test(ScalarPath(t, np.zeros((10, 101))), 0.0, 1.0)
    with pytest.raises(UsageError):
        bm_conformance_test(ScalarPath(t, np.zeros((64, 101))), 0.0, 1.0, block=0.015)


def test_barrier_process_is_brownian_at_corrected_scale():
    beta = 1.0
    g = OrthantGeometry(2)
    cfg = SimulationConfig(dt=0.01, horizon=10.0, replicas=256, beta=beta, seed=4)
    path = exact_transform_bm(g, [1.0, 1.0], cfg)
    nu = g.barrier_parameter
    p = observable_path(path, g.barrier).centered() * math.sqrt(beta / (2 * nu))
    report = bm_conformance_test(p, 0.0, 1.0)
    assert report.passed, report.summary()


# -- Lorentz light cone ------------------------------------------------------------------------

@pytest.fixture(scope="module")
def lorentz_path():
    cfg = SimulationConfig(beta=2.0, dt=1e-3, horizon=5.0, replicas=256, seed=8)
    return simulate_bm(LorentzGeometry(4), [1.0, 0, 0, 0], cfg)


def test_lorentz_theorem(lorentz_path):
    g = LorentzGeometry(4)
    report = lorentz_theorem_test(lorentz_path, g)
    assert report.passed, report.summary()
    assert report.expected["f1_drift"] == pytest.approx(0.5)
    assert report.expected["f0_qv_rate"] == pytest.approx(1.0)


def test_lorentz_theorem_preconditions(lorentz_path):
    with pytest.raises(UsageError):
        lorentz_theorem_test(lorentz_path, LorentzGeometry(4), beta=1.0)
    with pytest.raises(UsageError):
        lorentz_theorem_test(lorentz_path, OrthantGeometry(4))


def test_lorentz_barrier_light_orthogonality(lorentz_path):
    g = LorentzGeometry(4)
    b = make_light_vector([1.0, 0.0, 0.0])
    F = observable_path(lorentz_path, g.barrier)
    f = observable_path(lorentz_path, lambda x: lorentz_aux_f(b, x))
    cov = realized_covariation(F, f).values[:, -1]
    mean, se = cov.mean(), cov.std(ddof=1) / math.sqrt(cov.size)
    assert abs(mean) <= 3 * se


# -- quadratic variation along paths ------------------------------------------------------------

def _observables(g):
    out = [("coordinate", coordinate(0), lambda x: np.broadcast_to(np.eye(g.dim)[0], x.shape)),
           ("barrier", g.barrier, g.gradient)]
    if isinstance(g, LorentzGeometry):
        b = make_light_vector(np.eye(g.dim - 1)[0])
        out.append(("light", lambda x: lorentz_aux_f(b, x), lambda x: lorentz_aux_gradient(b, x)))
    return out


CASES = [(OrthantGeometry(2), [1.0, 1.0], 1.0), (CubeGeometry(1), [0.5], 1.0), (LorentzGeometry(4), [1.0, 0, 0, 0], 2.0)]


@settings(max_examples=3, deadline=None, derandomize=True, suppress_health_check=[HealthCheck.too_slow])
@given(case=st.sampled_from(range(len(CASES))), seed=st.integers(0, 2**32 - 1))
def test_quadratic_variation_matches_path_quadrature(case, seed):
    g, x0, beta = CASES[case]
    path = simulate_bm(g, x0, SimulationConfig(beta=beta, dt=1e-3, horizon=2.0, replicas=128, seed=seed))
    for name, f, df in _observables(g):
        real = realized_covariation(observable_path(path, f)).values[:, -1]
        pred = predicted_covariation(path, g, df, beta=beta).values[:, -1]
        d = real - pred
        assert abs(d.mean()) <= 3 * d.std(ddof=1) / math.sqrt(d.size) + 1e-12, name


@settings(max_examples=3, deadline=None, derandomize=True, suppress_health_check=[HealthCheck.too_slow])
@given(case=st.sampled_from(range(len(CASES))), seed=st.integers(0, 2**32 - 1))
def test_covariation_matches_path_quadrature(case, seed):
    g, x0, beta = CASES[case]
    path = simulate_bm(g, x0, SimulationConfig(beta=beta, dt=1e-3, horizon=2.0, replicas=128, seed=seed))
    obs = _observables(g)
    for (n1, f1, d1), (n2, f2, d2) in zip(obs, obs[1:]):
        real = realized_covariation(observable_path(path, f1), observable_path(path, f2)).values[:, -1]
        pred = predicted_covariation(path, g, d1, d2, beta=beta).values[:, -1]
        d = real - pred
        assert abs(d.mean()) <= 3 * d.std(ddof=1) / math.sqrt(d.size) + 1e-12, (n1, n2)


# -- stationary law ---------------------------------------------------------------------------

def test_gibbs_density_values():
    g = CubeGeometry(1)
    x = 0.25
    vol = math.pi / math.sin(math.pi * x)
    assert gibbs_density(g, None, 1.0)(x) == pytest.approx(vol)
    assert gibbs_density(g, EnergySpec.barrier(g, 1.0), 1.0)(x) == pytest.approx(1.0)
    assert gibbs_density(g, EnergySpec.barrier(g, 2.0), 1.0)(x) == pytest.approx(math.sin(math.pi * x) / math.pi)


@pytest.mark.parametrize("alpha", [1.0, 2.0])
def test_stationary_histogram(alpha):
    g = CubeGeometry(1)
    E = EnergySpec.barrier(g, alpha)
    cfg = SimulationConfig(dt=1e-2, horizon=10.0, replicas=4096, seed=31, save_every=1000)
    report = stationary_histogram_test(simulate_rle(g, E, [0.5], cfg).endpoints, g, E, 1.0)
    assert report.passed, report.summary()
    assert 0 <= report.estimate["chi2_p"] <= 1


def test_stationary_histogram_rejects_wrong_target():
    g = CubeGeometry(1)
    cfg = SimulationConfig(dt=1e-2, horizon=10.0, replicas=4096, seed=31, save_every=1000)
    ends = simulate_rle(g, EnergySpec.barrier(g, 1.0), [0.5], cfg).endpoints
    assert not stationary_histogram_test(ends, g, EnergySpec.barrier(g, 2.0), 1.0).passed


def test_stationary_histogram_sine_target_exact():
    # deterministic check of the binning against quantiles of (pi/2) sin(pi x)
    g = CubeGeometry(1)
    u = (np.arange(20000) + 0.5) / 20000
    x = np.arccos(1 - 2 * u) / math.pi
    report = stationary_histogram_test(x, g, EnergySpec.barrier(g, 2.0), 1.0)
    assert report.estimate["tv_distance"] < 1e-3


def test_non_normalizable_target():
    g = CubeGeometry(1)
    with pytest.raises(PreconditionError, match="diverges"):
        stationary_histogram_test(np.full(10, 0.5), g, EnergySpec.barrier(g, 0.0), 1.0)
    with pytest.raises(UsageError):
        stationary_histogram_test(np.ones((10, 2)), OrthantGeometry(2), None, 1.0)


def test_beta_sweep_concentrates():
    g = CubeGeometry(1)
    E = EnergySpec.quadratic([0.3], 2.0)
    variances = []
    for beta in (1.0, 10.0, 100.0):
        cfg = SimulationConfig(beta=beta, dt=1e-2, horizon=30.0, replicas=512, seed=2, save_every=3000)
        variances.append(simulate_rle(g, E, [0.5], cfg).endpoints.var())
    assert variances[0] > variances[1] > variances[2]


# -- reports ------------------------------------------------------------------------------------

def test_report_json_fields():
    r = StatReport(test="t", estimate={"drift": 0.1}, stderr={"drift": 0.05}, expected={"drift": 0.0},
                   ks_statistic=0.02, ks_p=0.5, verdict={"drift": True, "ks": True}, config={"replicas": 64})
    d = json.loads(r.to_json())
    assert {"test", "estimate", "stderr", "expected", "ks_p", "verdict", "config"} <= set(d)
    assert d["verdict"] == {"drift": "pass", "ks": "pass", "overall": "pass"}
    assert d["stderr"]["drift"] >= 0 and 0 <= d["ks_p"] <= 1
    assert "PASS" in r.summary()
    r.verdict["ks"] = False
    assert not r.passed and json.loads(r.to_json())["verdict"]["overall"] == "fail"
