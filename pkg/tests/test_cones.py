import numpy as np
import pytest

from conelangevin.cones import (CubeGeometry, LorentzGeometry, OrthantGeometry, default_light_vectors,
                                lorentz_aux_f, lorentz_aux_field, lorentz_mu, lorentz_sigma, make_geometry,
                                make_light_vector, minkowski_product)
from conelangevin.errors import DomainError, UsageError
from conelangevin.geometry import finite_difference_oracle, gradient_norm2, laplace_beltrami


def random_light_vectors(rng, n, count):
    out = []
    for _ in range(count):
        u = rng.standard_normal(n)
        out.append(make_light_vector(u / np.linalg.norm(u)))
    return out


# -- geometries ------------------------------------------------------------------

def test_make_geometry_names():
    assert isinstance(make_geometry("orthant", 2), OrthantGeometry)
    assert isinstance(make_geometry("cube", 1), CubeGeometry)
    assert isinstance(make_geometry("lorentz", 4), LorentzGeometry)
    with pytest.raises(UsageError):
        make_geometry("frustum", 3)


def test_cube_is_not_a_cone():
    g = CubeGeometry(2)
    assert not g.is_cone
    with pytest.raises(UsageError):
        g.barrier_parameter


def test_cube_edge_is_outside():
    g = CubeGeometry(1)
    assert g.contains(np.array([0.5]))
    assert not g.contains(np.array([1e-9]))
    assert not g.contains(np.array([1 - 1e-9]))


def test_lorentz_contains():
    g = LorentzGeometry(3)
    assert g.contains(np.array([1.0, 0.5, 0.5]))
    assert not g.contains(np.array([1.0, 0.8, 0.8]))
    assert not g.contains(np.array([-1.0, 0.0, 0.0]))


@pytest.mark.parametrize("dim", [2, 4, 9])
def test_lorentz_inverse_display_is_matrix_inverse(dim, rng):
    g = LorentzGeometry(dim)
    pts = g.sample_interior(rng, 100)
    prod = g.metric(pts) @ g.inverse_metric(pts)
    assert np.max(np.abs(prod - np.eye(dim))) < 1e-10
    np.testing.assert_allclose(g.inverse_metric(pts), np.linalg.inv(g.metric(pts)), rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("dim", [2, 4, 9])
def test_lorentz_volume_form_is_exp_barrier(dim, rng):
    g = LorentzGeometry(dim)
    for x in g.sample_interior(rng, 100):
        vol = np.sqrt(np.linalg.det(g.metric(x)))
        assert vol == pytest.approx(np.exp(g.barrier(x)), rel=1e-8)
        assert vol == pytest.approx((dim / minkowski_product(x, x)) ** (dim / 2), rel=1e-8)


def test_batched_evaluation_matches_pointwise(rng):
    for g in (OrthantGeometry(3), CubeGeometry(2), LorentzGeometry(4)):
        pts = g.sample_interior(rng, 7)
        for name in ("barrier", "gradient", "metric", "inverse_metric", "drift", "noise_factor"):
            batched = getattr(g, name)(pts)
            for k, x in enumerate(pts):
                np.testing.assert_allclose(batched[k], getattr(g, name)(x), rtol=1e-14, atol=0)


def test_noise_factor_squares_to_inverse_metric(rng):
    for g in (OrthantGeometry(3), CubeGeometry(2), LorentzGeometry(4)):
        pts = g.sample_interior(rng, 10)
        S = g.noise_factor(pts)
        np.testing.assert_allclose(S @ np.swapaxes(S, -1, -2), g.inverse_metric(pts), rtol=1e-12, atol=1e-14)


def test_sample_interior_ranges(rng):
    x = OrthantGeometry(4).sample_interior(rng, 500)
    assert np.all((x >= np.exp(-1)) & (x <= np.e))
    x = CubeGeometry(4).sample_interior(rng, 500)
    assert np.all((x >= 0.1) & (x <= 0.9))
    x = LorentzGeometry(4).sample_interior(rng, 500)
    assert np.all((x[:, 0] >= 1) & (x[:, 0] <= 3))
    assert np.all(np.linalg.norm(x[:, 1:], axis=1) <= 0.8 * x[:, 0])


# -- light vectors ------------------------------------------------------------------------

@pytest.mark.parametrize("u, b", [
    ([1, 0, 0], [1, 1, 0, 0]),
    ([0, 1, 0], [1, 0, 1, 0]),
    ([2 ** -0.5, 2 ** -0.5, 0], [1, 2 ** -0.5, 2 ** -0.5, 0]),
])
def test_make_light_vector(u, b):
    v = make_light_vector(u)
    np.testing.assert_allclose(v, b)
    assert v[0] > 0
    assert abs(minkowski_product(v, v)) < 1e-12


def test_make_light_vector_rejects_non_unit():
    with pytest.raises(UsageError):
        make_light_vector([1, 1, 0])


def test_default_light_vectors_are_coordinate_axes():
    bs = default_light_vectors(3)
    np.testing.assert_array_equal(np.array(bs), np.column_stack([np.ones(3), np.eye(3)]))


# -- auxiliary observables ------------------------------------------------------------------

def test_aux_f_examples():
    b = np.array([1.0, 1, 0, 0])
    assert lorentz_aux_f(b, [1, 0, 0, 0]) == 0
    assert lorentz_aux_f(b, [2, 0, 0, 0]) == 0
    assert lorentz_aux_f(b, [2, 1, 0, 0]) == pytest.approx(np.log(3), abs=1e-14)


def test_aux_f_degree_zero(rng):
    g = LorentzGeometry(5)
    b = random_light_vectors(rng, 4, 1)[0]
    for x in g.sample_interior(rng, 20):
        for lam in (0.1, 3.0, 1e3):
            assert lorentz_aux_f(b, lam * x) == pytest.approx(lorentz_aux_f(b, x), abs=1e-12)


def test_aux_f_domain_errors():
    b = np.array([1.0, 1, 0, 0])
    with pytest.raises(DomainError):
        lorentz_aux_f(b, [1, 2, 0, 0])
    with pytest.raises(DomainError):
        lorentz_aux_f(b, [-1, 0, 0, 0])
    with pytest.raises(UsageError):
        lorentz_aux_f(np.array([1.0, 0.5, 0, 0]), [1, 0, 0, 0])


def test_aux_gradient_and_hessian_against_finite_differences(rng):
    g = LorentzGeometry(4)
    for b in random_light_vectors(rng, 3, 5):
        f = lorentz_aux_field(b)
        x = g.sample_interior(rng)
        np.testing.assert_allclose(finite_difference_oracle(f.value, x, 1), f.gradient(x), rtol=1e-7, atol=1e-9)
        np.testing.assert_allclose(finite_difference_oracle(f.value, x, 2, h=1e-4), f.hessian(x), rtol=1e-5, atol=1e-6)


@pytest.mark.parametrize("n", [2, 3, 8])
def test_light_observable_identities(n, rng):
    g = LorentzGeometry(n + 1)
    bs = random_light_vectors(rng, n, 10)
    pts = g.sample_interior(rng, 50)
    dF = g.gradient(pts)
    q = minkowski_product(pts, pts)
    for k, b in enumerate(bs):
        df = lorentz_aux_field(b).gradient(pts)
        # unit gradient and g-orthogonality to the barrier
        assert np.max(np.abs(gradient_norm2(g, pts, df) - 1)) < 1e-8
        assert np.max(np.abs(gradient_norm2(g, pts, df, dF))) < 1e-8
        b2 = bs[(k + 1) % len(bs)]
        df2 = lorentz_aux_field(b2).gradient(pts)
        expected = 1 - minkowski_product(b, b2) * q / ((pts @ b) * (pts @ b2))
        assert np.max(np.abs(gradient_norm2(g, pts, df, df2) - expected)) < 1e-8
        sigma = lorentz_sigma(b, b2, lorentz_aux_f(b, pts), lorentz_aux_f(b2, pts))
        assert np.max(np.abs(sigma - expected)) < 1e-8


@pytest.mark.parametrize("n", [2, 3, 8])
def test_light_observable_laplacian(n, rng):
    g = LorentzGeometry(n + 1)
    for b in random_light_vectors(rng, n, 3):
        f = lorentz_aux_field(b)
        for x in g.sample_interior(rng, 5):
            assert laplace_beltrami(g, f, x) == pytest.approx((n - 1) / np.sqrt(n + 1), abs=1e-10)
            assert 0.5 * laplace_beltrami(g, f, x) == pytest.approx(lorentz_mu(n), abs=1e-10)


# -- covariance and drift ---------------------------------------------------------------------

def test_sigma_diagonal_is_one(rng):
    b = random_light_vectors(rng, 3, 1)[0]
    for f in rng.normal(0, 3, (10, 2)):
        assert lorentz_sigma(b, b, f[0], f[1]) == pytest.approx(1.0, abs=1e-12)


def test_sigma_examples():
    b1 = np.array([1.0, 1, 0, 0])
    b2 = np.array([1.0, 0, 1, 0])
    assert lorentz_sigma(b1, b2, 0.0, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert lorentz_sigma(b1, b2, 2 * np.log(2), 2 * np.log(2)) == pytest.approx(0.75, abs=1e-14)


def test_sigma_rejects_nonfinite():
    with pytest.raises(UsageError):
        lorentz_sigma([1, 1, 0], [1, 0, 1], np.inf, 0.0)


@pytest.mark.parametrize("n, mu", [(3, 0.5), (1, 0.0), (8, 7 / 6)])
def test_mu_examples(n, mu):
    assert lorentz_mu(n) == pytest.approx(mu, abs=1e-14)


def test_mu_rejects_zero_dimension():
    with pytest.raises(UsageError):
        lorentz_mu(0)
