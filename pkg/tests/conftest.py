import numpy as np
import pytest

from conelangevin.cones import CubeGeometry, LorentzGeometry, OrthantGeometry


def divergence_form_laplacian(geometry, grad_f, x, h=1e-5):
    """Laplace-Beltrami via (1/sqrt det g) d_i (sqrt det g g^{ij} d_j f).

    Uses a generic determinant and matrix inverse of the metric and central
    differences, so it shares nothing with the closed-form drift.
    """
    x = np.asarray(x, dtype=float)

    def flux(y):
        g = geometry.metric(y)
        return np.sqrt(np.linalg.det(g)) * np.linalg.solve(g, grad_f(y))

    total = 0.0
    for i in range(x.size):
        e = np.zeros(x.size)
        e[i] = h
        total += (flux(x + e)[i] - flux(x - e)[i]) / (2 * h)
    return total / np.sqrt(np.linalg.det(geometry.metric(x)))


ALL_GEOMETRIES = [
    OrthantGeometry(1), OrthantGeometry(2), OrthantGeometry(5),
    CubeGeometry(1), CubeGeometry(3),
    LorentzGeometry(4), LorentzGeometry(9),
]
CONES = [g for g in ALL_GEOMETRIES if g.is_cone]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    from tests import acceptance_log

    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_log.LINES:
            terminalreporter.write_line(line)
