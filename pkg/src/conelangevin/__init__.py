"""Brownian motion and the Riemannian Langevin equation on Hessian barrier geometries.

Modules
-------
geometry
    Barrier-geometry base class and differential operators (Riemannian
    gradient, Laplace-Beltrami drift, Monge-Ampere residual, cone identities,
    finite-difference oracles).
cones
    Positive orthant, unit cube and Lorentz cone in closed form, plus the
    light-cone observables of the Lorentz cone.
sde
    Euler-Maruyama integration of Brownian motion and the Langevin equation,
    exact samplers for the orthant and the cube.
analysis
    Quadratic variation, Brownian-motion conformance tests, light-cone and
    Gibbs-stationarity tests.
centralpath
    Newton and gradient-flow computation of the interior-point central path.
cli
    ``conelangevin`` command-line runner.
"""

from .errors import (ConeLangevinError, ConvergenceError, DomainError, NumericalError, ObservableError,
                     PreconditionError, StencilError, StepFailure, UsageError)
from .geometry import (BarrierGeometry, ScalarField, certify_geometry, cone_identity_check, drift_vector,
                       finite_difference_oracle, laplace_beltrami, monge_ampere_residual, riemannian_gradient)
from .cones import (CubeGeometry, LorentzGeometry, OrthantGeometry, default_light_vectors, lorentz_aux_f,
                    lorentz_aux_field, lorentz_mu, lorentz_sigma, make_geometry, make_light_vector)
from .sde import (EnergySpec, Path, SimulationConfig, euler_maruyama_step, exact_transform_bm, parse_energy,
                  simulate_bm, simulate_rle, transform_coordinates)
from .analysis import (ScalarPath, StatReport, bm_conformance_test, lorentz_theorem_test, observable_path,
                       predicted_covariation, qv_rate_factor, realized_covariation, stationary_histogram_test)
from .centralpath import (CentralPathPoint, ConicProgram, flow_central_path, newton_central_point,
                          solve_conic)

__version__ = "0.1.0"
