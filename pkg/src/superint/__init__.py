"""Superintegrable planar potentials and numerical checks of their constants of motion."""

__version__ = "0.1.0"

from .brackets import (  # noqa: E402
    BracketConfig,
    ObservableHandle,
    evolution_residual,
    gradient,
    independence_rank,
    poisson,
    step1_check,
)
from .dynamics import (  # noqa: E402
    ClosureResult,
    DriftReport,
    Trajectory,
    closure_detect,
    drift_report,
    find_closure,
    integrate,
)
from .errors import (  # noqa: E402
    ConfigError,
    DomainError,
    IntegrationError,
    SingularityError,
    StencilError,
    SuperintError,
)
from .observables import (  # noqa: E402
    eval_A,
    eval_A_ij,
    eval_B,
    eval_B_ij,
    eval_J,
    eval_K,
    eval_MN,
    eval_N2,
)
from .phase import CartesianState, PolarState, eom, hamiltonian, to_cartesian, to_polar  # noqa: E402
from .potentials import (  # noqa: E402
    HO,
    TTW,
    V1,
    V2,
    CentralPower,
    GenSW,
    eval_F1,
    eval_F2,
    f_ode_solve,
    potential_from_dict,
)

__all__ = [
    "BracketConfig", "CartesianState", "CentralPower", "ClosureResult", "ConfigError", "DomainError",
    "DriftReport", "GenSW", "HO", "IntegrationError", "ObservableHandle", "PolarState", "SingularityError",
    "StencilError", "SuperintError", "TTW", "Trajectory", "V1", "V2", "closure_detect", "drift_report",
    "eom", "eval_A", "eval_A_ij", "eval_B", "eval_B_ij", "eval_F1", "eval_F2", "eval_J", "eval_K",
    "eval_MN", "eval_N2", "evolution_residual", "f_ode_solve", "find_closure", "gradient", "hamiltonian",
    "independence_rank", "integrate", "poisson", "potential_from_dict", "step1_check", "to_cartesian",
    "to_polar",
]
