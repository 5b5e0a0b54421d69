"""Bell nonlocality toolkit: correlations, Bell inequalities, nonlocal games,
communication complexity and sequential-measurement protocols."""

from .boxes import ConditionalBox, chsh_sum_form, noisy_pr_box, pr_box, quantum_box
from .bell import (
    CorrelationTable,
    LhvModel,
    LhvRefusal,
    SignFunction,
    ghz_correlation,
    horodecki_max,
    lhv_construct,
    maximize_quantum_chsh,
    maximize_wwzb,
    ns_condition_max,
    wwzb_enumerate,
    wwzb_single,
)
from .correlations import bloch_decompose, correlation_tensor_n, make_rng
from .report import ExperimentReport, emit
from .states import (
    DensityOperator,
    PureState,
    StateValidationError,
    ghz,
    make_state,
    pure_alpha,
    singlet,
    werner,
)

__version__ = "0.1.0"

__all__ = [
    "ConditionalBox", "CorrelationTable", "DensityOperator", "ExperimentReport", "LhvModel",
    "LhvRefusal", "PureState", "SignFunction", "StateValidationError", "bloch_decompose",
    "chsh_sum_form", "correlation_tensor_n", "emit", "ghz", "ghz_correlation", "horodecki_max",
    "lhv_construct", "make_rng", "make_state", "maximize_quantum_chsh", "maximize_wwzb",
    "noisy_pr_box", "ns_condition_max", "pr_box", "pure_alpha", "quantum_box", "singlet",
    "werner", "wwzb_enumerate", "wwzb_single",
]
