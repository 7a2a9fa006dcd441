"""Gaussian states under quasi-free semigroups: complete positivity, entanglement and slippage."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    ConvergenceError,
    InvalidStep,
    NoNegativeDirection,
    NotApplicable,
    NotPSD,
    QuasiFreeError,
    Singular,
    StructureError,
    ZeroLambda,
)
from .semigroup import (  # noqa: F401
    Drift,
    SingleModeParams,
    TwoModeParams,
    drift_single,
    drift_two,
    evolve_closed,
    evolve_numeric,
    first_negativity_time,
    is_completely_positive,
)
from .states import (  # noqa: F401
    SingleModeState,
    TwoModeState,
    build_critical_state,
    partial_transpose,
    ppt_witness,
    validate,
)
