"""Constructions and verdicts for PPT key-distillable states of the class C."""

from .analysis import (
    coherent_information_erasure,
    dw_rate_ccq,
    entropy_class_c,
    entropy_max_spider_y,
    entropy_supremum_rho_u,
    erasure_threshold_d,
    noise_threshold_dw,
)
from .criteria import (
    Verdict,
    general_key_condition,
    key_condition_class_c,
    key_condition_spider,
    ppt_analytic_class_c,
    ppt_numeric,
    separability_conditions,
    tolerable_noise_recurrence,
)
from .linops import Operator, partial_trace, partial_transpose, von_neumann_entropy
from .states import (
    ClassParams,
    StateValidationError,
    UnitaryAngles,
    XYPair,
    add_white_noise,
    class_c_state,
    fourier_unitary,
    hadamard,
    lambda_tilde,
    private_bit,
    spider_y,
    xy_from_unitary,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
