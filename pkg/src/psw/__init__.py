"""Phase-space distributions, classicality inequalities and click-detector statistics."""

from .clicksim import (MultiplexConfig, covariance_exact, multi_zero_count_witness,
                       simulate_clicks, zero_count)
from .errors import ConfigError, CutoffError, PreconditionError, PSWError
from .phasespace import (PhaseGrid, SParam, displaced_diag, eval_s, eval_s_gaussian, husimi,
                         scan, scan_many, wigner)
from .witness import (WitnessSpec, find_violation, witness_field, witness_multi, witness_two,
                      witness_wq)

__all__ = [
    "ConfigError", "CutoffError", "MultiplexConfig", "PSWError", "PhaseGrid", "PreconditionError",
    "SParam", "WitnessSpec", "covariance_exact", "displaced_diag", "eval_s", "eval_s_gaussian",
    "find_violation", "husimi", "multi_zero_count_witness", "scan", "scan_many", "simulate_clicks",
    "wigner", "witness_field", "witness_multi", "witness_two", "witness_wq", "zero_count",
]
