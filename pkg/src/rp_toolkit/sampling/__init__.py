from .engine import SamplerSpec, run_chain, sweep_backend
from .observables import (
    Certificate, CorrelationEstimate, check_infrared_bound,
    check_key_estimate, estimate_two_point, spin_wave_condensation_stat,
)

__all__ = [
    "SamplerSpec", "run_chain", "sweep_backend",
    "Certificate", "CorrelationEstimate", "estimate_two_point",
    "check_infrared_bound", "check_key_estimate",
    "spin_wave_condensation_stat",
]
