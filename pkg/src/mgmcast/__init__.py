"""Precoder design for multi-group multicast downlinks with a common message."""

__version__ = "0.1.0"

from .baselines import mrt_precoder, optimal_alpha_search, zf_precoder
from .channel import ChannelSet, composite_matrix, sample_channels
from .complexity import complexity_count
from .mse import mmse_errors, mmse_receivers, mse_values
from .rates import RateReport, RateWeights, rate_report, user_rates
from .signal_model import PrecoderSet, Scheme, SignalModelParams, scale_to_power, transmit_power
from .solver import SolverConfig, iterate

__all__ = [
    "ChannelSet", "PrecoderSet", "RateReport", "RateWeights", "Scheme", "SignalModelParams",
    "SolverConfig", "complexity_count", "composite_matrix", "iterate", "mmse_errors",
    "mmse_receivers", "mrt_precoder", "mse_values", "optimal_alpha_search", "rate_report",
    "sample_channels", "scale_to_power", "transmit_power", "user_rates", "zf_precoder",
]
