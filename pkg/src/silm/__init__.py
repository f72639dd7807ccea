"""Signal and interference leakage minimization for mixed uplink/downlink
multi-cell MIMO networks, with Monte Carlo sum-rate evaluation."""

__version__ = "0.1.0"

from .errors import DimensionError, DomainError, SilmError, ValidationError  # noqa: E402
from .network import (NetworkConfig, ChannelSet, PrecoderState,  # noqa: E402
                      draw_channels, init_precoders, validate_config)
from .solver import PrecoderKind, SolverParams, SolverReport, run_silm  # noqa: E402
from .rates import RateReport, sum_rates  # noqa: E402

__all__ = [
    "__version__",
    "SilmError", "DimensionError", "DomainError", "ValidationError",
    "NetworkConfig", "ChannelSet", "PrecoderState",
    "draw_channels", "init_precoders", "validate_config",
    "PrecoderKind", "SolverParams", "SolverReport", "run_silm",
    "RateReport", "sum_rates",
]
