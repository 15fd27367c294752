"""Channel flows of the form (U(x3, t), 0, 0) for the NSE and NS-alpha models."""

from .core import (
    ChannelConfig,
    CheckResult,
    ForcingSignal,
    GridField,
    SineSpectrum,
    VerificationReport,
    forcing_eval,
    validate_config,
)

__all__ = [
    "ChannelConfig",
    "CheckResult",
    "ForcingSignal",
    "GridField",
    "SineSpectrum",
    "VerificationReport",
    "forcing_eval",
    "validate_config",
]
