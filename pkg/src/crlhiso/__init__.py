"""Frequency-domain simulator for magnetic-free isolators and circulators
built from temporally modulated coupled CRLH transmission lines."""

__version__ = "0.1.0"

from . import coupler, crlh, device, netalg, squid  # noqa: E402
from .errors import (  # noqa: E402
    ConfigError,
    CrlhIsoError,
    NumericalError,
)

__all__ = ["coupler", "crlh", "device", "netalg", "squid", "ConfigError", "CrlhIsoError", "NumericalError"]
