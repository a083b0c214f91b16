"""Exception hierarchy.

Numerical failures and configuration failures are kept apart so the CLI can
map them onto distinct exit codes.
"""


class CrlhIsoError(Exception):
    """Base class for all package errors."""


class NumericalError(CrlhIsoError):
    """A computation hit a singular or out-of-domain point."""


class SingularConversionError(NumericalError):
    def __init__(self, frequency_hz=None, detail=""):
        where = f" at {frequency_hz:.9g} Hz" if frequency_hz is not None else ""
        super().__init__(f"ABCD->S conversion is singular{where}{': ' + detail if detail else ''}")
        self.frequency_hz = frequency_hz


class ResonantJunctionError(NumericalError):
    def __init__(self, condition_number, frequency_hz=None, stage=None):
        parts = [f"interconnection is resonant (condition number {condition_number:.3e})"]
        if stage is not None:
            parts.append(f"joining {stage}")
        if frequency_hz is not None:
            parts.append(f"at {frequency_hz:.9g} Hz")
        super().__init__(" ".join(parts))
        self.condition_number = condition_number
        self.frequency_hz = frequency_hz
        self.stage = stage


class PoleError(NumericalError):
    """Characteristic impedance evaluated exactly at the shunt resonance."""


class OutOfBandError(NumericalError):
    """A mode needed for the computation is evanescent at this frequency."""


class FluxDivergenceError(NumericalError):
    """Effective SQUID inductance evaluated where the cosine vanishes."""


class WaveformSynthesisError(NumericalError):
    """K(flux) is not monotone on the modulation interval."""


class AsymmetricCouplerError(CrlhIsoError, ValueError):
    """An even/odd-only routine was called on an asymmetric coupled line."""


class ConfigError(CrlhIsoError, ValueError):
    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
