"""Single composite right/left-handed (CRLH) transmission line.

A unit cell is a series branch (L_R in series with C_L) and a shunt branch
(C_R in parallel with L_L). All functions take the angular frequency ``w`` in
rad/s.

Wavenumbers are reported on the principal arccos branch, 0 <= beta*p <= pi.
The left-handed band has negative phase velocity; that sign is carried by the
band label and exposed through :attr:`DispersionPoint.signed_beta`, which is
what the coupler and device code use.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable

from . import netalg
from .errors import PoleError
from .netalg import AbcdMatrix, TwoPortScattering

LEFT_HANDED = "left-handed"
RIGHT_HANDED = "right-handed"
STOPBAND = "stopband"

DEFAULT_PITCH = 300e-6


@dataclass(frozen=True)
class CrlhCellParams:
    """Lumped unit cell. Inductances in H, capacitances in F, pitch in m."""

    L_R: float
    C_R: float
    L_L: float
    C_L: float
    p: float = DEFAULT_PITCH
    dL_R: float = 0.0

    def __post_init__(self):
        for name in ("L_R", "C_R", "L_L", "C_L", "p"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if not abs(self.dL_R) < self.L_R:
            raise ValueError(f"|dL_R| must be smaller than L_R, got dL_R={self.dL_R!r}")

    @property
    def series_inductance(self) -> float:
        return self.L_R + self.dL_R

    def with_(self, **changes) -> "CrlhCellParams":
        return replace(self, **changes)


# Element values of the reference design around 6 GHz.
REFERENCE_CELL = CrlhCellParams(L_R=300e-12, C_R=150e-15, L_L=1400e-12, C_L=560e-15)


@dataclass(frozen=True)
class DispersionPoint:
    frequency_hz: float
    beta_per_cell: float
    alpha_per_cell: float
    band: str
    p: float = DEFAULT_PITCH

    @property
    def evanescent(self) -> bool:
        return self.band == STOPBAND

    @property
    def beta(self) -> float:
        """Principal-branch wavenumber in rad/m."""
        return self.beta_per_cell / self.p

    @property
    def alpha(self) -> float:
        return self.alpha_per_cell / self.p

    @property
    def signed_beta_per_cell(self) -> float:
        return -self.beta_per_cell if self.band == LEFT_HANDED else self.beta_per_cell

    @property
    def signed_beta(self) -> float:
        return self.signed_beta_per_cell / self.p


def series_impedance(cell: CrlhCellParams, w: float) -> complex:
    return 1j * (w * cell.series_inductance - 1.0 / (w * cell.C_L))


def shunt_admittance(cell: CrlhCellParams, w: float) -> complex:
    return 1j * (w * cell.C_R - 1.0 / (w * cell.L_L))


def series_resonance(cell: CrlhCellParams) -> float:
    """Angular frequency at which the series branch impedance vanishes."""
    return 1.0 / math.sqrt(cell.series_inductance * cell.C_L)


def shunt_resonance(cell: CrlhCellParams) -> float:
    return 1.0 / math.sqrt(cell.C_R * cell.L_L)


def band_of(z: complex, arccos_arg: complex) -> str:
    if abs(arccos_arg.real) > 1.0:
        return STOPBAND
    return LEFT_HANDED if z.imag < 0 else RIGHT_HANDED


def bloch_phase(z: complex, y: complex) -> tuple[float, float, complex]:
    """(beta*p, alpha*p, arccos argument) for a cell with branch values z, y."""
    arg = 1.0 + z * y / 2.0
    theta = cmath.acos(arg)
    return abs(theta.real), abs(theta.imag), arg


def propagation_constant(cell: CrlhCellParams, w: float) -> DispersionPoint:
    """Bloch wavenumber from cos(beta*p) = 1 + Z*Y/2."""
    z = series_impedance(cell, w)
    y = shunt_admittance(cell, w)
    beta_p, alpha_p, arg = bloch_phase(z, y)
    band = band_of(z, arg)
    if band != STOPBAND:
        alpha_p = 0.0
    return DispersionPoint(w / (2 * math.pi), beta_p, alpha_p, band, cell.p)


def homogeneous_beta(cell: CrlhCellParams, w: float) -> complex:
    """Long-wavelength wavenumber -j*sqrt(Z*Y) per metre, band-signed.

    Real inside a passband (negative in the left-handed band), complex in a
    stopband.
    """
    z = series_impedance(cell, w)
    zy = z * shunt_admittance(cell, w)
    if zy.real <= 0:
        beta = math.sqrt(-zy.real)
        return complex(-beta if z.imag < 0 else beta) / cell.p
    return -1j * cmath.sqrt(zy) / cell.p


def characteristic_impedance(cell: CrlhCellParams, w: float) -> complex:
    """sqrt(Z/Y) with non-negative real part.

    Inside a stopband the result is purely imaginary (non-negative imaginary
    part); :func:`propagation_constant` flags the same points as evanescent.
    """
    z = series_impedance(cell, w)
    y = shunt_admittance(cell, w)
    if y == 0:
        raise PoleError(f"characteristic impedance has a pole at the shunt resonance ({w / (2 * math.pi):.9g} Hz)")
    ratio = z / y
    if abs(ratio.imag) <= 1e-14 * abs(ratio):
        ratio = complex(ratio.real, 0.0)
    z0 = cmath.sqrt(ratio)
    if z0.real < 0 or (z0.real == 0 and z0.imag < 0):
        z0 = -z0
    return z0


def cell_abcd(cell: CrlhCellParams, w: float) -> AbcdMatrix:
    """Symmetric (T-form) unit-cell chain matrix."""
    z = series_impedance(cell, w)
    y = shunt_admittance(cell, w)
    a = 1 + z * y / 2
    return AbcdMatrix(a, z + z * z * y / 4, y, a)


def line_abcd(cell: CrlhCellParams, w: float, n: int) -> AbcdMatrix:
    return netalg.abcd_pow(cell_abcd(cell, w), n)


def homogeneous_abcd(beta: complex, z0: complex, length: float) -> AbcdMatrix:
    """Chain matrix of a uniform line; ``beta`` in rad/m, ``length`` in m."""
    if length < 0:
        raise ValueError(f"length must be non-negative, got {length}")
    bl = beta * length
    c, s = cmath.cos(bl), cmath.sin(bl)
    return AbcdMatrix(c, 1j * z0 * s, 1j * s / z0, c)


def homogeneous_line_abcd(cell: CrlhCellParams, w: float, cells: float, beta_model: str = "bloch") -> AbcdMatrix:
    """Uniform-line stand-in for ``cells`` (possibly fractional) unit cells.

    ``beta_model`` selects the Bloch wavenumber ("bloch") or the long-wavelength
    -j*sqrt(ZY) form ("long-wavelength").
    """
    if beta_model == "bloch":
        beta = propagation_constant(cell, w).signed_beta
    elif beta_model == "long-wavelength":
        beta = homogeneous_beta(cell, w)
    else:
        raise ValueError(f"unknown beta_model {beta_model!r}")
    return homogeneous_abcd(beta, characteristic_impedance(cell, w), cells * cell.p)


ZcSpec = complex | float | Callable[[float], complex]


def _zc_at(zc: ZcSpec, w: float) -> complex:
    return complex(zc(w)) if callable(zc) else complex(zc)


def line_spectrum(cell: CrlhCellParams, freqs_hz: Iterable[float], n: int, zc: ZcSpec) -> list[TwoPortScattering]:
    """N-cell lattice scattering parameters over a frequency grid.

    ``zc`` is either a fixed reference impedance or a callable of ``w``.
    """
    freqs = _validated_grid(freqs_hz)
    out = []
    for f in freqs:
        w = 2 * math.pi * f
        out.append(netalg.abcd_to_s(line_abcd(cell, w, n), _zc_at(zc, w), f))
    return out


def homogeneous_spectrum(
    cell: CrlhCellParams, freqs_hz: Iterable[float], cells: float, zc: ZcSpec, beta_model: str = "long-wavelength"
) -> list[TwoPortScattering]:
    freqs = _validated_grid(freqs_hz)
    out = []
    for f in freqs:
        w = 2 * math.pi * f
        m = homogeneous_line_abcd(cell, w, cells, beta_model)
        out.append(netalg.abcd_to_s(m, _zc_at(zc, w), f))
    return out


def _validated_grid(freqs_hz) -> list[float]:
    freqs = [float(f) for f in freqs_hz]
    if not freqs:
        raise ValueError("frequency grid is empty")
    if any(b <= a for a, b in zip(freqs, freqs[1:])):
        raise ValueError("frequency grid must be strictly ascending")
    return freqs
