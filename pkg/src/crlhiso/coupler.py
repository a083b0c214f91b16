"""Coupled CRLH lines: normal modes, coupling coefficient, static coupler.

A symmetric coupler decomposes exactly into an even line (L_R + 2 L_m) and an
odd line (C_R + 2 C_m). An asymmetric coupler (line-up carrying an L_R shift
of -delta, line-down +delta) is handled through its c/pi normal modes.

Mode matrices are indexed [output, input] with index 0 = line-up and
1 = line-down, so ``m[1, 0]`` is the up-to-down cross transmission.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from . import crlh, netalg
from .crlh import CrlhCellParams
from .errors import AsymmetricCouplerError, OutOfBandError

MODELS = ("lattice", "homogeneous")


@dataclass(frozen=True)
class CoupledLineParams:
    line_up: CrlhCellParams
    line_down: CrlhCellParams
    L_m: float
    C_m: float

    def __post_init__(self):
        if not math.isfinite(self.L_m):
            raise ValueError(f"L_m must be finite, got {self.L_m!r}")
        if not (self.C_m >= 0 and math.isfinite(self.C_m)):
            raise ValueError(f"C_m must be non-negative, got {self.C_m!r}")
        if not math.isclose(self.line_up.p, self.line_down.p, rel_tol=1e-12):
            raise ValueError("coupled lines must share the same pitch")

    @classmethod
    def from_cell(cls, cell: CrlhCellParams, L_m: float, C_m: float, delta: float = 0.0) -> "CoupledLineParams":
        """Coupled pair built from one bare cell; line-up gets -delta, line-down +delta."""
        return cls(
            cell.with_(dL_R=cell.dL_R - delta),
            cell.with_(dL_R=cell.dL_R + delta),
            L_m,
            C_m,
        )

    @property
    def is_symmetric(self) -> bool:
        return self.line_up == self.line_down

    @property
    def p(self) -> float:
        return self.line_up.p

    @property
    def delta(self) -> float:
        return (self.line_down.dL_R - self.line_up.dL_R) / 2

    @property
    def bare(self) -> CrlhCellParams:
        """The cell midway between the two lines (equal to either when symmetric)."""
        return self.line_up.with_(dL_R=(self.line_up.dL_R + self.line_down.dL_R) / 2)

    def with_mutual(self, L_m: float | None = None, C_m: float | None = None) -> "CoupledLineParams":
        return replace(
            self,
            L_m=self.L_m if L_m is None else L_m,
            C_m=self.C_m if C_m is None else C_m,
        )

    def symmetrized(self) -> "CoupledLineParams":
        bare = self.bare
        return replace(self, line_up=bare, line_down=bare)


@dataclass(frozen=True)
class NormalModes:
    """Normal-mode wavenumbers of a coupled pair, all in rad/m and band-signed.

    For a symmetric pair ``beta_c``/``beta_pi`` are the even/odd wavenumbers.
    """

    beta_c: float
    beta_pi: float
    delta_beta_0: float
    delta_beta_c: float
    k0: float
    p: float
    evanescent_coupling: bool = False
    complex_modes: bool = False
    evanescent: bool = False

    @property
    def k0_per_cell(self) -> float:
        return self.k0 * self.p

    @property
    def delta_beta_0_per_cell(self) -> float:
        return self.delta_beta_0 * self.p


@dataclass(frozen=True)
class CouplerScattering:
    """Static coupler response: forward mode matrix plus the two reflections."""

    m: np.ndarray
    gamma: complex
    upsilon: complex
    frequency_hz: float | None = None

    def __post_init__(self):
        m = np.array(self.m, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(self, "m", m)


def even_odd_cells(c: CoupledLineParams) -> tuple[CrlhCellParams, CrlhCellParams]:
    if not c.is_symmetric:
        raise AsymmetricCouplerError(
            "even/odd decomposition needs identical lines; use c_pi_constants for asymmetric couplers"
        )
    cell = c.line_up
    return cell.with_(L_R=cell.L_R + 2 * c.L_m), cell.with_(C_R=cell.C_R + 2 * c.C_m)


def _mode_beta(cell: CrlhCellParams, w: float, model: str) -> tuple[float, bool]:
    if model == "lattice":
        pt = crlh.propagation_constant(cell, w)
        return pt.signed_beta, pt.evanescent
    if model == "homogeneous":
        beta = crlh.homogeneous_beta(cell, w)
        return beta.real, abs(beta.imag) > 0
    raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")


def _lambda_to_beta(lam: complex, z_mode: complex, p: float, model: str) -> tuple[float, bool]:
    """Wavenumber (rad/m, band-signed) of a mode with gamma^2 = lam per cell."""
    if model == "lattice":
        beta_p, _, arg = crlh.bloch_phase(lam, 1.0)
        evanescent = abs(arg.real) > 1.0
    elif model == "homogeneous":
        evanescent = lam.real > 0
        beta_p = math.sqrt(-lam.real) if not evanescent else 0.0
    else:
        raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")
    sign = -1.0 if z_mode.imag < 0 else 1.0
    return sign * beta_p / p, evanescent


def c_pi_constants(c: CoupledLineParams, w: float, model: str = "lattice") -> NormalModes:
    """Normal modes of a (possibly asymmetric) coupled pair.

    The self impedance/admittance of each line inside the coupler carries the
    mutual elements the same way the even/odd circuits do, so a symmetric pair
    reduces exactly to the even/odd wavenumbers. ``model`` maps each
    eigenvalue lam of the ZY product onto a wavenumber: "lattice" uses
    arccos(1 + lam/2) per cell, "homogeneous" uses -j*sqrt(lam).
    """
    zm = 1j * w * c.L_m
    ym = -1j * w * c.C_m
    zu = crlh.series_impedance(c.line_up, w) + zm
    zd = crlh.series_impedance(c.line_down, w) + zm
    yu = crlh.shunt_admittance(c.line_up, w) - ym
    yd = crlh.shunt_admittance(c.line_down, w) - ym

    a = zu * yu + zm * ym
    b = zu * ym + zm * yd
    cc = zd * ym + zm * yu
    d = zd * yd + zm * ym

    disc2 = (a - d) ** 2 + 4 * b * cc
    complex_modes = disc2.real < 0 and abs(disc2.real) > 1e-12 * abs(a * d)
    root = cmath.sqrt(disc2)
    lam_1 = (a + d) / 2 + root / 2
    lam_2 = (a + d) / 2 - root / 2

    zmat = np.array([[zu, zm], [zm, zd]])
    tiny = 1e-300

    def eigvec(lam):
        if abs(b) > tiny:
            return np.array([b, lam - a])
        if abs(cc) > tiny:
            return np.array([lam - d, cc])
        return np.array([1.0, 0.0]) if abs(lam - a) <= abs(lam - d) else np.array([0.0, 1.0])

    if abs(b) <= tiny and abs(cc) <= tiny:
        # Uncoupled: the c mode is taken as line-up's own mode.
        lam_c, lam_pi = a, d
        v_c, v_pi = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    else:
        v1, v2 = eigvec(lam_1), eigvec(lam_2)
        in_phase_1 = (v1[1] / v1[0]).real > 0 if abs(v1[0]) > tiny else False
        if in_phase_1:
            lam_c, lam_pi, v_c, v_pi = lam_1, lam_2, v1, v2
        else:
            lam_c, lam_pi, v_c, v_pi = lam_2, lam_1, v2, v1

    def modal_z(v):
        return (v @ zmat @ v) / (v @ v)

    beta_c, ev_c = _lambda_to_beta(lam_c, modal_z(v_c), c.p, model)
    beta_pi, ev_pi = _lambda_to_beta(lam_pi, modal_z(v_pi), c.p, model)

    beta_up, ev_up = _mode_beta(c.line_up, w, model)
    beta_down, ev_down = _mode_beta(c.line_down, w, model)
    delta_beta_0 = beta_down - beta_up
    delta_beta_c = beta_c - beta_pi

    radicand = delta_beta_c**2 - delta_beta_0**2
    evanescent_coupling = radicand < 0
    if evanescent_coupling:
        k0 = math.nan
    else:
        k0 = math.copysign(math.sqrt(radicand) / 2, delta_beta_c)

    return NormalModes(
        beta_c=beta_c,
        beta_pi=beta_pi,
        delta_beta_0=delta_beta_0,
        delta_beta_c=delta_beta_c,
        k0=k0,
        p=c.p,
        evanescent_coupling=evanescent_coupling,
        complex_modes=bool(complex_modes),
        evanescent=ev_c or ev_pi or ev_up or ev_down,
    )


def coupling_coefficient(c: CoupledLineParams, w: float, model: str = "lattice") -> NormalModes:
    """Coupling coefficient K in rad/m (sign follows the band-signed wavenumbers).

    Symmetric pairs use K = (beta_even - beta_odd)/2 on the substituted cells;
    asymmetric pairs use K0 = sqrt(dbeta_c^2 - dbeta_0^2)/2 from the c/pi modes.
    """
    f = w / (2 * math.pi)
    if not c.is_symmetric:
        modes = c_pi_constants(c, w, model)
        if modes.evanescent or modes.complex_modes:
            raise OutOfBandError(f"coupled-line normal modes are not propagating at {f:.9g} Hz")
        return modes
    even, odd = even_odd_cells(c)
    beta_e, ev_e = _mode_beta(even, w, model)
    beta_o, ev_o = _mode_beta(odd, w, model)
    if ev_e or ev_o:
        which = "even" if ev_e else "odd"
        raise OutOfBandError(f"{which} mode is evanescent at {f:.9g} Hz")
    delta = beta_e - beta_o
    return NormalModes(beta_e, beta_o, 0.0, delta, delta / 2, c.p)


def three_db_mismatch(modes: NormalModes, n_cells: int) -> float:
    """|K0| * N * p - pi/4 in radians; zero for an exact 3-dB coupler."""
    return abs(modes.k0) * n_cells * modes.p - math.pi / 4


def three_db_cells(modes: NormalModes) -> float:
    """Unrounded cell count for 3-dB coupling."""
    return math.pi / (4 * abs(modes.k0) * modes.p)


def termination_impedance(c: CoupledLineParams, w: float, mode: str | complex | float = "uncoupled") -> complex:
    """Port reference impedance for coupler spectra.

    "uncoupled" terminates in the characteristic impedance of the bare line,
    "fixed50" in 50 ohm; a number is used as-is.
    """
    if mode == "uncoupled":
        if crlh.propagation_constant(c.bare, w).evanescent:
            raise OutOfBandError(
                f"bare line is evanescent at {w / (2 * math.pi):.9g} Hz; no real termination impedance"
            )
        return crlh.characteristic_impedance(c.bare, w)
    if mode == "fixed50":
        return 50.0 + 0j
    if isinstance(mode, str):
        raise ValueError(f"unknown termination mode {mode!r}")
    return complex(mode)


def static_coupler_s(c: CoupledLineParams, w: float, n: int, zc: complex | None = None) -> CouplerScattering:
    """N-cell symmetric coupler from the even/odd line scattering parameters.

    ``zc`` defaults to the bare uncoupled line's characteristic impedance.
    """
    f = w / (2 * math.pi)
    if zc is None:
        zc = termination_impedance(c, w, "uncoupled")
    even, odd = even_odd_cells(c)
    se = netalg.abcd_to_s(crlh.line_abcd(even, w, n), zc, f)
    so = netalg.abcd_to_s(crlh.line_abcd(odd, w, n), zc, f)
    through = (se.s21 + so.s21) / 2
    cross = (se.s21 - so.s21) / 2
    m = np.array([[through, cross], [cross, through]])
    return CouplerScattering(m, (se.s11 + so.s11) / 2, (se.s11 - so.s11) / 2, f)


def asym_coupler_s_closedform(modes: NormalModes, l_c: float) -> np.ndarray:
    """Closed-form coupled-mode transfer matrix of a static (possibly detuned) coupler.

    ``l_c`` is the coupling length in metres. Entries are in the frame
    co-rotating with the uncoupled line wavenumbers.
    """
    if modes.evanescent_coupling or not math.isfinite(modes.k0):
        raise ValueError("closed form needs real K0 (coupling is evanescent here)")
    dbc = modes.delta_beta_c
    db0 = modes.delta_beta_0
    if dbc == 0:
        return np.eye(2, dtype=complex)
    half = dbc * l_c / 2
    cs, sn = math.cos(half), math.sin(half)
    ph = cmath.exp(-0.5j * db0 * l_c)
    cross = -1j * (2 * modes.k0 / dbc) * sn
    return np.array(
        [
            [ph * (cs + 1j * (db0 / dbc) * sn), cross / ph],
            [cross * ph, (cs - 1j * (db0 / dbc) * sn) / ph],
        ]
    )
