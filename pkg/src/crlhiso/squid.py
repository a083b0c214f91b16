"""Flux-tunable mutual inductance through an rf-SQUID.

Fluxes are expressed in units of the flux quantum throughout (``phi`` = Phi/Phi0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import physical_constants
from scipy.optimize import brentq

from . import coupler
from .coupler import CoupledLineParams
from .errors import FluxDivergenceError, OutOfBandError, WaveformSynthesisError

PHI0 = physical_constants["mag. flux quantum"][0]

# Root solves on flux use this absolute tolerance (units of Phi0).
FLUX_XTOL = 1e-15


@dataclass(frozen=True)
class SquidParams:
    L_S: float = 200e-12
    L_P: float = 100e-12
    L_B: float = 40e-12
    L_dir: float = 70e-12
    beta_L: float = 0.9

    def __post_init__(self):
        if not 0 < self.beta_L < 1:
            raise ValueError(f"beta_L must lie in (0, 1) for a non-hysteretic SQUID, got {self.beta_L!r}")
        for name in ("L_S", "L_B"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.L_P < 0:
            raise ValueError("L_P must be non-negative")

    @property
    def L_G(self) -> float:
        """Geometric loop inductance."""
        return 2 * self.L_S + 2 * self.L_B

    @property
    def I_c(self) -> float:
        """Junction critical current implied by beta_L and L_G."""
        return self.beta_L * PHI0 / (2 * math.pi * self.L_G)

    @property
    def L_R(self) -> float:
        """Series inductance of the host line, L_S + L_P."""
        return self.L_S + self.L_P

    def check_line(self, line_L_R: float, rel_tol: float = 1e-9) -> None:
        if not math.isclose(self.L_R, line_L_R, rel_tol=rel_tol):
            raise ValueError(
                f"L_S + L_P = {self.L_R:.6g} H does not match the line's L_R = {line_L_R:.6g} H"
            )


def l_rf(s: SquidParams, phi: float) -> float:
    """Effective SQUID inductance (H). Diverges where cos(2*pi*phi) = 0; may be negative."""
    bc = s.beta_L * math.cos(2 * math.pi * phi)
    if abs(bc) < 1e-15:
        raise FluxDivergenceError(f"L_rf diverges at phi = {phi:.12g} Phi0")
    return s.L_G * (1 + bc) / bc


def l_m(s: SquidParams, phi: float) -> float:
    """Mutual inductance L_dir + L_S^2 / L_rf(phi), written without the removable pole."""
    bc = s.beta_L * math.cos(2 * math.pi * phi)
    return s.L_dir + s.L_S**2 * bc / (s.L_G * (1 + bc))


def flux_for_lm(s: SquidParams, target: float, lo: float = 0.0, hi: float = 0.5) -> float:
    """Flux in [lo, hi] at which l_m equals ``target`` (l_m is monotone on [0, 1/2])."""
    f_lo = l_m(s, lo) - target
    f_hi = l_m(s, hi) - target
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    if f_lo * f_hi > 0:
        raise ValueError(
            f"L_m = {target:.6g} H is outside [{l_m(s, hi):.6g}, {l_m(s, lo):.6g}] H on flux [{lo}, {hi}]"
        )
    return brentq(lambda x: l_m(s, x) - target, lo, hi, xtol=FLUX_XTOL, rtol=4 * np.finfo(float).eps)


def k_of_flux(s: SquidParams, coupled: CoupledLineParams, w_op: float, phi: float, model: str = "lattice") -> float:
    """Coupling coefficient (rad/m) with the SQUID-set L_m(phi) in the coupler."""
    return coupler.coupling_coefficient(coupled.with_mutual(L_m=l_m(s, phi)), w_op, model).k0


@dataclass(frozen=True)
class FluxWindow:
    phi_on: float
    phi_off: float
    k_on: float
    k_off: float

    @property
    def k0(self) -> float:
        """Largest amplitude reachable at both ends of the window."""
        return min(abs(self.k_on), abs(self.k_off))


def modulation_window(
    s: SquidParams, coupled: CoupledLineParams, w_op: float, L_m_on: float, L_m_off: float,
    model: str = "lattice", samples: int = 201,
) -> FluxWindow:
    """Solve the On/Off fluxes and check that K(phi) is strictly monotone between them."""
    phi_on = flux_for_lm(s, L_m_on)
    phi_off = flux_for_lm(s, L_m_off)
    grid = np.linspace(phi_on, phi_off, samples)
    try:
        ks = np.array([k_of_flux(s, coupled, w_op, x, model) for x in grid])
    except OutOfBandError as exc:
        raise WaveformSynthesisError(f"coupler leaves its passband inside the flux window: {exc}") from exc
    steps = np.diff(ks)
    if not (np.all(steps > 0) or np.all(steps < 0)):
        raise WaveformSynthesisError(
            f"K(phi) is not monotone on [{phi_on:.6g}, {phi_off:.6g}] Phi0"
        )
    return FluxWindow(phi_on, phi_off, float(ks[0]), float(ks[-1]))


@dataclass(frozen=True)
class FluxWaveform:
    times: np.ndarray
    flux: np.ndarray
    k_target: np.ndarray
    phase: float
    omega_m: float
    window: FluxWindow

    @property
    def k0(self) -> float:
        return self.window.k0


def flux_waveform(
    s: SquidParams,
    coupled: CoupledLineParams,
    w_op: float,
    omega_m: float,
    phase: float,
    n_samples: int,
    L_m_on: float,
    L_m_off: float,
    model: str = "lattice",
) -> FluxWaveform:
    """Flux drive over one modulation period that makes K(t) = K0 cos(omega_m t + phase).

    The sign convention puts +K0 at the On flux. Samples include both ends of
    the period, so the first and last samples coincide.
    """
    if n_samples < 2:
        raise ValueError("need at least two samples")
    window = modulation_window(s, coupled, w_op, L_m_on, L_m_off, model)
    sign = 1.0 if window.k_on > 0 else -1.0
    k0 = window.k0
    lo_k, hi_k = sorted((window.k_on, window.k_off))

    times = np.linspace(0.0, 2 * math.pi / omega_m, n_samples)
    targets = sign * k0 * np.cos(omega_m * times + phase)
    flux = np.empty(n_samples)
    for i, kt in enumerate(targets):
        kt = min(max(kt, lo_k), hi_k)
        fn = lambda x, kt=kt: k_of_flux(s, coupled, w_op, x, model) - kt
        f_on = fn(window.phi_on)
        f_off = fn(window.phi_off)
        if f_on == 0:
            flux[i] = window.phi_on
        elif f_off == 0:
            flux[i] = window.phi_off
        else:
            flux[i] = brentq(fn, window.phi_on, window.phi_off, xtol=FLUX_XTOL, rtol=4 * np.finfo(float).eps)
    return FluxWaveform(times, flux, targets, phase, omega_m, window)
