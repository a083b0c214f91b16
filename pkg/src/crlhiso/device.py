"""Three-stage modulated isolator/circulator.

Stage I and stage III are 3-dB couplers whose coupling is modulated with
initial phases phi1 and phi2; stage II is a pair of uncoupled lines whose
lengths differ so the two modes pick up a relative phase delta_theta.

Port numbering of the assembled device: 1 = line-up at the input plane,
2 = line-up at the output plane, 3 = line-down at the input plane,
4 = line-down at the output plane.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import coupler, crlh, netalg
from .coupler import CoupledLineParams, CouplerScattering
from .crlh import CrlhCellParams
from .errors import OutOfBandError
from .netalg import FourPortScattering

DB_FLOOR = -200.0


def db(x) -> float:
    """20*log10|x|, clamped at -200 dB."""
    mag = abs(x)
    if mag == 0:
        return DB_FLOOR
    return max(20 * math.log10(mag), DB_FLOOR)


# --- Ideal three-stage model -------------------------------------------------


def ideal_coupler_matrix(phi: float) -> np.ndarray:
    """3-dB coupler with the modulation phase on its cross terms."""
    return np.array(
        [[1, -1j * cmath.exp(-1j * phi)], [-1j * cmath.exp(1j * phi), 1]],
    ) / math.sqrt(2)


def phase_section(delta_theta: float) -> np.ndarray:
    return np.diag([cmath.exp(1j * delta_theta), 1.0 + 0j])


def ideal_total(phi1: float, delta_theta: float, phi2: float) -> tuple[np.ndarray, np.ndarray]:
    """(forward, backward) mode matrices of the ideal cascade."""
    mb = phase_section(delta_theta)
    m1 = ideal_coupler_matrix(phi1)
    m2 = ideal_coupler_matrix(phi2)
    return m2 @ mb @ m1, m1 @ mb @ m2


@dataclass(frozen=True)
class TrajectoryPoint:
    step: int
    stage: str
    xyz: tuple[float, float, float]


def bloch_vector(amps) -> tuple[float, float, float]:
    """Map a mode amplitude pair (up, down) to a point on the unit sphere; up = north."""
    a_up, a_dn = complex(amps[0]), complex(amps[1])
    norm = abs(a_up) ** 2 + abs(a_dn) ** 2
    cross = a_up.conjugate() * a_dn
    return (2 * cross.real / norm, 2 * cross.imag / norm, (abs(a_up) ** 2 - abs(a_dn) ** 2) / norm)


def _coupler_evolution(phi: float, frac: float) -> np.ndarray:
    kz = math.pi / 4 * frac
    c, s = math.cos(kz), math.sin(kz)
    return np.array([[c, -1j * cmath.exp(-1j * phi) * s], [-1j * cmath.exp(1j * phi) * s, c]])


def bloch_trajectory(
    port: int, phi1: float, delta_theta: float, phi2: float, steps: int = 50
) -> list[TrajectoryPoint]:
    """Field evolution through the ideal device for an injection at ``port``.

    Ports 1 and 3 launch forward waves on line-up and line-down; ports 2 and 4
    launch backward waves, which meet stage III first.
    """
    if steps < 2:
        raise ValueError("need at least two steps per stage")
    start = {1: (1, 0), 2: (1, 0), 3: (0, 1), 4: (0, 1)}
    if port not in start:
        raise ValueError(f"port must be 1..4, got {port}")
    stages = [
        ("stage-I", lambda f: _coupler_evolution(phi1, f)),
        ("stage-II", lambda f: phase_section(delta_theta * f)),
        ("stage-III", lambda f: _coupler_evolution(phi2, f)),
    ]
    if port in (2, 4):
        stages.reverse()

    state = np.array(start[port], dtype=complex)
    points = [TrajectoryPoint(0, stages[0][0], bloch_vector(state))]
    for label, evolve in stages:
        for frac in np.linspace(0.0, 1.0, steps)[1:]:
            points.append(TrajectoryPoint(len(points), label, bloch_vector(evolve(frac) @ state)))
        state = evolve(1.0) @ state
    return points


# --- CRLH-realised device ----------------------------------------------------


def modulated_coupler_s(m: np.ndarray, phi: float) -> np.ndarray:
    """Apply the modulation phase to the cross terms of a static mode matrix."""
    out = np.array(m, dtype=complex)
    out[0, 1] *= cmath.exp(-1j * phi)
    out[1, 0] *= cmath.exp(1j * phi)
    return out


@dataclass(frozen=True)
class Stage2Spec:
    """Phase section: effective cell counts of the two uncoupled arms."""

    delta_theta: float
    cells_up: float
    cells_down: float

    def __post_init__(self):
        if self.cells_up < 0 or self.cells_down < 0:
            raise ValueError("stage-II cell counts must be non-negative")

    @classmethod
    def for_phase(
        cls, cell: CrlhCellParams, w_op: float, delta_theta: float, base_cells: float = 2.0
    ) -> "Stage2Spec":
        """Arm lengths giving a relative phase ``delta_theta`` (up relative to down) at ``w_op``.

        The shorter arm is ``base_cells`` long.
        """
        pt = crlh.propagation_constant(cell, w_op)
        if pt.evanescent:
            raise OutOfBandError(f"stage-II line is evanescent at {w_op / (2 * math.pi):.9g} Hz")
        # A matched line transmits exp(-j beta l); up must lead down by delta_theta.
        diff = -delta_theta / pt.signed_beta_per_cell
        if diff >= 0:
            return cls(delta_theta, base_cells + diff, base_cells)
        return cls(delta_theta, base_cells, base_cells - diff)

    @property
    def differential_cells(self) -> float:
        return self.cells_up - self.cells_down


@dataclass(frozen=True)
class DeviceSpec:
    coupled: CoupledLineParams
    stage2: Stage2Spec
    n_c: int = 37
    phi1: float = 0.0
    phi2: float = math.pi / 2
    omega_m: float = 2 * math.pi * 20e6
    omega_op: float = 2 * math.pi * 6e9
    termination: str = "uncoupled"
    modulated: bool = True
    coupler_model: str = "auto"

    def __post_init__(self):
        if int(self.n_c) != self.n_c or self.n_c < 1:
            raise ValueError(f"n_c must be a positive integer, got {self.n_c!r}")
        if self.coupler_model not in ("auto", "lattice", "closed_form"):
            raise ValueError(f"unknown coupler_model {self.coupler_model!r}")
        if self.coupler_model == "lattice" and not self.coupled.is_symmetric:
            raise ValueError("the lattice coupler model needs a symmetric coupled line")

    @classmethod
    def build(
        cls,
        cell: CrlhCellParams = crlh.REFERENCE_CELL,
        L_m: float = 0.5e-12,
        C_m: float = 20e-15,
        delta: float = 0.0,
        n_c: int = 37,
        phi1: float = 0.0,
        delta_theta: float = math.pi / 2,
        phi2: float = math.pi / 2,
        f_op: float = 6e9,
        f_m: float = 20e6,
        base_cells: float = 2.0,
        **kwargs,
    ) -> "DeviceSpec":
        w_op = 2 * math.pi * f_op
        return cls(
            coupled=CoupledLineParams.from_cell(cell, L_m, C_m, delta),
            stage2=Stage2Spec.for_phase(cell, w_op, delta_theta, base_cells),
            n_c=n_c,
            phi1=phi1,
            phi2=phi2,
            omega_m=2 * math.pi * f_m,
            omega_op=w_op,
            **kwargs,
        )

    @property
    def stage_cell(self) -> CrlhCellParams:
        """Bare line used for the phase section and for the port terminations."""
        return self.coupled.bare

    @property
    def uses_closed_form(self) -> bool:
        if self.coupler_model == "auto":
            return not self.coupled.is_symmetric
        return self.coupler_model == "closed_form"

    def common_phase(self) -> float:
        """Phase of the shorter stage-II arm at the operating frequency (rad)."""
        pt = crlh.propagation_constant(self.stage_cell, self.omega_op)
        return pt.beta_per_cell * min(self.stage2.cells_up, self.stage2.cells_down)


def _termination(spec: DeviceSpec, w: float) -> complex:
    return coupler.termination_impedance(spec.coupled, w, spec.termination)


def coupler_response(spec: DeviceSpec, w: float) -> CouplerScattering:
    """Static response of one coupler stage.

    Symmetric lines use the N-cell even/odd lattice. The closed-form path
    (asymmetric lines) takes its transmissions from the coupled-mode solution
    and its reflections from the symmetrised lattice coupler.
    """
    zc = _termination(spec, w)
    if not spec.uses_closed_form:
        return coupler.static_coupler_s(spec.coupled, w, spec.n_c, zc)
    modes = coupler.coupling_coefficient(spec.coupled, w) if not spec.coupled.is_symmetric else \
        coupler.c_pi_constants(spec.coupled, w)
    if modes.evanescent_coupling:
        raise OutOfBandError(f"coupling is evanescent at {w / (2 * math.pi):.9g} Hz")
    m = coupler.asym_coupler_s_closedform(modes, spec.n_c * spec.coupled.p)
    refl = coupler.static_coupler_s(spec.coupled.symmetrized(), w, spec.n_c, zc)
    return CouplerScattering(m, refl.gamma, refl.upsilon, w / (2 * math.pi))


def stage2_s(spec: DeviceSpec, w: float) -> np.ndarray:
    """Diagonal mode matrix of the phase section (dispersion included)."""
    cell = spec.stage_cell
    pt = crlh.propagation_constant(cell, w)
    if pt.evanescent:
        raise OutOfBandError(f"stage-II line is evanescent at {w / (2 * math.pi):.9g} Hz")
    zc = _termination(spec, w)
    f = w / (2 * math.pi)
    s_up = netalg.abcd_to_s(crlh.homogeneous_line_abcd(cell, w, spec.stage2.cells_up), zc, f).s21
    s_dn = netalg.abcd_to_s(crlh.homogeneous_line_abcd(cell, w, spec.stage2.cells_down), zc, f).s21
    return np.diag([s_up, s_dn])


# Port p (1-based) of the device -> (mode index, side) with side 0 = input plane.
_PORT_MODE = {1: 0, 2: 0, 3: 1, 4: 1}
# Main-text port order expressed in the (L-up, L-down, R-up, R-down) block order.
_PORT_TO_BLOCK = (0, 2, 1, 3)


def _offset_signs() -> np.ndarray:
    """+1 for up->down conversion across the device, -1 for down->up, 0 elsewhere."""
    sign = np.zeros((4, 4), dtype=int)
    for out in range(1, 5):
        for inp in range(1, 5):
            same_side = (out in (1, 3)) == (inp in (1, 3))
            if same_side:
                continue
            m_in, m_out = _PORT_MODE[inp], _PORT_MODE[out]
            if m_in != m_out:
                sign[out - 1, inp - 1] = 1 if m_in == 0 else -1
    return sign


@dataclass(frozen=True)
class TotalScattering:
    """4x4 device scattering matrix (ports 1-4) with frequency-offset tags.

    ``offset_sign[i, j]`` is +1/-1 where the output of S_(i+1)(j+1) is shifted
    by +/-omega_m from the input, 0 where it is not.
    """

    matrix: np.ndarray
    offset_sign: np.ndarray
    omega_m: float
    frequency_hz: float

    def __post_init__(self):
        for name in ("matrix", "offset_sign"):
            arr = np.array(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def s(self, out_port: int, in_port: int) -> complex:
        return complex(self.matrix[out_port - 1, in_port - 1])

    def s_db(self, out_port: int, in_port: int) -> float:
        return db(self.matrix[out_port - 1, in_port - 1])

    @property
    def offsets(self) -> np.ndarray:
        """Frequency offsets in rad/s."""
        return self.offset_sign * self.omega_m

    @property
    def forward(self) -> np.ndarray:
        """Mode matrix input plane -> output plane, [output mode, input mode]."""
        m = self.matrix
        return np.array([[m[1, 0], m[1, 2]], [m[3, 0], m[3, 2]]])

    @property
    def backward(self) -> np.ndarray:
        m = self.matrix
        return np.array([[m[0, 1], m[0, 3]], [m[2, 1], m[2, 3]]])


def _tags(spec_modulated: bool) -> np.ndarray:
    return _offset_signs() if spec_modulated else np.zeros((4, 4), dtype=int)


def total_from_parts(
    cs: CouplerScattering,
    mb: np.ndarray,
    phi1: float,
    phi2: float,
    omega_m: float,
    frequency_hz: float,
    modulated: bool = True,
) -> TotalScattering:
    """Cascade (reflectionless) assembly of the 4x4 device matrix."""
    if not modulated:
        phi1 = phi2 = 0.0
    fwd = modulated_coupler_s(cs.m, phi2) @ mb @ modulated_coupler_s(cs.m, phi1)
    # Backward waves see the transposed static coupler (reciprocity).
    bwd = modulated_coupler_s(cs.m.T, phi1) @ mb @ modulated_coupler_s(cs.m.T, phi2)
    g, u = cs.gamma, cs.upsilon
    s = np.array(
        [
            [g, bwd[0, 0], u, bwd[0, 1]],
            [fwd[0, 0], g, fwd[0, 1], u],
            [u, bwd[1, 0], g, bwd[1, 1]],
            [fwd[1, 0], u, fwd[1, 1], g],
        ]
    )
    return TotalScattering(s, _tags(modulated), omega_m, frequency_hz)


def total_s_cascade(spec: DeviceSpec, w: float) -> TotalScattering:
    cs = coupler_response(spec, w)
    mb = stage2_s(spec, w)
    return total_from_parts(cs, mb, spec.phi1, spec.phi2, spec.omega_m, w / (2 * math.pi), spec.modulated)


def coupler_four_port(cs: CouplerScattering, phi: float) -> FourPortScattering:
    refl = np.array([[cs.gamma, cs.upsilon], [cs.upsilon, cs.gamma]])
    fwd = modulated_coupler_s(cs.m, phi)
    bwd = modulated_coupler_s(cs.m.T, phi)
    return FourPortScattering(refl, bwd, fwd, refl, frequency_hz=cs.frequency_hz)


def phase_four_port(mb: np.ndarray, frequency_hz: float) -> FourPortScattering:
    z = np.zeros((2, 2), dtype=complex)
    return FourPortScattering(z, mb, mb, z, frequency_hz=frequency_hz)


def stage_four_ports(spec: DeviceSpec, w: float) -> tuple[FourPortScattering, FourPortScattering, FourPortScattering]:
    cs = coupler_response(spec, w)
    mb = stage2_s(spec, w)
    phi1, phi2 = (spec.phi1, spec.phi2) if spec.modulated else (0.0, 0.0)
    return coupler_four_port(cs, phi1), phase_four_port(mb, cs.frequency_hz), coupler_four_port(cs, phi2)


def total_s_fullnetwork(spec: DeviceSpec, w: float) -> TotalScattering:
    """Exact four-port composition including inter-stage reflections."""
    s1, s2, s3 = stage_four_ports(spec, w)
    s12 = netalg.interconnect(s1, s2, stage="stage-I/stage-II")
    full = netalg.interconnect(s12, s3, stage="stage-I+II/stage-III")
    blk = full.to_matrix()
    idx = list(_PORT_TO_BLOCK)
    s = blk[np.ix_(idx, idx)]
    return TotalScattering(s, _tags(spec.modulated), spec.omega_m, w / (2 * math.pi))


def spectrum(spec: DeviceSpec, freqs_hz: Iterable[float], method: str = "cascade") -> list[TotalScattering]:
    fn = {"cascade": total_s_cascade, "fullnetwork": total_s_fullnetwork}[method]
    return [fn(spec, 2 * math.pi * f) for f in freqs_hz]


# --- Metrics -----------------------------------------------------------------


@dataclass(frozen=True)
class IsolationMetrics:
    threshold_db: float
    bandwidth_hz: float
    f_low_hz: float | None
    f_high_hz: float | None
    peak_isolation_db: float
    peak_frequency_hz: float
    min_insertion_loss_db: float | None = None
    max_insertion_loss_db: float | None = None
    max_reflection_db: float | None = None

    @property
    def center_hz(self) -> float | None:
        if self.f_low_hz is None:
            return None
        return (self.f_low_hz + self.f_high_hz) / 2

    def as_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out["center_hz"] = self.center_hz
        return out


def isolation_band(freqs_hz: Sequence[float], iso_db: Sequence[float], threshold_db: float):
    """Widest contiguous run with iso >= threshold.

    Returns (f_low, f_high, first_index, last_index) with edges linearly
    interpolated between grid points, or None when the threshold is never met.
    """
    f = np.asarray(freqs_hz, dtype=float)
    iso = np.asarray(iso_db, dtype=float)
    if f.ndim != 1 or f.size != iso.size or f.size == 0:
        raise ValueError("frequency and isolation arrays must be 1-D and equally long")
    if np.any(np.diff(f) <= 0):
        raise ValueError("frequency grid must be strictly ascending")
    above = iso >= threshold_db
    best = None
    i = 0
    n = f.size
    while i < n:
        if not above[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and above[j + 1]:
            j += 1
        lo = f[i] if i == 0 else _crossing(f[i - 1], f[i], iso[i - 1], iso[i], threshold_db)
        hi = f[j] if j == n - 1 else _crossing(f[j], f[j + 1], iso[j], iso[j + 1], threshold_db)
        if best is None or hi - lo > best[1] - best[0]:
            best = (float(lo), float(hi), i, j)
        i = j + 1
    return best


def _crossing(f0, f1, y0, y1, level):
    return f0 + (level - y0) / (y1 - y0) * (f1 - f0)


def isolation_metrics(spectrum: Sequence[TotalScattering], threshold_db: float = 20.0) -> IsolationMetrics:
    """Isolation |S21| - |S12| (dB) bandwidth and in-band figures of merit."""
    if not spectrum:
        raise ValueError("empty spectrum")
    freqs = np.array([t.frequency_hz for t in spectrum])
    s21 = np.array([t.s_db(2, 1) for t in spectrum])
    s12 = np.array([t.s_db(1, 2) for t in spectrum])
    s11 = np.array([t.s_db(1, 1) for t in spectrum])
    iso = s21 - s12
    k = int(np.argmax(iso))
    band = isolation_band(freqs, iso, threshold_db)
    if band is None:
        return IsolationMetrics(threshold_db, 0.0, None, None, float(iso[k]), float(freqs[k]))
    lo, hi, i, j = band
    return IsolationMetrics(
        threshold_db=threshold_db,
        bandwidth_hz=hi - lo,
        f_low_hz=lo,
        f_high_hz=hi,
        peak_isolation_db=float(iso[k]),
        peak_frequency_hz=float(freqs[k]),
        min_insertion_loss_db=float(-np.max(s21[i : j + 1])),
        max_insertion_loss_db=float(-np.min(s21[i : j + 1])),
        max_reflection_db=float(np.max(s11[i : j + 1])),
    )
