"""Simulation configuration: JSON blocks, dotted overrides, validation.

Schema (block.field, default)::

    cell.L_R 300e-12     cell.C_R 150e-15    cell.L_L 1400e-12   cell.C_L 560e-15   cell.p 300e-6
    coupler.L_m_off 0.5e-12   coupler.L_m_on 105e-12   coupler.C_m 20e-15
    coupler.delta_L_R 0.0     coupler.asym_delta_L_R 6e-12   coupler.n_c 37
    coupler.state "off"       coupler.model "lattice"
    squid.L_S 200e-12  squid.L_P 100e-12  squid.L_B 40e-12  squid.L_dir 70e-12
    squid.beta_L 0.9   squid.f_m 20e6     squid.waveform_samples 201
    squid.max_modulation_ratio 0.004
    device.phi1 0.0    device.delta_theta pi/2   device.phi2 pi/2   device.f_op 6e9
    device.termination "uncoupled"   device.stage2_base_cells 2.0   device.modulated true
    device.coupler_model "auto"
    sweep.f_min 5e9    sweep.f_max 7e9    sweep.points 2001
    dispersion.f_min 1e9   dispersion.f_max 20e9   dispersion.points 1901
    tl.cells 40        tl.z_ref 50.0      tl.beta_model "long-wavelength"
    metrics.threshold_db 20.0
    output.directory "out"   output.format "csv"

Angles are in radians, frequencies in Hz (not rad/s).
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from . import crlh
from .coupler import CoupledLineParams
from .crlh import CrlhCellParams
from .device import DeviceSpec
from .errors import ConfigError
from .squid import SquidParams


@dataclass(frozen=True)
class CellBlock:
    L_R: float = 300e-12
    C_R: float = 150e-15
    L_L: float = 1400e-12
    C_L: float = 560e-15
    p: float = crlh.DEFAULT_PITCH


@dataclass(frozen=True)
class CouplerBlock:
    L_m_off: float = 0.5e-12
    L_m_on: float = 105e-12
    C_m: float = 20e-15
    delta_L_R: float = 0.0
    asym_delta_L_R: float = 6e-12
    n_c: int = 37
    state: str = "off"
    model: str = "lattice"


@dataclass(frozen=True)
class SquidBlock:
    L_S: float = 200e-12
    L_P: float = 100e-12
    L_B: float = 40e-12
    L_dir: float = 70e-12
    beta_L: float = 0.9
    f_m: float = 20e6
    waveform_samples: int = 201
    max_modulation_ratio: float = 0.004


@dataclass(frozen=True)
class DeviceBlock:
    phi1: float = 0.0
    delta_theta: float = math.pi / 2
    phi2: float = math.pi / 2
    f_op: float = 6e9
    termination: str | float = "uncoupled"
    stage2_base_cells: float = 2.0
    modulated: bool = True
    coupler_model: str = "auto"


@dataclass(frozen=True)
class SweepBlock:
    f_min: float = 5e9
    f_max: float = 7e9
    points: int = 2001


@dataclass(frozen=True)
class DispersionBlock:
    """Wider grid for band diagrams; covers both band edges of the reference cell."""

    f_min: float = 1e9
    f_max: float = 20e9
    points: int = 1901


@dataclass(frozen=True)
class TlBlock:
    cells: int = 40
    z_ref: float = 50.0
    beta_model: str = "long-wavelength"


@dataclass(frozen=True)
class MetricsBlock:
    threshold_db: float = 20.0


@dataclass(frozen=True)
class OutputBlock:
    directory: str = "out"
    format: str = "csv"


_BLOCKS = {
    "cell": CellBlock,
    "coupler": CouplerBlock,
    "squid": SquidBlock,
    "device": DeviceBlock,
    "sweep": SweepBlock,
    "dispersion": DispersionBlock,
    "tl": TlBlock,
    "metrics": MetricsBlock,
    "output": OutputBlock,
}

_CHOICES = {
    "coupler.state": ("off", "on"),
    "coupler.model": ("lattice", "homogeneous"),
    "device.coupler_model": ("auto", "lattice", "closed_form"),
    "tl.beta_model": ("bloch", "long-wavelength"),
    "output.format": ("csv",),
}


@dataclass(frozen=True)
class SimulationConfig:
    cell: CellBlock = field(default_factory=CellBlock)
    coupler: CouplerBlock = field(default_factory=CouplerBlock)
    squid: SquidBlock = field(default_factory=SquidBlock)
    device: DeviceBlock = field(default_factory=DeviceBlock)
    sweep: SweepBlock = field(default_factory=SweepBlock)
    dispersion: DispersionBlock = field(default_factory=DispersionBlock)
    tl: TlBlock = field(default_factory=TlBlock)
    metrics: MetricsBlock = field(default_factory=MetricsBlock)
    output: OutputBlock = field(default_factory=OutputBlock)

    # --- construction ---

    @classmethod
    def from_dict(cls, data: dict) -> "SimulationConfig":
        if not isinstance(data, dict):
            raise ConfigError("", "configuration must be a JSON object")
        blocks = {}
        for name, data_block in data.items():
            if name not in _BLOCKS:
                raise ConfigError(name, "unknown configuration block")
            if not isinstance(data_block, dict):
                raise ConfigError(name, "block must be a JSON object")
        for name, block_cls in _BLOCKS.items():
            blocks[name] = _build_block(name, block_cls, data.get(name, {}))
        cfg = cls(**blocks)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str | Path, overrides: list[str] | tuple[str, ...] = ()) -> "SimulationConfig":
        """Read a config file (or a run manifest) and apply dotted overrides."""
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(str(path), f"cannot read file: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(str(path), f"invalid JSON: {exc.msg} (line {exc.lineno})") from exc
        if isinstance(data, dict) and "config" in data and "subcommand" in data:
            data = data["config"]
        return cls.from_dict(apply_overrides(data, overrides))

    @classmethod
    def default(cls, overrides: list[str] | tuple[str, ...] = ()) -> "SimulationConfig":
        return cls.from_dict(apply_overrides({}, overrides))

    def to_dict(self) -> dict:
        return asdict(self)

    # --- validation ---

    def validate(self) -> None:
        for path, allowed in _CHOICES.items():
            block, key = path.split(".")
            value = getattr(getattr(self, block), key)
            if value not in allowed:
                raise ConfigError(path, f"must be one of {list(allowed)}, got {value!r}")
        _guard("cell", lambda: self.cell_params())
        if self.coupler.n_c < 1:
            raise ConfigError("coupler.n_c", f"must be >= 1, got {self.coupler.n_c}")
        if self.coupler.C_m < 0:
            raise ConfigError("coupler.C_m", "must be non-negative")
        for key in ("delta_L_R", "asym_delta_L_R"):
            value = getattr(self.coupler, key)
            if not abs(value) < self.cell.L_R:
                raise ConfigError(f"coupler.{key}", "magnitude must be smaller than cell.L_R")
        if not 0 < self.squid.beta_L < 1:
            raise ConfigError("squid.beta_L", f"must lie in (0, 1), got {self.squid.beta_L}")
        _guard("squid", lambda: self.squid_params())
        if not math.isclose(self.squid.L_S + self.squid.L_P, self.cell.L_R, rel_tol=1e-9):
            raise ConfigError("squid.L_P", "L_S + L_P must equal cell.L_R")
        if self.squid.f_m <= 0:
            raise ConfigError("squid.f_m", "must be positive")
        if self.squid.waveform_samples < 2:
            raise ConfigError("squid.waveform_samples", "must be >= 2")
        if self.device.f_op <= 0:
            raise ConfigError("device.f_op", "must be positive")
        ratio = self.squid.f_m / self.device.f_op
        if not ratio < self.squid.max_modulation_ratio:
            raise ConfigError(
                "squid.f_m",
                f"f_m / f_op = {ratio:.4g} violates the slow-modulation bound {self.squid.max_modulation_ratio}",
            )
        term = self.device.termination
        if isinstance(term, str) and term not in ("uncoupled", "fixed50"):
            raise ConfigError("device.termination", "must be 'uncoupled', 'fixed50' or a positive number")
        if not isinstance(term, str) and not term > 0:
            raise ConfigError("device.termination", "impedance must be positive")
        if self.device.stage2_base_cells < 0:
            raise ConfigError("device.stage2_base_cells", "must be non-negative")
        for name in ("sweep", "dispersion"):
            s = getattr(self, name)
            if not (s.f_min > 0 and s.f_max > s.f_min):
                raise ConfigError(
                    f"{name}.f_max", f"sweep bounds must satisfy 0 < f_min < f_max, got [{s.f_min}, {s.f_max}]"
                )
            if s.points < 2:
                raise ConfigError(f"{name}.points", "must be >= 2")
        if self.tl.cells < 1:
            raise ConfigError("tl.cells", "must be >= 1")
        if self.tl.z_ref <= 0:
            raise ConfigError("tl.z_ref", "must be positive")

    # --- domain objects ---

    def cell_params(self) -> CrlhCellParams:
        c = self.cell
        return CrlhCellParams(L_R=c.L_R, C_R=c.C_R, L_L=c.L_L, C_L=c.C_L, p=c.p)

    def squid_params(self) -> SquidParams:
        q = self.squid
        return SquidParams(L_S=q.L_S, L_P=q.L_P, L_B=q.L_B, L_dir=q.L_dir, beta_L=q.beta_L)

    @property
    def static_L_m(self) -> float:
        return self.coupler.L_m_off if self.coupler.state == "off" else self.coupler.L_m_on

    def coupled_params(self, L_m: float | None = None, delta: float | None = None) -> CoupledLineParams:
        return CoupledLineParams.from_cell(
            self.cell_params(),
            self.static_L_m if L_m is None else L_m,
            self.coupler.C_m,
            self.coupler.delta_L_R if delta is None else delta,
        )

    def device_spec(self, **changes) -> DeviceSpec:
        d = self.device
        kwargs = dict(
            cell=self.cell_params(),
            L_m=self.static_L_m,
            C_m=self.coupler.C_m,
            delta=self.coupler.delta_L_R,
            n_c=self.coupler.n_c,
            phi1=d.phi1,
            delta_theta=d.delta_theta,
            phi2=d.phi2,
            f_op=d.f_op,
            f_m=self.squid.f_m,
            base_cells=d.stage2_base_cells,
            termination=d.termination,
            modulated=d.modulated,
            coupler_model=d.coupler_model,
        )
        kwargs.update(changes)
        return DeviceSpec.build(**kwargs)

    @property
    def w_op(self) -> float:
        return 2 * math.pi * self.device.f_op

    @property
    def omega_m(self) -> float:
        return 2 * math.pi * self.squid.f_m


def _guard(path, fn):
    try:
        fn()
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def _build_block(name, block_cls, raw):
    known = {f.name: f for f in fields(block_cls)}
    values = {}
    for key, value in raw.items():
        path = f"{name}.{key}"
        if key not in known:
            raise ConfigError(path, "unknown field")
        default = known[key].default
        values[key] = _coerce(path, value, default)
    return block_cls(**values)


def _coerce(path, value, default):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(path, f"expected true/false, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise ConfigError(path, f"expected an integer, got {value!r}")
        return int(value)
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(path, f"expected a finite number, got {value!r}")
        return float(value)
    # string fields; device.termination also accepts a number
    if isinstance(value, str):
        return value
    if path == "device.termination" and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    raise ConfigError(path, f"expected a string, got {value!r}")


def apply_overrides(data: dict, overrides) -> dict:
    """Apply ``block.field=value`` overrides; values parse as JSON, else as plain strings."""
    out = copy.deepcopy(data) if isinstance(data, dict) else data
    for item in overrides:
        if "=" not in item:
            raise ConfigError(item, "override must look like block.field=value")
        key, raw = item.split("=", 1)
        parts = key.strip().split(".")
        if len(parts) != 2 or not all(parts):
            raise ConfigError(key, "override key must be block.field")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        block = out.setdefault(parts[0], {})
        if not isinstance(block, dict):
            raise ConfigError(parts[0], "block must be a JSON object")
        block[parts[1]] = value
    return out
