"""Command-line front end: config ingestion, sweeps and CSV emission.

Usage::

    crlhiso <subcommand> [--config PATH] [--set block.field=value]... [--out DIR]
            [--fmin HZ --fmax HZ --points N] [--jobs N]

Every run writes its CSV files plus ``run_manifest.json`` into the output
directory. The manifest holds the fully resolved configuration and can be fed
back through ``--config`` to reproduce the run.

Exit status: 0 on success, 2 for configuration errors, 3 for numerical errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__, coupler, crlh, device, netalg, squid
from .config import SimulationConfig
from .device import db
from .errors import ConfigError, NumericalError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

MANIFEST_NAME = "run_manifest.json"


def fmt(value) -> str:
    """CSV cell formatting: full-precision scientific notation for numbers."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.16e}"
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def grid(block) -> np.ndarray:
    return np.linspace(block.f_min, block.f_max, block.points)


def parallel_map(fn: Callable, items, jobs: int) -> list:
    """Ordered map over ``items``, optionally on a process pool."""
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (4 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


# --- per-point row functions (module level so they pickle) --------------------


def _dispersion_row(cell, f):
    w = 2 * math.pi * f
    pt = crlh.propagation_constant(cell, w)
    z0 = crlh.characteristic_impedance(cell, w)
    return (f, pt.beta_per_cell, pt.alpha_per_cell, z0.real, z0.imag, pt.band)


def _dispersion_compare_row(cell, f):
    w = 2 * math.pi * f
    pt = crlh.propagation_constant(cell, w)
    hom = crlh.homogeneous_beta(cell, w) * cell.p
    return (f, pt.signed_beta_per_cell, hom.real, pt.band)


def _coupling_row(off, on, model, f):
    w = 2 * math.pi * f
    k_off = coupler.coupling_coefficient(off, w, model).k0_per_cell
    k_on = coupler.coupling_coefficient(on, w, model).k0_per_cell
    return (f, k_off, k_on)


def _coupler_row(coupled, n, termination, f):
    w = 2 * math.pi * f
    zc = coupler.termination_impedance(coupled, w, termination)
    cs = coupler.static_coupler_s(coupled, w, n, zc)
    return (f, db(cs.m[0, 0]), db(cs.m[1, 0]), db(cs.gamma), db(cs.upsilon))


def _cascade_point(spec, f):
    return device.total_s_cascade(spec, 2 * math.pi * f)


def _full_point(spec, f):
    return device.total_s_fullnetwork(spec, 2 * math.pi * f)


def _closed_form_row(coupled, n, f):
    w = 2 * math.pi * f
    modes = coupler.c_pi_constants(coupled, w)
    m = coupler.asym_coupler_s_closedform(modes, n * coupled.p)
    return (db(m[0, 0]), db(m[1, 0]))


def _tl_row(cell, cells, z_ref, beta_model, f):
    w = 2 * math.pi * f
    lat = netalg.abcd_to_s(crlh.line_abcd(cell, w, cells), z_ref, f)
    hom = netalg.abcd_to_s(crlh.homogeneous_line_abcd(cell, w, cells, beta_model), z_ref, f)
    return (f, db(lat.s21), db(lat.s11), db(hom.s21), db(hom.s11))


def _isolation_rows(spectrum):
    return [(t.frequency_hz, t.s_db(2, 1), t.s_db(1, 2), t.s_db(1, 1)) for t in spectrum]


# --- subcommands ------------------------------------------------------------
# Each returns the list of files written (names relative to the output dir).


def cmd_dispersion(cfg: SimulationConfig, out: Path, jobs: int) -> list[str]:
    cell = cfg.cell_params()
    freqs = grid(cfg.dispersion)
    rows = parallel_map(partial(_dispersion_row, cell), freqs, jobs)
    write_csv(
        out / "dispersion.csv",
        ["frequency_hz", "beta_rad_per_cell", "alpha_rad_per_cell", "z0_real_ohm", "z0_imag_ohm", "band_label"],
        rows,
    )
    rows = parallel_map(partial(_dispersion_compare_row, cell), freqs, jobs)
    write_csv(
        out / "dispersion_models.csv",
        ["frequency_hz", "lattice_signed_beta_rad_per_cell", "homogeneous_beta_rad_per_cell", "band_label"],
        rows,
    )
    return ["dispersion.csv", "dispersion_models.csv"]


def cmd_coupling(cfg: SimulationConfig, out: Path, jobs: int) -> list[str]:
    off = cfg.coupled_params(L_m=cfg.coupler.L_m_off)
    on = cfg.coupled_params(L_m=cfg.coupler.L_m_on)
    rows = parallel_map(partial(_coupling_row, off, on, cfg.coupler.model), grid(cfg.sweep), jobs)
    write_csv(out / "coupling.csv", ["frequency_hz", "k_off_rad_per_cell", "k_on_rad_per_cell"], rows)
    w = cfg.w_op
    for label, c in (("off", off), ("on", on)):
        modes = coupler.coupling_coefficient(c, w, cfg.coupler.model)
        print(
            f"{label}: K = {modes.k0_per_cell:.6e} rad/cell, "
            f"|K| n_c p - pi/4 = {coupler.three_db_mismatch(modes, cfg.coupler.n_c):+.6e} rad, "
            f"3-dB length = {coupler.three_db_cells(modes):.4f} cells"
        )
    return ["coupling.csv"]


def cmd_coupler(cfg: SimulationConfig, out: Path, jobs: int) -> list[str]:
    fn = partial(_coupler_row, cfg.coupled_params(), cfg.coupler.n_c, cfg.device.termination)
    rows = parallel_map(fn, grid(cfg.sweep), jobs)
    write_csv(out / "coupler.csv", ["frequency_hz", "m_uu_db", "m_du_db", "gamma_db", "upsilon_db"], rows)
    return ["coupler.csv"]


def cmd_squid(cfg: SimulationConfig, out: Path, jobs: int) -> list[str]:
    s = cfg.squid_params()
    coupled = cfg.coupled_params()
    w, p = cfg.w_op, cfg.cell.p
    flux = np.linspace(0.0, 0.5, 501)
    write_csv(out / "squid_lm.csv", ["phi_over_phi0", "l_m_picohenry"], [(x, squid.l_m(s, x) * 1e12) for x in flux])

    window = squid.modulation_window(s, coupled, w, cfg.coupler.L_m_on, cfg.coupler.L_m_off, cfg.coupler.model)
    lms = np.linspace(cfg.coupler.L_m_off, cfg.coupler.L_m_on, 201)
    rows = [
        (lm * 1e12, coupler.coupling_coefficient(coupled.with_mutual(L_m=lm), w, cfg.coupler.model).k0_per_cell)
        for lm in lms
    ]
    write_csv(out / "squid_k.csv", ["l_m_picohenry", "k_rad_per_cell"], rows)

    files = ["squid_lm.csv", "squid_k.csv"]
    for label, phase in (("phi1", cfg.device.phi1), ("phi2", cfg.device.phi2)):
        wf = squid.flux_waveform(
            s, coupled, w, cfg.omega_m, phase, cfg.squid.waveform_samples,
            cfg.coupler.L_m_on, cfg.coupler.L_m_off, cfg.coupler.model,
        )
        rows = [(t * 1e9, x, k * p) for t, x, k in zip(wf.times, wf.flux, wf.k_target)]
        name = f"squid_waveform_{label}.csv"
        write_csv(out / name, ["t_ns", "phi_over_phi0", "k_rad_per_cell"], rows)
        files.append(name)
    print(
        f"I_c = {s.I_c * 1e9:.3f} nA, L_m(0) = {squid.l_m(s, 0.0) * 1e12:.3f} pH, "
        f"phi_on = {window.phi_on:.6f} Phi0, phi_off = {window.phi_off:.6f} Phi0, "
        f"K0 = {window.k0 * p:.6e} rad/cell"
    )
    return files


def _print_metrics(label: str, m: device.IsolationMetrics) -> None:
    print(json.dumps({label: m.as_dict()}, indent=2, sort_keys=True))


def cmd_isolation(cfg: SimulationConfig, out: Path, jobs: int) -> list[str]:
    spec = cfg.device_spec()
    spectrum = parallel_map(partial(_cascade_point, spec), grid(cfg.sweep), jobs)
    write_csv(out / "isolation.csv", ["frequency_hz", "s21_db", "s12_db", "s11_db"], _isolation_rows(spectrum))
    _print_metrics("isolation", device.isolation_metrics(spectrum, cfg.metrics.threshold_db))
    return ["isolation.csv"]


def cmd_circulator(cfg: SimulationConfig, out: Path, jobs: int) -> list[str]:
    spec = cfg.device_spec()
    spectrum = parallel_map(partial(_cascade_point, spec), grid(cfg.sweep), jobs)
    header = ["frequency_hz"] + [f"s{i}{j}_db" for i in range(1, 5) for j in range(1, 5)]
    rows = [[t.frequency_hz] + [t.s_db(i, j) for i in range(1, 5) for j in range(1, 5)] for t in spectrum]
    write_csv(out / "circulator.csv", header, rows)
    tags = spectrum[0].offset_sign
    rows = [(i, j, int(tags[i - 1, j - 1]), tags[i - 1, j - 1] * cfg.squid.f_m) for i in range(1, 5) for j in range(1, 5)]
    write_csv(out / "circulator_offsets.csv", ["out_port", "in_port", "offset_sign", "offset_hz"], rows)
    return ["circulator.csv", "circulator_offsets.csv"]


def cmd_bloch(cfg: SimulationConfig, out: Path, jobs: int) -> list[str]:
    d = cfg.device
    files = []
    for port in (1, 2, 3, 4):
        pts = device.bloch_trajectory(port, d.phi1, d.delta_theta, d.phi2, steps=50)
        name = f"bloch_port{port}.csv"
        write_csv(out / name, ["step_index", "x", "y", "z", "stage_label"], [(p.step, *p.xyz, p.stage) for p in pts])
        files.append(name)
    return files


def cmd_tl_compare(cfg: SimulationConfig, out: Path, jobs: int) -> list[str]:
    fn = partial(_tl_row, cfg.cell_params(), cfg.tl.cells, cfg.tl.z_ref, cfg.tl.beta_model)
    rows = parallel_map(fn, grid(cfg.sweep), jobs)
    write_csv(
        out / "tl_compare.csv",
        ["frequency_hz", "lattice_s21_db", "lattice_s11_db", "homogeneous_s21_db", "homogeneous_s11_db"],
        rows,
    )
    inband = [r for r in rows if 5.5e9 <= r[0] <= 6.5e9]
    if inband:
        print(f"max |S21| difference over 5.5-6.5 GHz: {max(abs(r[1] - r[3]) for r in inband):.6f} dB")
    return ["tl_compare.csv"]


def cmd_asym_compare(cfg: SimulationConfig, out: Path, jobs: int) -> list[str]:
    delta = cfg.coupler.asym_delta_L_R
    freqs = grid(cfg.sweep)
    n = cfg.coupler.n_c
    asym_off = cfg.coupled_params(L_m=cfg.coupler.L_m_off, delta=delta)
    asym_on = cfg.coupled_params(L_m=cfg.coupler.L_m_on, delta=delta)
    off_rows = parallel_map(partial(_closed_form_row, asym_off, n), freqs, jobs)
    on_rows = parallel_map(partial(_closed_form_row, asym_on, n), freqs, jobs)
    write_csv(
        out / "asym_coupler.csv",
        ["frequency_hz", "m_uu_db_off", "m_du_db_off", "m_uu_db_on", "m_du_db_on"],
        [(f, *a, *b) for f, a, b in zip(freqs, off_rows, on_rows)],
    )
    asym = parallel_map(partial(_cascade_point, cfg.device_spec(delta=delta, coupler_model="closed_form")), freqs, jobs)
    sym = parallel_map(partial(_cascade_point, cfg.device_spec(delta=0.0, coupler_model="closed_form")), freqs, jobs)
    write_csv(
        out / "asym_isolation.csv",
        ["frequency_hz", "s21_db_asym", "s12_db_asym", "s21_db_sym", "s12_db_sym"],
        [(a.frequency_hz, a.s_db(2, 1), a.s_db(1, 2), b.s_db(2, 1), b.s_db(1, 2)) for a, b in zip(asym, sym)],
    )
    _print_metrics("asymmetric", device.isolation_metrics(asym, cfg.metrics.threshold_db))
    _print_metrics("symmetric", device.isolation_metrics(sym, cfg.metrics.threshold_db))
    return ["asym_coupler.csv", "asym_isolation.csv"]


def cmd_fullnet_compare(cfg: SimulationConfig, out: Path, jobs: int) -> list[str]:
    spec = cfg.device_spec()
    freqs = grid(cfg.sweep)
    casc = parallel_map(partial(_cascade_point, spec), freqs, jobs)
    full = parallel_map(partial(_full_point, spec), freqs, jobs)
    entries = [(2, 1), (1, 2), (1, 1), (3, 1)]
    header = ["frequency_hz"]
    for tag in ("cascade", "full"):
        header += [f"s{i}{j}_db_{tag}" for i, j in entries]
    rows = [
        [a.frequency_hz] + [a.s_db(i, j) for i, j in entries] + [b.s_db(i, j) for i, j in entries]
        for a, b in zip(casc, full)
    ]
    write_csv(out / "fullnet_compare.csv", header, rows)
    return ["fullnet_compare.csv"]


def cmd_metrics(cfg: SimulationConfig, out: Path, jobs: int) -> list[str]:
    spec = cfg.device_spec()
    spectrum = parallel_map(partial(_cascade_point, spec), grid(cfg.sweep), jobs)
    m = device.isolation_metrics(spectrum, cfg.metrics.threshold_db)
    at_op = device.total_s_cascade(spec, cfg.w_op)
    summary = m.as_dict()
    summary["isolation_at_f_op_db"] = at_op.s_db(2, 1) - at_op.s_db(1, 2)
    summary["s11_at_f_op_db"] = at_op.s_db(1, 1)
    summary["f_op_hz"] = cfg.device.f_op
    text = json.dumps(summary, indent=2, sort_keys=True)
    print(text)
    (out / "metrics.json").write_text(text + "\n", encoding="utf-8")
    return ["metrics.json"]


COMMANDS: dict[str, Callable[[SimulationConfig, Path, int], list[str]]] = {
    "dispersion": cmd_dispersion,
    "coupling": cmd_coupling,
    "coupler": cmd_coupler,
    "squid": cmd_squid,
    "isolation": cmd_isolation,
    "circulator": cmd_circulator,
    "bloch": cmd_bloch,
    "tl-compare": cmd_tl_compare,
    "asym-compare": cmd_asym_compare,
    "fullnet-compare": cmd_fullnet_compare,
    "metrics": cmd_metrics,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crlhiso", description="Modulated CRLH isolator/circulator simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file or a previous run manifest")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="dotted override, repeatable")
        p.add_argument("--out", help="output directory (overrides output.directory)")
        p.add_argument("--fmin", type=float, help="sweep start (Hz)")
        p.add_argument("--fmax", type=float, help="sweep stop (Hz)")
        p.add_argument("--points", type=int, help="number of sweep points")
        p.add_argument("--jobs", type=int, default=0, help="worker processes (0 = one per CPU)")
    return parser


def _resolve_config(args) -> SimulationConfig:
    overrides = list(args.set)
    block = "dispersion" if args.subcommand == "dispersion" else "sweep"
    for flag, key in (("fmin", "f_min"), ("fmax", "f_max"), ("points", "points")):
        value = getattr(args, flag)
        if value is not None:
            overrides.append(f"{block}.{key}={json.dumps(value)}")
    if args.out is not None:
        overrides.append(f"output.directory={json.dumps(args.out)}")
    if args.config:
        return SimulationConfig.load(args.config, overrides)
    return SimulationConfig.default(overrides)


def write_manifest(out: Path, subcommand: str, cfg: SimulationConfig, files: list[str]) -> None:
    manifest = {
        "subcommand": subcommand,
        "package_version": __version__,
        "config": cfg.to_dict(),
        "files": files,
    }
    (out / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def run(subcommand: str, cfg: SimulationConfig, jobs: int = 1) -> list[str]:
    """Execute ``subcommand`` with a resolved config; returns the files written."""
    out = Path(cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    files = COMMANDS[subcommand](cfg, out, jobs)
    write_manifest(out, subcommand, cfg, files)
    return files


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    jobs = args.jobs if args.jobs > 0 else (os.cpu_count() or 1)
    try:
        cfg = _resolve_config(args)
        run(args.subcommand, cfg, jobs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
