"""Command-line interface.

Commands: ground | map | bisep | scan | defect | verdict | thermal.
Common flags: --config PATH, --format {csv|json}, --out PATH, --seed N,
--workers N.  Data goes to stdout (or --out); diagnostics to stderr.
Exit codes: 0 success, 2 config error, 3 solver failure.

Output is deterministic for a given config and seed: fixed row order,
%.12e float formatting and LF line endings.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .eigensolvers import SolverError, sectored_ground_state
from .hamiltonians import Arc, SpinSystem, build_hamiltonian
from .operators import ProductBasis, sector_two_m_values, spin_str, total_spin_squared
from .scf import ScfError, biseparable_minimum_detailed, boundary_geometry, boundary_map, biseparable_scan
from .witness import (
    defect_series,
    full_spectrum,
    ground_energy,
    thermal_energy,
    threshold_table,
    threshold_temperature,
    verdict,
)

FLOAT_FMT = "%.12e"


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return FLOAT_FMT % value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    return str(value)


def emit(columns, rows, fmt, out, metadata):
    """Write a table as CSV or JSON with deterministic formatting."""
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(",".join(columns) + "\n")
        for row in rows:
            buf.write(",".join(_fmt(v) for v in row) + "\n")
        text = buf.getvalue()
    else:
        payload = {
            "metadata": metadata,
            "columns": list(columns),
            "rows": [[_marked(v) for v in row] for row in rows],
        }
        text = json.dumps(payload, indent=2, sort_keys=True)
        text = text.replace('"\\u0000', "").replace('\\u0000"', "") + "\n"
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _marked(value):
    # floats carry their %.12e rendering through json.dumps as marked strings
    if isinstance(value, (float, np.floating)):
        return "\x00" + (FLOAT_FMT % value) + "\x00"
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    return str(value)


def _metadata(cfg: RunConfig, seed: int, command: str) -> dict:
    return {"version": __version__, "command": command, "seed": seed,
            "config_hash": cfg.digest()}


def cmd_ground(cfg: RunConfig, seed: int, workers: int):
    system, _ = cfg.build_system()
    res = sectored_ground_state(
        lambda tm: build_hamiltonian(system, tm),
        sector_two_m_values(system.site_two_s),
        seed=seed, use_flip_symmetry=True)
    basis = ProductBasis(system.site_two_s, res.sector_two_m)
    s_sq = total_spin_squared(basis).expectation(res.vector)
    columns = ["e0", "gap", "s_squared", "degenerate"]
    rows = [[res.energy, res.gap, s_sq, bool(res.degenerate)]]
    return columns, rows


def cmd_map(cfg: RunConfig, seed: int, workers: int):
    block = cfg.block("map")
    lengths = block.get("lengths", [3, 4])
    spin = block.get("spin", "1/2")
    n_theta = int(block.get("theta_points", 13))
    moduli = block.get("moduli", [0.5, 0.25, 0.05])
    diffs = block.get("modulus_diffs", [0.0, 0.25, 0.45])
    thetas = np.linspace(0.0, np.pi, n_theta)
    columns = ["n_a", "theta_b", "z_diff_b", "modulus_b",
               "thetabar_a", "z_diff_a", "modulus_a", "modulus_aprime"]
    rows = []
    for n_a in lengths:
        for zb in moduli:
            for dz in diffs:
                m2 = zb - dz
                if m2 < 0:
                    continue  # second modulus would be negative
                for th in thetas:
                    z_b = np.array([0.0, 0.0, zb])
                    z_bp = m2 * np.array([np.sin(th), 0.0, np.cos(th)])
                    pair = boundary_map([spin] * int(n_a), z_b, z_bp, seed=seed)
                    geo = boundary_geometry(pair)
                    rows.append([int(n_a), float(th), float(dz), float(zb),
                                 float(geo.theta), float(geo.modulus_diff),
                                 float(geo.moduli[0]), float(geo.moduli[1])])
    return columns, rows


def cmd_bisep(cfg: RunConfig, seed: int, workers: int):
    system, _ = cfg.build_system()
    block = cfg.block("bisep")
    if "n_a" not in block:
        raise ConfigError("bisep needs bisep.n_a")
    arc = Arc(int(block.get("offset", 1)) - 1, int(block["n_a"]))
    scf_cfg = cfg.scf_config(seed)
    best, branches = biseparable_minimum_detailed(system, arc, scf_cfg)
    columns = ["n_a", "offset", "eta", "e_bs", "z_a", "z_aprime",
               "z_b", "z_bprime", "decoupled", "converged", "residual"]
    rows = [[arc.length, arc.offset + 1, best.eta, best.ebs, best.z_a,
             best.z_aprime, best.z_b, best.z_bprime, bool(best.decoupled),
             bool(best.converged), best.residual]]
    return columns, rows


def cmd_scan(cfg: RunConfig, seed: int, workers: int):
    system, _ = cfg.build_system()
    scf_cfg = cfg.scf_config(seed)
    e0 = ground_energy(system, seed=seed)
    scan = biseparable_scan(system, scf_cfg, workers=workers)
    columns = ["n_a", "offset", "eta", "e_bs", "gap_to_e0", "decoupled",
               "z_a", "z_b", "is_global_min", "warning"]
    rows = []
    for rep in scan.reports:
        if rep.failed:
            rows.append([rep.n_a, rep.offset + 1, 0, np.nan, np.nan, False,
                         np.nan, np.nan, False, rep.message or "failed"])
            continue
        r = rep.result
        rows.append([rep.n_a, rep.offset + 1, r.eta, r.ebs, r.ebs - e0,
                     bool(r.decoupled), r.z_a, r.z_b,
                     bool(rep is scan.argmin), ""])
    return columns, rows


def cmd_defect(cfg: RunConfig, seed: int, workers: int):
    if cfg.model is None:
        raise ConfigError("config needs a 'model' block")
    block = cfg.block("defect_series")
    if "site" not in block or "spins" not in block:
        raise ConfigError("defect command needs defect_series.site and .spins")
    site = int(block["site"]) - 1
    spins = block["spins"]
    labels = block.get("labels")
    if labels and len(labels) != len(spins):
        raise ConfigError("defect_series.labels length mismatch")
    base = cfg.model.get("spin")
    if base is None:
        raise ConfigError("defect command needs a homogeneous model.spin")
    n = cfg.model["N"]
    tables = _defect_tables(base, n, site, spins, labels, seed, workers)
    columns = ["label", "defect_spin", "k", "e0", "ebs_k", "cost"]
    rows = []
    for table, sm in zip(tables, spins):
        for k, e, c in table.entries:
            rows.append([table.label, str(sm), k + 1, table.e0, e, c])
    return columns, rows


def _defect_one(args):
    base, n, site, sm, label, seed = args
    return defect_series(base, n, site, [sm],
                         labels=[label] if label else None, seed=seed)[0]


def _defect_tables(base, n, site, spins, labels, seed, workers):
    jobs = [(base, n, site, sm, labels[i] if labels else None, seed)
            for i, sm in enumerate(spins)]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_defect_one, jobs))
    return [_defect_one(j) for j in jobs]


def cmd_verdict(cfg: RunConfig, seed: int, workers: int):
    system, site_labels = cfg.build_system()
    block = cfg.block("verdict")
    if "energy" not in block:
        raise ConfigError("verdict needs verdict.energy")
    energy = float(block["energy"])
    table = threshold_table(system, site_labels=site_labels, seed=seed)
    scan = biseparable_scan(system, cfg.scf_config(seed), workers=workers)
    v = verdict(energy, table, scan.ebs)
    columns = ["measured_energy", "global_ebs", "multipartite_detected",
               "sites_provably_entangled"]
    sites = ";".join(str(k + 1) for k in sorted(v.sites_provably_entangled))
    rows = [[v.measured_energy, scan.ebs, bool(v.multipartite_detected), sites]]
    return columns, rows


def cmd_thermal(cfg: RunConfig, seed: int, workers: int):
    system, _ = cfg.build_system()
    block = cfg.block("thermal")
    t_min = float(block.get("t_min", 0.0))
    t_max = float(block.get("t_max", 2.0))
    points = int(block.get("points", 21))
    thresholds = [float(x) for x in block.get("thresholds", [])]
    spectrum = full_spectrum(system)
    columns = ["kind", "temperature", "energy"]
    rows = []
    for t in np.linspace(t_min, t_max, points):
        rows.append(["curve", float(t), thermal_energy(spectrum, float(t))])
    for ebs in thresholds:
        try:
            tstar = threshold_temperature(spectrum, ebs)
        except ValueError:
            rows.append(["crossing", np.nan, ebs])
            continue
        rows.append(["crossing", float(tstar), ebs])
    return columns, rows


COMMANDS = {
    "ground": cmd_ground,
    "map": cmd_map,
    "bisep": cmd_bisep,
    "scan": cmd_scan,
    "defect": cmd_defect,
    "verdict": cmd_verdict,
    "thermal": cmd_thermal,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinwitness",
        description="Energy-based multipartite entanglement witnesses for "
                    "Heisenberg spin rings and chains")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="YAML run config")
    parser.add_argument("--format", choices=["csv", "json"], default="csv")
    parser.add_argument("--out", default=None, help="output path (default: stdout)")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--workers", type=int, default=None,
                        help="parallel workers for scans (default: cpu count)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        seed = args.seed if args.seed is not None else cfg.seed
        workers = args.workers if args.workers is not None else (os.cpu_count() or 1)
        columns, rows = COMMANDS[args.command](cfg, seed, workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (SolverError, ScfError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    emit(columns, rows, args.format, args.out,
         _metadata(cfg, seed, args.command))
    return 0


if __name__ == "__main__":
    sys.exit(main())
