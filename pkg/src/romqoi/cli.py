"""Command-line driver for the Burgers reduced-model experiments.

Subcommands share one output directory and pass artifacts through it::

    run-fom     fom_trajectory.txt, adjoint_trajectory.txt, qoi.txt
    build-rom   pod_modes.txt, nonlinear_modes.txt, deim_indices.txt, deim_cond.txt
    estimate    estimate.csv, dwr.txt (uses adaptive_indices.txt if rom.adaptive)
    adapt-deim  adaptive_indices.txt, adapt_deim.csv
    sweep       sweep.csv

Exit codes: 0 success, 2 configuration error, 3 solver failure,
4 missing artifact.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import io
from .adjoint import AdjointTrajectory, full_adjoint, qoi_eval
from .config import ExperimentConfig, config_to_text, load_config
from .deim import adaptive_deim_indices, deim_indices
from .errors import (
    ConfigError,
    ConvergenceError,
    InvalidArgumentError,
    LinearSolveError,
    MissingArtifactError,
    SelectionError,
)
from .estimation import dwr_basis
from .experiments import BurgersStudy
from .model import Trajectory, integrate
from .pod import energy_dimension

__all__ = ["main", "build_parser", "CSV_COLUMNS"]

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_MISSING = 0, 2, 3, 4
CSV_COLUMNS = io.ERROR_REPORT_COLUMNS + ("status",)

FOM_FILE = "fom_trajectory.txt"
ADJ_FILE = "adjoint_trajectory.txt"
POD_FILE = "pod_modes.txt"
NL_FILE = "nonlinear_modes.txt"
IDX_FILE = "deim_indices.txt"
DWR_FILE = "dwr.txt"
ADAPTIVE_IDX_FILE = "adaptive_indices.txt"


def _setup(args) -> tuple[ExperimentConfig, Path]:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    updates = {}
    if args.seed is not None:
        updates["run.seed"] = args.seed
    if args.scheme is not None:
        updates["time.scheme"] = args.scheme
    if updates:
        cfg = cfg.with_updates(**updates)
    out = Path(args.out if args.out is not None else cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config_used.txt").write_text(config_to_text(cfg))
    return cfg, out


def _load_training_run(study: BurgersStudy, out: Path):
    X = io.read_matrix(out / FOM_FILE)
    L = io.read_matrix(out / ADJ_FILE)
    fom = Trajectory(X, study.grid)
    study.use_training_run(fom, AdjointTrajectory(L, study.scheme))


def _stored_rom(study: BurgersStudy, out: Path, mu=None, adaptive: bool = False):
    U = io.read_matrix(out / POD_FILE)
    V = io.read_matrix(out / NL_FILE)
    idx = io.read_indices(out / (ADAPTIVE_IDX_FILE if adaptive else IDX_FILE))
    return U, V, study.rom_from_arrays(U, V, idx, mu)


def cmd_run_fom(args) -> int:
    cfg, out = _setup(args)
    study = BurgersStudy(cfg)
    fom = integrate(study.train_model, study.x0, study.grid, study.scheme, study.settings)
    adj = full_adjoint(study.train_model, fom, study.q, study.grid.h, study.scheme)
    q = qoi_eval(study.q, fom)
    io.write_matrix(out / FOM_FILE, fom.states)
    io.write_matrix(out / ADJ_FILE, adj.multipliers)
    (out / "qoi.txt").write_text(io.format_float(q) + "\n")
    print(f"Q = {io.format_float(q)}")
    return EXIT_OK


def cmd_build_rom(args) -> int:
    cfg, out = _setup(args)
    study = BurgersStudy(cfg)
    _load_training_run(study, out)
    off = study.offline
    k = study.pod_dim()
    m = cfg.rom.deim_points
    ncols = off.state_basis.k
    if k > ncols:
        raise ConfigError(f"rom.pod_dim = {k} exceeds the {ncols} available snapshot modes")
    if m > off.nonlinear_basis.k:
        raise ConfigError(f"rom.deim_points = {m} exceeds the {off.nonlinear_basis.k} nonlinear modes")
    V = study.nonlinear_modes(m)
    idx = deim_indices(V)
    rom = study.rom_with_indices(k, m, idx)
    io.write_matrix(out / POD_FILE, rom.U)
    io.write_matrix(out / NL_FILE, V)
    io.write_indices(out / IDX_FILE, idx)
    (out / "deim_cond.txt").write_text(io.format_float(rom.deim.condition_number) + "\n")
    gamma_k = energy_dimension(off.state_basis.singular_values, 0.99)
    print(f"k = {k} (0.99 energy needs {gamma_k}), m = {m}, cond(P^T V) = {rom.deim.condition_number:.6g}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    cfg, out = _setup(args)
    study = BurgersStudy(cfg)
    mu = cfg.eval_viscosity
    adaptive = cfg.rom.adaptive
    U, V, rom = _stored_rom(study, out, mu, adaptive)
    alpha = cfg.rom.alpha if adaptive else None
    row = study.evaluate_row(lambda: rom, rom.k, rom.m, alpha, mu, with_dwr=True)
    io.write_csv(out / "estimate.csv", [row], CSV_COLUMNS)
    if row["status"] == "ok":
        io.write_matrix(out / DWR_FILE, study.last_evaluation.dwr.matrix_form)
    print(f"true error = {io.format_float(row['true_error'])}, "
          f"estimate = {io.format_float(row['estimated_error'])}, ratio = {row['ratio']:.6g}")
    return EXIT_OK if row["status"] == "ok" else EXIT_SOLVER


def cmd_adapt_deim(args) -> int:
    cfg, out = _setup(args)
    study = BurgersStudy(cfg)
    mu = cfg.eval_viscosity
    U, V, std = _stored_rom(study, out, mu)
    Z = io.read_matrix(out / DWR_FILE)
    k, m = U.shape[1], V.shape[1]
    W = dwr_basis(Z, min(cfg.rom.dwr_modes, m, min(Z.shape)))
    alphas = [a for a in cfg.sweep.alphas if a is not None] or [cfg.rom.alpha]
    if cfg.rom.alpha not in alphas:
        alphas.append(cfg.rom.alpha)
    rows = [study.evaluate_row(lambda: std, k, m, None, mu)]
    chosen = None
    for a in alphas:
        idx = None
        try:
            idx = adaptive_deim_indices(V, W, a, cfg.rom.normalize_residuals)
        except SelectionError:
            pass
        if a == cfg.rom.alpha:
            chosen = idx
        build = (lambda i=idx: study.rom_from_arrays(U, V, i, mu)) if idx is not None else _raise_selection
        rows.append(study.evaluate_row(build, k, m, a, mu))
    io.write_csv(out / "adapt_deim.csv", rows, CSV_COLUMNS)
    if chosen is None:
        raise SelectionError(f"adaptive selection failed for alpha = {cfg.rom.alpha}")
    io.write_indices(out / ADAPTIVE_IDX_FILE, chosen)
    for r in rows:
        print(f"alpha = {r['alpha']}: |true error| = {abs(r['true_error']):.6g}, cond = {r['cond_PtV']:.6g}")
    return EXIT_OK


def _raise_selection():
    raise SelectionError("adaptive selection failed")


def cmd_sweep(args) -> int:
    cfg, out = _setup(args)
    study = BurgersStudy(cfg)
    sc = cfg.sweep
    expected = len(sc.pod_dims) * len(sc.deim_points) * len(sc.alphas) * len(sc.viscosities)
    with io.CsvAppender(out / "sweep.csv", CSV_COLUMNS) as sink:
        rows = study.sweep(emit=sink.write)
    failed = sum(r["status"] != "ok" for r in rows)
    print(f"{len(rows)} of {expected} rows written, {failed} failed")
    return EXIT_OK


COMMANDS = {
    "run-fom": (cmd_run_fom, "full-model trajectory, adjoint and QoI"),
    "build-rom": (cmd_build_rom, "POD basis, nonlinear basis and DEIM indices"),
    "estimate": (cmd_estimate, "true error and fast error estimate"),
    "adapt-deim": (cmd_adapt_deim, "DWR-driven DEIM indices for each alpha"),
    "sweep": (cmd_sweep, "error table over k x m x alpha x mu"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="romqoi", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (fn, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", metavar="PATH", help="flat section.key = value file")
        p.add_argument("--out", metavar="DIR", help="output directory (default: output.dir)")
        p.add_argument("--seed", type=int, metavar="N", help="overrides run.seed")
        p.add_argument("--scheme", choices=("explicit", "implicit"), help="overrides time.scheme")
        p.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MissingArtifactError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_MISSING
    except (ConfigError, InvalidArgumentError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, LinearSolveError, SelectionError, FloatingPointError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
