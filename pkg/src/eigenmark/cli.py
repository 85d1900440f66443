"""Batch driver: configuration ingestion, experiment orchestration, result
emission.

All configuration comes from a single JSON document (never environment
variables), and given the same config and seed the emitted files are
byte-identical: rows are sorted by cell key regardless of scheduling, JSON
is dumped with sorted keys, and floats are written with repr.  Exit codes:
0 success, 1 property or calibration failure, 2 usage/config error.

Subcommands:
  calibrate   write the (mu, window) calibration cache for (delta, b)
  simulate    one marker evaluation -> JSON + CSV report
  sweep       grid over mu/q/nu/delta -> CSV, optionally parallel
  compare     cost-model table over a (delta, eps) grid -> CSV
  audit       run the full invariant suite; nonzero exit on any failure
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import audit as audit_mod
from . import complexity, marker, pea, spectral
from .statevec import Tally, apply, product_state

SWEEP_COLUMNS = ("variant", "delta", "mu", "window", "q", "nu", "phi", "eta",
                 "worst_residual", "superposition_residual", "N_U", "N_A", "N_P")


class ConfigError(Exception):
    pass


def _load_config(path) -> dict:
    if path is None:
        raise ConfigError("this subcommand requires --config PATH")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    return doc


def _require(doc: dict, key, kind, where="config"):
    if key not in doc:
        raise ConfigError(f"{where} is missing required key {key!r}")
    value = doc[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind):
        raise ConfigError(f"{where}[{key!r}] must be {kind.__name__}, got {type(value).__name__}")
    return value


def _dtype_from(doc: dict):
    name = doc.get("dtype", "complex128")
    table = {"complex128": np.complex128}
    if hasattr(np, "complex256"):
        table["complex256"] = np.complex256
    if name not in table:
        raise ConfigError(f"unknown dtype {name!r}; expected one of {sorted(table)}")
    return table[name]


def _model_from(doc: dict):
    if ("model" in doc) == ("model_path" in doc):
        raise ConfigError("give exactly one of 'model' (inline) or 'model_path'")
    try:
        if "model" in doc:
            return spectral.load_model(_require(doc, "model", dict))
        return spectral.load_model_file(doc["model_path"])
    except (KeyError, ValueError, OSError) as exc:
        raise ConfigError(f"invalid spectral model: {exc}") from exc


def _outdir(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


# --- calibrate ---------------------------------------------------------------

def _cmd_calibrate(args) -> int:
    cfg = _load_config(args.config)
    delta = _require(cfg, "delta", float)
    b = _require(cfg, "b", float)
    out = _outdir(args)
    cache = os.path.join(out, "calibration.json")
    try:
        result = pea.calibrate_workspace(
            delta, b,
            eta_target=float(cfg.get("eta_target", pea.ETA_TARGET_DEFAULT)),
            mu_cap=int(cfg.get("mu_cap", 20)),
            grid_per_bin=int(cfg.get("grid_per_bin", 64)),
            cache_path=cache,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    status = "converged" if result.converged else "FAILED (best shown)"
    print(f"calibration {status}: mu={result.mu} window={result.window} "
          f"eta={result.eta!r} (target {result.eta_target!r}) -> {cache}")
    return 0 if result.converged else 1


# --- simulate ----------------------------------------------------------------

def _resolve_layout(cfg, spec, target):
    if cfg.get("calibrate"):
        calib = pea.calibrate_workspace(spec.delta, target.b,
                                        eta_target=float(cfg.get("eta_target",
                                                                 pea.ETA_TARGET_DEFAULT)))
        if not calib.converged:
            raise ConfigError(
                f"calibration did not reach eta target; best eta={calib.eta!r} at "
                f"mu={calib.mu}")
        return calib.layout()
    mu = int(_require(cfg, "mu", int))
    if "window" in cfg:
        window = int(cfg["window"])
    else:
        window = pea.best_window(mu, spec.delta, target.b).window
    try:
        return pea.WorkspaceLayout(mu, window)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _build_assembly_from(cfg, spec, target, layout):
    variant = _require(cfg, "variant", str)
    q = cfg.get("q")
    nu = cfg.get("nu")
    try:
        return marker.build_assembly(spec, target, layout, variant,
                                     q=None if q is None else int(q),
                                     nu=None if nu is None else int(nu),
                                     q_cap=int(cfg.get("q_cap", 3)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    spec, target = _model_from(cfg)
    layout = _resolve_layout(cfg, spec, target)
    assembly = _build_assembly_from(cfg, spec, target, layout)
    report = marker.evaluate_marker(
        assembly, spec, target,
        n_random=int(cfg.get("n_random", 8)),
        seed=args.seed,
        dtype=_dtype_from(cfg),
    )
    out = _outdir(args)
    marker.write_report_json(report, os.path.join(out, "report.json"))
    marker.write_report_csv(report, os.path.join(out, "report.csv"))
    print(f"simulate: variant={report.variant} mu={report.mu} "
          f"q_or_nu={report.q_or_nu} worst_residual={report.worst_residual!r}")
    return 0


# --- sweep -------------------------------------------------------------------

def _sweep_cells(cfg, seed) -> list[dict]:
    variant = _require(cfg, "variant", str)
    axes = _require(cfg, "grid", dict)
    unknown = set(axes) - {"mu", "q", "nu", "delta"}
    if unknown:
        raise ConfigError(f"unknown sweep axes {sorted(unknown)}")
    synthetic = "worst_case" in cfg
    if synthetic == ("model" in cfg or "model_path" in cfg):
        raise ConfigError("give exactly one of 'worst_case' or a spectral model")
    if "delta" in axes and not synthetic:
        raise ConfigError("a delta axis requires 'worst_case' mode (a fixed model "
                          "pins its own delta)")
    if synthetic:
        wc = cfg["worst_case"]
        b = float(_require(wc, "b", float, "worst_case"))
        phi = float(_require(wc, "phi", float, "worst_case"))
        deltas = [float(d) for d in axes.get("delta", [_require(wc, "delta", float,
                                                                "worst_case")])]
        model_doc = None
    else:
        b = phi = None
        deltas = [None]
        model_doc = cfg.get("model")
        if model_doc is None:
            with open(cfg["model_path"], "r", encoding="utf-8") as fh:
                model_doc = json.load(fh)
    raw_mus = axes.get("mu", [cfg.get("mu")])
    if raw_mus == [None]:
        raise ConfigError("sweep needs 'mu' as an axis or a scalar config key")
    mus = [int(m) for m in raw_mus]
    qs = [None if v is None else int(v) for v in axes.get("q", [cfg.get("q")])]
    nus = [None if v is None else int(v) for v in axes.get("nu", [cfg.get("nu")])]
    cells = []
    for delta in deltas:
        for mu in mus:
            for q in qs:
                for nu in nus:
                    cells.append({
                        "variant": variant, "delta": delta, "mu": mu, "q": q,
                        "nu": nu, "b": b, "phi": phi, "model_doc": model_doc,
                        "n_random": int(cfg.get("n_random", 4)),
                        "dtype": cfg.get("dtype", "complex128"),
                        "seed": seed, "q_cap": int(cfg.get("q_cap", 3)),
                        "grid_per_bin": int(cfg.get("grid_per_bin", 64)),
                    })
    return cells


def _run_cell(cell: dict) -> dict:
    if cell["model_doc"] is not None:
        spec, target = spectral.load_model(cell["model_doc"])
        delta = spec.delta
        window = pea.best_window(cell["mu"], spec.delta, target.b,
                                 cell["grid_per_bin"]).window
    else:
        delta = cell["delta"]
        choice = pea.best_window(cell["mu"], delta, cell["b"], cell["grid_per_bin"])
        window = choice.window
        spec, target = pea.verification_model(delta, cell["b"], choice.lam_marked,
                                              choice.lam_unmarked, phi=cell["phi"])
    layout = pea.WorkspaceLayout(cell["mu"], window)
    shifted = spectral.build_shifted(spec, target)
    eta = pea.measure_eta(pea.build_pea(shifted, layout), spec, target, layout).eta
    assembly = marker.build_assembly(spec, target, layout, cell["variant"],
                                     q=cell["q"], nu=cell["nu"], q_cap=cell["q_cap"])
    dtype = np.complex128 if cell["dtype"] == "complex128" else getattr(np, cell["dtype"])
    report = marker.evaluate_marker(assembly, spec, target,
                                    n_random=cell["n_random"], seed=cell["seed"],
                                    dtype=dtype)
    return {
        "variant": cell["variant"],
        "delta": repr(float(delta)),
        "mu": cell["mu"],
        "window": window,
        "q": "" if cell["q"] is None else cell["q"],
        "nu": "" if cell["nu"] is None else cell["nu"],
        "phi": repr(float(target.phi)),
        "eta": repr(eta),
        "worst_residual": repr(report.worst_residual),
        "superposition_residual": repr(report.superposition_residual),
        "N_U": report.counters.n_u,
        "N_A": report.counters.n_a,
        "N_P": report.counters.n_p,
    }


def _cell_key(row: dict):
    return (row["variant"], row["delta"], row["mu"], str(row["q"]), str(row["nu"]))


def _cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    cells = _sweep_cells(cfg, args.seed)
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_run_cell, cells))
    else:
        rows = [_run_cell(cell) for cell in cells]
    rows.sort(key=_cell_key)
    out = _outdir(args)
    path = os.path.join(out, "sweep.csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    print(f"sweep: {len(rows)} cells -> {path}")
    return 0


# --- compare -----------------------------------------------------------------

def _measured_cell(delta: float, eps: float, b: float, mu_limit: int) -> dict | None:
    calib = pea.calibrate_workspace(delta, b)
    if not calib.converged or calib.mu > mu_limit:
        return None
    eta = min(calib.eta, complexity.ETA_REGIME)
    q = complexity.plan_recursion(eta, eps)
    spec, target = pea.verification_model(delta, b, calib.lam_marked, calib.lam_unmarked)
    layout = calib.layout()
    assembly = marker.build_assembly(spec, target, layout, "fixed_point", q=q)
    tally = Tally()
    state = product_state(spec.basis_column(0), layout.sigma_state())
    apply(assembly.operator, state, "joint", tally)
    counters = complexity.ComplexityCounters.from_tally(tally, assembly.ancillas)
    return {"variant": "fixed_point", "delta": delta, "eps": eps,
            "mu": layout.mu, "q": q, "nu": None,
            "n_u": counters.n_u, "n_a": counters.n_a, "n_p": counters.n_p}


def _cmd_compare(args) -> int:
    cfg = _load_config(args.config)
    delta_grid = [float(d) for d in _require(cfg, "delta_grid", list)]
    eps_grid = [float(e) for e in _require(cfg, "eps_grid", list)]
    measured = []
    for pair in cfg.get("measured_cells", []):
        cell = _measured_cell(float(pair[0]), float(pair[1]),
                              float(cfg.get("b", 0.05)),
                              int(cfg.get("mu_limit", 16)))
        if cell is not None:
            measured.append(cell)
    try:
        rows = complexity.tabulate(delta_grid, eps_grid, measured)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = _outdir(args)
    path = os.path.join(out, "compare.csv")
    complexity.write_table_csv(rows, path)
    print(f"compare: {len(rows)} rows ({len(measured)} measured cells) -> {path}")
    return 0


# --- audit -------------------------------------------------------------------

def _cmd_audit(args) -> int:
    results = audit_mod.run_audit(seed=args.seed)
    text = audit_mod.format_results(results)
    out = _outdir(args)
    with open(os.path.join(out, "audit.txt"), "w", encoding="utf-8") as fh:
        fh.write(text)
    with open(os.path.join(out, "audit.json"), "w", encoding="utf-8") as fh:
        json.dump([{"name": r.name, "ok": bool(r.ok), "detail": r.detail}
                   for r in results], fh, indent=2, sort_keys=True)
        fh.write("\n")
    sys.stdout.write(text)
    return 0 if all(r.ok for r in results) else 1


# --- entry point -------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", default=None,
                        help="JSON configuration document")
    common.add_argument("--out", metavar="DIR", default=".",
                        help="output directory (default: current)")
    common.add_argument("--jobs", metavar="N", type=int, default=1,
                        help="parallel workers for sweep cells")
    common.add_argument("--seed", metavar="N", type=int, default=0,
                        help="random seed for superposition probes")
    parser = argparse.ArgumentParser(
        prog="eigenmark",
        description="eigenstate-marking simulations with exact resource accounting")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("calibrate", parents=[common],
                   help="calibrate the workspace size for (delta, b)").set_defaults(
        func=_cmd_calibrate)
    sub.add_parser("simulate", parents=[common],
                   help="one marker evaluation -> JSON/CSV report").set_defaults(
        func=_cmd_simulate)
    sub.add_parser("sweep", parents=[common],
                   help="grid over mu/q/nu/delta -> CSV").set_defaults(func=_cmd_sweep)
    sub.add_parser("compare", parents=[common],
                   help="cost-model comparison table -> CSV").set_defaults(
        func=_cmd_compare)
    sub.add_parser("audit", parents=[common],
                   help="run the invariant suite").set_defaults(func=_cmd_audit)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already; normalize other codes
        return 0 if exc.code in (0, None) else 2
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
