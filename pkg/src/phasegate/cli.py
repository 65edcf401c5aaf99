"""Command-line scenario runner.

    phasegate run CONFIG [--out DIR] [--seed N] [--samples N] [--threads N]
    phasegate preset {fig2,fig3,fig4,fig5,fig6} [same options]

Each scenario writes ``<name>.csv`` and ``<name>.json`` into the output
directory (``--out``, else $PHASEGATE_OUT, else ./phasegate-out).
Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from importlib import resources
from pathlib import Path as FilePath

import numpy as np

from . import __version__
from .config import Scenario, expand_values, gate_setup, load_scenarios, parse_scenarios, trajectory_setup
from .dynamics import check_cyclic, propagate_closed_form, zero_force
from .errors import InvalidInputError, NumericalError
from .gate import MODES, SWEEP_COLUMNS, A, P, SpinCombo, run_gate, sweep_row
from .phases import ledger
from .thermal import (DEFAULT_SAMPLES, cumulant_fidelity, monte_carlo_fidelity, nbar_for_exposure,
                      noisy_labels)

log = logging.getLogger("phasegate")

OUT_ENV = "PHASEGATE_OUT"
DEFAULT_OUT = "phasegate-out"
PRESETS = ("fig2", "fig3", "fig4", "fig5", "fig6")
EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3

MC_COLUMNS = ("nbar", "gamma_nbar_T", "mean_F", "std_error", "n_samples", "seed")
CUMULANT_COLUMNS = ("nbar", "gamma_nbar_T", "F_cumulant", "F_cumulant_unlinearized")
TRAJECTORY_COLUMNS = ("t_us", "force", "re_z", "im_z")
LABELS = [(m, c) for c in (P, A) for m in MODES]


def _label_name(mode: str, combo: SpinCombo) -> str:
    return f"z{'p' if mode == '+' else 'm'}_{combo.ascii}"


GATE_COLUMNS = ("t_us", "force") + tuple(f"{part}_{_label_name(m, c)}" for m, c in LABELS for part in ("re", "im"))
PATH_COLUMNS = ("gamma_nbar_T", "realization") + GATE_COLUMNS[:1] + GATE_COLUMNS[2:]
ORACLE_COLUMNS = ("t_us", "max_abs_error")


# --------------------------------------------------------------------------
# output helpers


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def _check_finite(name: str, rows, columns) -> None:
    for row in rows:
        for col in columns:
            v = row[col]
            if isinstance(v, (float, np.floating)) and not math.isfinite(v):
                raise NumericalError(f"scenario {name}: non-finite value in column {col}")


def write_csv(path: FilePath, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in columns])


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def write_json(path: FilePath, payload: dict) -> None:
    # json writes floats with repr, which round-trips doubles exactly
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


# --------------------------------------------------------------------------
# scenario runners: each returns (columns, rows, summary) plus extra files


def _run_trajectory(sc: Scenario, opts) -> dict:
    force, params, grid = trajectory_setup(sc)
    z0 = complex(*sc.get("z0", (0.0, 0.0)))
    path = propagate_closed_form(z0, force, params, grid)
    pinned = propagate_closed_form(0j, zero_force(params.duration), params, grid)
    led = ledger(path, pinned, params)
    f = force(grid.t)
    rows = [{"t_us": t, "force": fv, "re_z": z.real, "im_z": z.imag} for t, fv, z in zip(grid.t, f, path.z)]
    summary = dict(led.as_dict(), closure_residual=check_cyclic(path).residual,
                   final_re=path.final.real, final_im=path.final.imag,
                   omega=params.omega, gamma=params.gamma, duration_us=params.duration,
                   force=force.describe())
    return {"csv": [(sc.name, TRAJECTORY_COLUMNS, rows)], "summary": summary}


def _gate_rows(outcome) -> list[dict]:
    grid = outcome.config.grid
    f = outcome.config.drive(grid.t)
    rows = []
    for k, t in enumerate(grid.t):
        row = {"t_us": t, "force": f[k]}
        for m, c in LABELS:
            z = outcome.paths[(m, c)].z[k]
            row[f"re_{_label_name(m, c)}"] = z.real
            row[f"im_{_label_name(m, c)}"] = z.imag
        rows.append(row)
    return rows


def _config_summary(cfg) -> dict:
    return {"omega": cfg.omega, "omega_plus": cfg.omega_plus, "gamma": cfg.gamma,
            "gamma_over_omega": cfg.gamma / cfg.omega, "duration_us": cfg.duration,
            "nbar": cfg.nbar, "n_steps": cfg.n_steps, "target_phase": cfg.target_phase,
            "mass_scale": cfg.mass_scale}


def _run_gate(sc: Scenario, opts) -> dict:
    cfg = gate_setup(sc)
    out = run_gate(cfg)
    summary = dict(out.summary(), **_config_summary(cfg), compensate=bool(sc.get("compensate", True)),
                   force=cfg.drive.describe())
    return {"csv": [(sc.name, GATE_COLUMNS, _gate_rows(out))], "summary": summary}


def _run_sweep(sc: Scenario, opts) -> dict:
    key = "gamma_over_omega" if sc.kind == "sweep-gamma" else "duration_us"
    rows = []
    for v in expand_values(sc.data[key]):
        cfg = gate_setup(sc, **({"gamma_over_omega": v} if key == "gamma_over_omega" else {"duration": v}))
        rows.append(sweep_row(cfg))
    rows.sort(key=lambda r: (r["gamma_over_omega"], r["T_us"]))
    return {"csv": [(sc.name, SWEEP_COLUMNS, rows)],
            "summary": {"rows": rows, "compensate": bool(sc.get("compensate", True)), "sweep": key}}


def _thermal_points(sc: Scenario):
    base = gate_setup(sc, nbar=0.0)
    for x in expand_values(sc.data["gamma_nbar_T"]):
        nbar = nbar_for_exposure(x, base) if x > 0 else 0.0
        yield x, base.replace(nbar=nbar)


def _run_mc(sc: Scenario, opts) -> dict:
    seed = opts.seed if opts.seed is not None else int(sc.get("seed", 0))
    n = opts.samples if opts.samples is not None else int(sc.get("n_samples", DEFAULT_SAMPLES))
    if n < 2:
        raise InvalidInputError("--samples must be at least 2")
    rows, path_rows = [], []
    n_paths = int(sc.get("save_paths", 0))
    for x, cfg in _thermal_points(sc):
        est = monte_carlo_fidelity(cfg, n, seed, opts.threads)
        rows.append({"nbar": cfg.nbar, "gamma_nbar_T": x, "mean_F": est.mean,
                     "std_error": est.std_error, "n_samples": est.n_samples, "seed": est.seed})
        if n_paths:
            outcome = run_gate(cfg)
            for i in range(n_paths):
                labels = noisy_labels(cfg, seed, i, outcome)
                for k, t in enumerate(cfg.grid.t):
                    row = {"gamma_nbar_T": x, "realization": i, "t_us": t}
                    for m, c in LABELS:
                        z = labels[(m, c)][k]
                        row[f"re_{_label_name(m, c)}"] = z.real
                        row[f"im_{_label_name(m, c)}"] = z.imag
                    path_rows.append(row)
    csvs = [(sc.name, MC_COLUMNS, rows)]
    if n_paths:
        csvs.append((f"{sc.name}_paths", PATH_COLUMNS, path_rows))
    return {"csv": csvs, "summary": {"rows": rows, "seed": seed, "n_samples": n}}


def _run_cumulant(sc: Scenario, opts) -> dict:
    rows = []
    for x, cfg in _thermal_points(sc):
        out = run_gate(cfg)
        rows.append({"nbar": cfg.nbar, "gamma_nbar_T": x,
                     "F_cumulant": cumulant_fidelity(cfg, True, out),
                     "F_cumulant_unlinearized": cumulant_fidelity(cfg, False, out)})
    return {"csv": [(sc.name, CUMULANT_COLUMNS, rows)], "summary": {"rows": rows}}


def _run_oracle(sc: Scenario, opts) -> dict:
    from .oracle import solve_two_mode_gate, trace_distance

    cfg = gate_setup(sc)
    out = run_gate(cfg)
    orc = solve_two_mode_gate(cfg)
    err = np.max([np.abs(orc.expect_a[k] - out.paths[k].z) for k in orc.expect_a], axis=0)
    rows = [{"t_us": t, "max_abs_error": e} for t, e in zip(cfg.grid.t, err)]
    summary = dict(_config_summary(cfg), n_max=orc.n_max, max_expect_error=float(err.max()),
                   trace_distance=trace_distance(orc.spin_state(), out.spin_state()),
                   fidelity_oracle=orc.fidelity(), fidelity_oracle_spin=orc.fidelity(False),
                   fidelity=out.fidelity, fidelity_bound=out.fidelity_bound, Gamma=out.Gamma)
    return {"csv": [(sc.name, ORACLE_COLUMNS, rows)], "summary": summary}


RUNNERS = {"trajectory": _run_trajectory, "gate": _run_gate, "sweep-gamma": _run_sweep,
           "sweep-T": _run_sweep, "thermal-mc": _run_mc, "cumulant": _run_cumulant,
           "oracle-check": _run_oracle}


def run_scenarios(scenarios, out_dir, opts) -> list[FilePath]:
    out_dir = FilePath(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for sc in scenarios:
        log.info("running %s (%s)", sc.name, sc.kind)
        result = RUNNERS[sc.kind](sc, opts)
        for name, columns, rows in result["csv"]:
            _check_finite(name, rows, columns)
            path = out_dir / f"{name}.csv"
            write_csv(path, columns, rows)
            written.append(path)
        path = out_dir / f"{sc.name}.json"
        write_json(path, {"name": sc.name, "kind": sc.kind, "config": sc.data,
                          "version": __version__, "results": result["summary"]})
        written.append(path)
    return written


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise InvalidInputError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return resources.files("phasegate").joinpath("presets", f"{name}.yaml").read_text()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help=f"output directory (default: ${OUT_ENV} or ./{DEFAULT_OUT})")
    common.add_argument("--seed", type=int, help="override the Monte Carlo seed")
    common.add_argument("--samples", type=int, help="override the number of Monte Carlo realizations")
    common.add_argument("--threads", type=int, default=1, help="worker threads for realizations")
    common.add_argument("-v", "--verbose", action="store_true")
    p = argparse.ArgumentParser(prog="phasegate", description="Dissipative geometric phase gate scenarios")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", parents=[common], help="run a scenario config file")
    r.add_argument("config")
    q = sub.add_parser("preset", parents=[common], help="run a built-in figure preset")
    q.add_argument("name", choices=PRESETS)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out_dir = args.out or os.environ.get(OUT_ENV) or DEFAULT_OUT
    try:
        if args.threads < 1:
            raise InvalidInputError("--threads must be positive")
        if args.seed is not None and args.seed < 0:
            raise InvalidInputError("--seed must be non-negative")
        if args.command == "run":
            scenarios = load_scenarios(args.config)
        else:
            scenarios = parse_scenarios(preset_text(args.name))
        written = run_scenarios(scenarios, out_dir, args)
    except InvalidInputError as exc:
        print(f"phasegate: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericalError, FloatingPointError) as exc:
        print(f"phasegate: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
