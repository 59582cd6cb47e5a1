"""Command-line interface: ``cwrm fit | simulate | evaluate | sweep``.

Exit codes: 0 success, 2 unreadable or malformed input, 3 invalid data or
settings, 4 every random start failed.
"""

from __future__ import annotations

import argparse
import dataclasses
import itertools
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import datagen, oracle
from .baselines import fit_trimmed_mixreg
from .constraints import WeightedValues, optimal_threshold, truncation_objective
from .core import AllStartsFailedError, CWRMError, Dataset, FitConfig
from .em import fit, worker_count
from .evaluation import evaluate
from .report import (CsvFormatError, ReportFormatError, RunReport, dataset_to_csv, read_csv,
                     rows_to_csv, table_to_csv)

EXIT_PARSE, EXIT_INVALID, EXIT_FAILED = 2, 3, 4
METHODS = {"cwrm": fit, "mixreg": fit_trimmed_mixreg}


class _InputError(Exception):
    """Unreadable input; maps to exit code 2."""


def run_fit(data: Dataset, config: FitConfig, method: str = "cwrm") -> RunReport:
    """Fit `data` and package the result as a `RunReport`."""
    t0 = time.perf_counter()
    result = METHODS[method](data, config)
    return RunReport.from_fit(method, config, result, wall_time=time.perf_counter() - t0)


# --------------------------------------------------------------------------
# argument helpers

def _write(text: str, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _read_data(args):
    try:
        return read_csv(args.input, header=not args.no_header, response=args.response)[0]
    except OSError as exc:
        raise _InputError(f"cannot read {args.input}: {exc.strerror}") from None


def _threads() -> int:
    env = os.environ.get("CWRM_THREADS", "").strip()
    if env.isdigit() and int(env) >= 1:
        return int(env)
    return os.cpu_count() or 1


def _config(args, **override) -> FitConfig:
    cfg = FitConfig(G=args.groups, alpha=args.alpha, c_x=args.cx, c_eps=args.ceps,
                    n_starts=args.starts, max_iter=args.max_iter, rel_tol=args.tol,
                    seed=args.seed, workers=_threads())
    return dataclasses.replace(cfg, **override)


def _floats(text: str):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _data_flags(p):
    p.add_argument("input", help="CSV file, one row per observation")
    p.add_argument("--response", default=None,
                   help="response column name or 0-based index (default: last)")
    p.add_argument("--no-header", action="store_true", help="the CSV has no header row")


def _fit_flags(p, grid=False):
    num = _floats if grid else float
    p.add_argument("--groups", type=int, default=2, help="number of components G")
    p.add_argument("--alpha", type=num, default=[0.1] if grid else 0.1,
                   help="trimming level" + (" (comma list)" if grid else ""))
    p.add_argument("--cx", type=num, default=[20.0] if grid else 20.0,
                   help="eigenvalue ratio bound for covariate scatters")
    p.add_argument("--ceps", type=num, default=[20.0] if grid else 20.0,
                   help="ratio bound for regression error variances")
    p.add_argument("--method", choices=sorted(METHODS), default="cwrm")
    p.add_argument("--starts", type=int, default=64, help="random starts")
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-8, help="relative objective tolerance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output path (default: stdout)")


# --------------------------------------------------------------------------
# commands

def cmd_fit(args) -> int:
    data = _read_data(args)
    report = run_fit(data, _config(args), args.method)
    _write(report.to_json(), args.out)
    rows = args.rows
    if rows is None:
        base = Path(args.out) if args.out not in (None, "-") else Path(args.input)
        rows = base.with_name(base.stem + "_rows.csv")
    _write(rows_to_csv(report), rows)
    return 0


def cmd_simulate(args) -> int:
    if args.spec:
        try:
            spec = datagen.ScenarioSpec.from_dict(json.loads(Path(args.spec).read_text()))
        except (OSError, json.JSONDecodeError, TypeError, KeyError) as exc:
            raise _InputError(f"cannot load scenario {args.spec}: {exc}") from None
    else:
        spec = datagen.preset(args.preset)
    data = datagen.simulate(spec, seed=args.seed)
    _write(dataset_to_csv(data, header=not args.no_header), args.out)
    return 0


def _truth(args):
    if args.preset:
        return datagen.true_params(datagen.preset(args.preset))
    if args.spec:
        try:
            spec = datagen.ScenarioSpec.from_dict(json.loads(Path(args.spec).read_text()))
        except (OSError, json.JSONDecodeError, TypeError, KeyError) as exc:
            raise _InputError(f"cannot load scenario {args.spec}: {exc}") from None
        return datagen.true_params(spec)
    return None


def cmd_evaluate(args) -> int:
    data = _read_data(args)
    if data.true_labels is None:
        raise CWRMError("the data file has no true_label column")
    try:
        report = RunReport.from_json(Path(args.report).read_text(encoding="utf-8"))
    except OSError as exc:
        raise _InputError(f"cannot read {args.report}: {exc.strerror}") from None
    metrics = evaluate(data.true_labels, report.labels, report.model_params(), _truth(args))
    _write(json.dumps(metrics.to_dict(), indent=2) + "\n", args.out)
    return 0


def _sweep_cell(data, base, method, cell):
    alpha, cx, ceps = cell
    cfg = dataclasses.replace(base, alpha=alpha, c_x=cx, c_eps=ceps, workers=1)
    row = {"alpha": alpha, "c_x": cx, "c_eps": ceps}
    try:
        rep = run_fit(data, cfg, method)
    except AllStartsFailedError:
        return {**row, "objective": "", "retained": "", "n_iter": "", "converged": "",
                "status": "all_starts_failed"}
    row.update(objective=repr(rep.objective), retained=rep.retained, n_iter=rep.n_iter,
               converged=int(rep.converged), status="ok")
    if data.true_labels is not None:
        m = evaluate(data.true_labels, rep.labels)
        row.update(recall=m.recall, false_trim_rate=m.false_trim_rate,
                   class_error=m.class_error)
    return row


def cmd_sweep(args) -> int:
    data = _read_data(args)
    base = _config(args, alpha=args.alpha[0], c_x=args.cx[0], c_eps=args.ceps[0])
    cells = list(itertools.product(args.alpha, args.cx, args.ceps))
    for a, cx, ce in cells:
        dataclasses.replace(base, alpha=a, c_x=cx, c_eps=ce).check()
    run = lambda cell: _sweep_cell(data, base, args.method, cell)  # noqa: E731
    workers = min(worker_count(base), len(cells))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run, cells))  # map keeps grid order
    else:
        rows = [run(c) for c in cells]
    cols = ["alpha", "c_x", "c_eps", "objective", "retained", "n_iter", "converged", "status"]
    if data.true_labels is not None:
        cols += ["recall", "false_trim_rate", "class_error"]
    _write(table_to_csv(rows, cols), args.out)
    return 0


def cmd_oracle(args) -> int:
    if args.kind == "threshold":
        wv = WeightedValues(args.values, args.weights or [1.0] * len(args.values), args.c)
        m = optimal_threshold(wv)
        g = oracle.grid_threshold(wv, args.grid)
        out = {"grid_objective": g.objective, "grid_m": g.argument,
               "solver_objective": float(truncation_objective(wv, m)), "solver_m": m}
    else:
        data = _read_data(args)
        fn = oracle.exhaustive_trimmed_cwm_g1 if args.kind == "cwm" else oracle.exhaustive_lts
        r = fn(data, args.alpha)
        out = {"objective": r.objective, "retained": list(r.argument)}
    _write(json.dumps(out, indent=2) + "\n", args.out)
    return 0


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cwrm", description="Robust clustering of linear regressions with "
        "trimming and scatter-ratio constraints.")
    sub = parser.add_subparsers(dest="command", required=True,
                                metavar="{fit,simulate,evaluate,sweep}")

    p = sub.add_parser("fit", help="fit one model and write a JSON report")
    _data_flags(p)
    _fit_flags(p)
    p.add_argument("--rows", default=None,
                   help="per-row CSV path (default: <out or input stem>_rows.csv)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", help="write a simulated data set as CSV")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=sorted(datagen.PRESETS))
    src.add_argument("--spec", help="JSON scenario file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--no-header", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("evaluate", help="score a report against true labels")
    _data_flags(p)
    p.add_argument("report", help="JSON report written by `fit`")
    truth = p.add_mutually_exclusive_group()
    truth.add_argument("--preset", choices=sorted(datagen.PRESETS),
                       help="compare parameters with this preset's generating values")
    truth.add_argument("--spec", help="JSON scenario file with generating values")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="fit over a grid of alpha x cx x ceps")
    _data_flags(p)
    _fit_flags(p, grid=True)
    p.set_defaults(func=cmd_sweep)

    # debugging aid, deliberately left out of the help listing
    p = sub.add_parser("oracle")
    p.add_argument("kind", choices=["cwm", "lts", "threshold"])
    p.add_argument("input", nargs="?")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--response", default=None)
    p.add_argument("--no-header", action="store_true")
    p.add_argument("--values", type=_floats)
    p.add_argument("--weights", type=_floats)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--grid", type=int, default=100_000)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "oracle" and (args.input is None) == (args.kind != "threshold"):
        parser.error("oracle cwm/lts need an input file; threshold needs --values")
    if args.command == "oracle" and args.kind == "threshold" and not args.values:
        parser.error("oracle threshold needs --values")
    try:
        return args.func(args)
    except (_InputError, CsvFormatError, ReportFormatError) as exc:
        print(f"cwrm: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except AllStartsFailedError as exc:
        print(f"cwrm: error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except CWRMError as exc:
        print(f"cwrm: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
