"""Command line interface: ``bound``, ``simulate`` and ``report``.

Exit codes: 0 success, 2 input or validation error, 3 calibration failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import sys
from dataclasses import asdict

from .bounds import LEGAL, MethodSpec, check_method, compute_bound
from .exceptions import CalibrationFailure
from .io import InputError, format_rows, read_predictions
from .measures import MeasureKind, plugin_estimates
from .resample import DEFAULT_B, bootstrap_performance, draw_resamples
from .selection import SelectionRule, final_select
from .simlab.data import ScenarioAConfig
from .simlab.experiment import RunRecord, SimulationConfig, aggregate, liberal_threshold, run_experiment

SCHEMA = "mabt.bound-report/1"
EXIT_OK, EXIT_INPUT, EXIT_CALIBRATION = 0, 2, 3

SIM_KEYS = {
    "measure": str, "methods": "list", "rules": "list", "validation": str, "runs": int,
    "seed": int, "alpha": float, "b": int, "grid_size": int, "cv_folds": int, "refit_lambda": str,
}
SCENARIO_KEYS = {
    "n_total": int, "p": int, "n_nonzero": int, "signal": float, "fractions": "floats",
    "ground_truth_n": int,
}
RECORD_COLUMNS = ["experiment", *RunRecord.columns()]


def _emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _default_methods(kind, m):
    names = LEGAL[kind]
    if m == 1:
        return [n for n in names if n != "mabt"]
    return ["mabt", *(f"{n}+sidak" for n in names if n != "mabt")]


def cmd_bound(args):
    kind = MeasureKind.parse(args.measure)
    if not 0 < args.alpha < 0.5:
        raise InputError(f"--alpha must lie in (0, 0.5), got {args.alpha}")
    B = args.B or DEFAULT_B[kind]
    if B < 100:
        raise InputError("--B must be at least 100")
    table = read_predictions(args.input, kind)
    rule = SelectionRule.parse(args.rule) if args.rule else None
    if rule is not None and rule.name == "single-best" and table.m != 1:
        raise InputError(f"rule single-best implies one model column, found {table.m}")
    methods = args.methods.split(",") if args.methods else _default_methods(kind, table.m)
    specs = [MethodSpec.parse(m) for m in methods]
    for spec in specs:
        check_method(spec, kind, table.m)

    estimates = plugin_estimates(table, kind)
    s = final_select(estimates)
    ensemble = None
    if any(spec.name in ("mabt", "bt") for spec in specs):
        plan = draw_resamples(table.n, B, args.seed, args.threads)
        ensemble = bootstrap_performance(table, kind, plan, args.threads)
    reports = [compute_bound(spec, table, kind, s, args.alpha, ensemble) for spec in specs]

    doc = {
        "schema": SCHEMA,
        "request": {
            "input": args.input, "measure": kind.value, "methods": [str(sp) for sp in specs],
            "rule": str(rule) if rule else None, "alpha": args.alpha, "B": B, "seed": args.seed,
        },
        "n": table.n,
        "m": table.m,
        "selected": table.model_ids[s],
        "estimates": dict(zip(table.model_ids, map(float, estimates))),
        "bounds": [r.to_dict() for r in reports],
    }
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    if args.csv:
        _emit(format_rows(list(reports[0].to_dict()), [r.to_dict() for r in reports]), args.csv)
    return EXIT_OK


def _convert(key, raw, kind):
    raw = raw.strip()
    try:
        if kind == "list":
            return tuple(x.strip() for x in raw.split(",") if x.strip())
        if kind == "floats":
            return tuple(float(x) for x in raw.split(","))
        return kind(raw)
    except ValueError:
        raise InputError(f"config key {key!r}: cannot parse {raw!r}") from None


def parse_sim_config(text):
    """Parse INI-style simulation configs; one section per experiment.

    Keys in ``[DEFAULT]`` apply to every experiment.  Unknown keys are errors.

    Returns
    -------
    list of (name, SimulationConfig)
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise InputError(f"config: {exc}") from None
    if not parser.sections():
        raise InputError("config defines no experiment sections")
    out = []
    for name in parser.sections():
        sim, scen = {}, {}
        for key, raw in parser.items(name):
            if key in SIM_KEYS:
                sim["B" if key == "b" else key] = _convert(key, raw, SIM_KEYS[key])
            elif key in SCENARIO_KEYS:
                scen[key] = _convert(key, raw, SCENARIO_KEYS[key])
            else:
                raise InputError(f"config section [{name}]: unknown key {key!r}")
        try:
            out.append((name, SimulationConfig(scenario=ScenarioAConfig(**scen), **sim)))
        except (TypeError, ValueError) as exc:
            raise InputError(f"config section [{name}]: {exc}") from None
    return out


def _resolved(config):
    doc = asdict(config)
    doc["B"] = config.n_resamples
    return doc


def cmd_simulate(args):
    with open(args.config, encoding="utf-8") as fh:
        experiments = parse_sim_config(fh.read())
    rows = []
    for name, config in experiments:
        def progress(done, total, name=name):
            print(f"[{name}] {done}/{total} runs", file=sys.stderr, flush=True)

        for rec in run_experiment(config, n_jobs=args.threads, progress=progress):
            rows.append({"experiment": name, **rec.to_dict()})
    _emit(format_rows(RECORD_COLUMNS, rows), args.out)
    if args.out not in (None, "-"):
        meta = {"schema": "mabt.simulation/1", "experiments": {n: _resolved(c) for n, c in experiments}}
        _emit(json.dumps(meta, indent=2, sort_keys=True) + "\n", args.out + ".config.json")
    return EXIT_OK


_RECORD_TYPES = {
    "run": int, "n_total": int, "m": int, "selected": int, "estimate": float, "bound": float,
    "true_performance": float, "tightness": float, "alpha": float, "alpha_used": float,
}


def _parse_bool(text):
    if text not in ("0", "1"):
        raise ValueError(f"expected 0/1, got {text!r}")
    return text == "1"


def read_records(path):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RECORD_COLUMNS:
            raise InputError(
                f"results file columns {reader.fieldnames} do not match {RECORD_COLUMNS}"
            )
        records = []
        for line, row in enumerate(reader, start=2):
            try:
                for key, conv in _RECORD_TYPES.items():
                    row[key] = conv(row[key])
                row["covered"] = _parse_bool(row["covered"])
                row["fallback_used"] = _parse_bool(row["fallback_used"])
            except (TypeError, ValueError) as exc:
                raise InputError(f"results file line {line}: {exc}") from None
            records.append(row)
    if not records:
        raise InputError("results file holds no records")
    return records


REPORT_COLUMNS = [
    "experiment", "measure", "validation", "rule", "method", "alpha", "runs", "failed",
    "coverage", "coverage_se", "liberal_threshold", "liberal", "mean_bound", "bound_se", "mean_true", "true_se",
    "mean_tightness", "tightness_se",
]


def cmd_report(args):
    records = read_records(args.results)
    by_exp = {}
    for rec in records:
        by_exp.setdefault(rec["experiment"], []).append(rec)
    rows = []
    for name, recs in by_exp.items():
        rows.extend({"experiment": name, **row} for row in aggregate(recs))
    header = io.StringIO()
    header.write("# schema: mabt.report/1\n")
    for level, runs in sorted({(r["alpha"], r["runs"]) for r in rows}):
        if runs:
            header.write(
                f"# liberal_threshold alpha={level:g} runs={runs}: {liberal_threshold(level, runs):.4f}\n"
            )
    _emit(header.getvalue() + format_rows(REPORT_COLUMNS, rows), args.out)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mabt", description="Lower confidence bounds for the performance of selected classifiers."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bound", help="bound the best model in a prediction CSV")
    b.add_argument("input", help="CSV with header y,<model_1>,...")
    b.add_argument("--measure", choices=["accuracy", "auc"], default="accuracy")
    b.add_argument("--methods", help="comma list from mabt,bt,wald,wilson,cp,delong,hm; suffix +sidak to adjust")
    b.add_argument("--rule", help="single-best | top-fraction=F | within-1-se (recorded in the report)")
    b.add_argument("--alpha", type=float, default=0.05)
    b.add_argument("--B", type=int, default=None, help="bootstrap resamples (default 10000 accuracy, 2000 AUC)")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--threads", type=int, default=1)
    b.add_argument("--out", default=None, help="report path (JSON); stdout when omitted")
    b.add_argument("--csv", default=None, help="also write one flat CSV row per method here")
    b.set_defaults(func=cmd_bound)

    s = sub.add_parser("simulate", help="run simulation experiments from a config file")
    s.add_argument("config")
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--out", default=None, help="results CSV path; stdout when omitted")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("report", help="summarise a results CSV")
    r.add_argument("results")
    r.add_argument("--out", default=None)
    r.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except CalibrationFailure as exc:
        print(f"error: calibration failed: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    except (InputError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
