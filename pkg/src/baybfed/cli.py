"""Command-line front end.

    baybfed run --config s1.yaml --out runs/s1
    baybfed sweep --config s1.yaml --axis pmr --values 0.2,0.3,0.5 --out runs/pmr
    baybfed selftest

Exit codes: 0 success, 1 validation, 2 I/O, 3 runtime numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence

from .config import ExperimentConfig, parse_config
from .errors import BaybfedError, ConfigError
from .simulation import Report, run_experiment, thread_cap

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_RUNTIME = 0, 1, 2, 3

TRACE_COLUMNS = ("round", "client_id", "is_malicious", "max_jd", "assigned_cluster", "kept")
SWEEP_COLUMNS = ("axis", "value", "status", "tpr", "tnr", "ba", "ma", "error")
SWEEP_AXES = {
    "pmr": ("pmr", float),
    "non_iid": ("non_iid_degree", float),
    "pdr": ("attack.pdr", float),
    "alpha": ("attack.alpha", float),
    "n_clients": ("n_clients", int),
}

log = logging.getLogger("baybfed")


def _bool(v: bool) -> str:
    return "true" if v else "false"


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return _bool(v)
    return repr(v) if isinstance(v, float) else str(v)


def write_trace(report: Report, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for row in report.trace:
            writer.writerow([_cell(getattr(row, col)) for col in TRACE_COLUMNS])


def write_summary(report: Report, path: Path) -> None:
    path.write_text(json.dumps(report.to_summary(), indent=2) + "\n")


def cmd_run(config: ExperimentConfig, out_dir) -> int:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        log.error("cannot create %s: %s", out, exc)
        return EXIT_IO
    try:
        report = run_experiment(config)
    except (BaybfedError, ArithmeticError) as exc:
        log.error("run failed: %s", exc)
        return EXIT_RUNTIME
    try:
        write_trace(report, out / "trace.csv")
        write_summary(report, out / "summary.json")
    except OSError as exc:
        log.error("cannot write results to %s: %s", out, exc)
        return EXIT_IO
    return EXIT_OK


def with_axis_value(base: ExperimentConfig, axis: str, value) -> ExperimentConfig:
    """Copy of ``base`` with the sweep axis set; validated like a config file."""
    from .config import config_from_dict, config_to_dict

    if axis not in SWEEP_AXES:
        raise ConfigError("axis", f"must be one of {sorted(SWEEP_AXES)}")
    dotted, _ = SWEEP_AXES[axis]
    raw = config_to_dict(base)
    node = raw
    *parents, leaf = dotted.split(".")
    for key in parents:
        node = node[key]
    node[leaf] = value
    return config_from_dict(raw)


def parse_values(axis: str, text: str) -> list:
    if axis not in SWEEP_AXES:
        raise ConfigError("axis", f"must be one of {sorted(SWEEP_AXES)}")
    cast = SWEEP_AXES[axis][1]
    items = [t.strip() for t in text.split(",") if t.strip()]
    try:
        return [cast(t) for t in items]
    except ValueError:
        raise ConfigError("values", f"not all of {items} parse as {cast.__name__}") from None


def _sweep_one(args):
    cfg, out = args
    return cmd_run(cfg, out)


def cmd_sweep(base: ExperimentConfig, axis: str, values: Sequence, out_dir) -> int:
    """One sub-run per value, all on the base seed; writes ``sweep_summary.csv``."""
    if not values:
        log.error("sweep needs at least one value")
        return EXIT_VALIDATION
    try:
        configs = [with_axis_value(base, axis, v) for v in values]
    except ConfigError as exc:
        log.error("invalid sweep: %s", exc)
        return EXIT_VALIDATION
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        log.error("cannot create %s: %s", out, exc)
        return EXIT_IO
    jobs = [(cfg, out / f"{axis}={v}") for cfg, v in zip(configs, values)]
    workers = min(thread_cap(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            codes = list(pool.map(_sweep_one, jobs))
    else:
        codes = [_sweep_one(job) for job in jobs]

    rows = []
    for v, (_, sub), code in zip(values, jobs, codes):
        row = {"axis": axis, "value": v, "status": "ok" if code == EXIT_OK else "failed",
               "tpr": None, "tnr": None, "ba": None, "ma": None,
               "error": "" if code == EXIT_OK else f"exit {code}"}
        if code == EXIT_OK:
            final = json.loads((sub / "summary.json").read_text())["final"]
            row.update({k: final[k] for k in ("tpr", "tnr", "ba", "ma")})
        rows.append(row)
    try:
        with open(out / "sweep_summary.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(SWEEP_COLUMNS)
            for row in rows:
                writer.writerow([_cell(row[c]) for c in SWEEP_COLUMNS])
    except OSError as exc:
        log.error("cannot write sweep summary: %s", exc)
        return EXIT_IO
    failed = [c for c in codes if c != EXIT_OK]
    return max(failed) if failed else EXIT_OK


def _load(args) -> ExperimentConfig:
    cfg = parse_config(args.config)
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="baybfed", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment")
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--seed", type=int)

    sweep = sub.add_parser("sweep", help="run one experiment per axis value")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--seed", type=int)
    sweep.add_argument("--axis", required=True, choices=sorted(SWEEP_AXES))
    sweep.add_argument("--values", required=True, help="comma-separated")

    sub.add_parser("selftest", help="run the quick invariant checks")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "selftest":
        from .selftest import run_selftest

        return EXIT_OK if run_selftest() else EXIT_RUNTIME
    try:
        cfg = _load(args)
        if args.command == "run":
            return cmd_run(cfg, args.out)
        return cmd_sweep(cfg, args.axis, parse_values(args.axis, args.values), args.out)
    except ConfigError as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_VALIDATION
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
