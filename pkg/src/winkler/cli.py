"""Command-line interface: ``winkler evaluate | score | simulate``.

Exit codes: 0 success, 2 invalid input, 3 internal invariant violation.
Set ``WINKLER_LOG`` (e.g. ``DEBUG``) to change the log level.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import re
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .decomposition import EvaluationSet, decompose_full
from .ordering import OrderKind
from .report import (
    McbDscEntry,
    atomic_write_text,
    dumps_json,
    make_plot_spec,
    mcb_dsc_plot,
    report_json,
    study_csv,
)
from .scoring import (
    DomainError,
    InvariantError,
    NonCentralLevels,
    TransformSpec,
    generalized_interval_scores,
    mean_score,
    noncentral_interval_scores,
)
from .simulation import run_simulation_study

log = logging.getLogger("winkler")

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 2, 3
REQUIRED_COLUMNS = ("lower", "upper", "observed")
_NUMBER = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


class InputError(DomainError):
    pass


@dataclass
class Records:
    lower: np.ndarray
    upper: np.ndarray
    observed: np.ndarray
    groups: list | None
    lines: np.ndarray


def _number(text: str, column: str, line: int) -> float:
    text = (text or "").strip()
    if not _NUMBER.match(text):
        raise InputError(f"line {line}: column {column!r} is not a finite decimal number: {text!r}")
    return float(text)


def read_records(path, group_col: str | None = "group", allow_degenerate: bool = False) -> Records:
    """Read ``lower,upper,observed[,group]`` rows; line numbers are 1-based."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    reader = csv.DictReader(io.StringIO(text))
    header = reader.fieldnames
    if not header:
        raise InputError(f"{path}: missing header line")
    header = [h.strip() for h in header]
    reader.fieldnames = header
    missing = [c for c in REQUIRED_COLUMNS if c not in header]
    if missing:
        raise InputError(f"{path}: header lacks columns {missing}")
    use_group = group_col is not None and group_col in header
    lower, upper, observed, groups, lines = [], [], [], [], []
    for row in reader:
        line = reader.line_num
        if None in row or any(v is None for v in row.values()):
            raise InputError(f"line {line}: expected {len(header)} fields")
        lo = _number(row["lower"], "lower", line)
        up = _number(row["upper"], "upper", line)
        obs = _number(row["observed"], "observed", line)
        if lo > up:
            raise InputError(f"line {line}: lower bound {lo} exceeds upper bound {up}")
        if lo == up and not allow_degenerate:
            raise InputError(f"line {line}: degenerate interval [{lo}, {up}] (use --allow-degenerate)")
        lower.append(lo)
        upper.append(up)
        observed.append(obs)
        lines.append(line)
        if use_group:
            groups.append(row[group_col].strip())
    if not observed:
        raise InputError(f"{path}: no data rows")
    return Records(np.array(lower), np.array(upper), np.array(observed),
                   groups if use_group else None, np.array(lines))


def parse_levels(text: str) -> NonCentralLevels:
    try:
        a1, a2 = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise InputError(f"--levels expects 'alpha1,alpha2', got {text!r}") from exc
    return NonCentralLevels(a1, a2)


def parse_transform(text: str | None) -> TransformSpec:
    if text is None or text == "identity":
        return TransformSpec.identity()
    kind, _, arg = text.partition(":")
    if kind == "log-shift":
        return TransformSpec.log_shift(float(arg) if arg else 0.0)
    if kind == "table" and arg:
        recs = list(csv.DictReader(open(arg, newline="", encoding="utf-8")))
        try:
            return TransformSpec.from_table([float(r["x"]) for r in recs], [float(r["g"]) for r in recs])
        except (KeyError, ValueError) as exc:
            raise InputError(f"transform table {arg} needs numeric columns x,g") from exc
    raise InputError(f"unknown transform {text!r}; use identity, log-shift[:offset] or table:PATH")


def _group_slices(rec: Records):
    if rec.groups is None:
        return [(None, np.arange(rec.observed.size))]
    names = list(dict.fromkeys(rec.groups))
    labels = np.array(rec.groups, dtype=object)
    return [(name, np.flatnonzero(labels == name)) for name in names]


def _emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        atomic_write_text(path, text)


def cmd_evaluate(args) -> int:
    rec = read_records(args.input, args.group_col, args.allow_degenerate)
    levels = parse_levels(args.levels) if args.levels else None
    transform = parse_transform(args.transform)
    order = OrderKind(args.order)
    results = []
    for name, idx in _group_slices(rec):
        es = EvaluationSet(
            rec.lower[idx], rec.upper[idx], rec.observed[idx],
            alpha=args.alpha, levels=levels, transform=transform, order_kind=order,
            allow_unsafe_order=args.allow_unsafe_order, allow_degenerate=args.allow_degenerate,
            comparability_threshold=args.comparability_threshold,
        )
        d = decompose_full(es)
        for note in d.report.warnings:
            print(f"warning: {name + ': ' if name is not None else ''}{note}", file=sys.stderr)
        results.append((name, idx, d))

    svg = None
    if args.plot:
        # built before any output is written so a mismatch leaves no partial files
        entries = [McbDscEntry.from_report(name if name is not None else "forecast", d.report)
                   for name, _, d in results]
        svg = mcb_dsc_plot(make_plot_spec(entries, title=Path(args.input).name))

    if rec.groups is None:
        payload = report_json(results[0][2].report)
    else:
        payload = [report_json(d.report, group=name) for name, _, d in results]
    _emit(dumps_json(payload), args.out)

    if args.emit_recalibrated:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        head = ["group"] if rec.groups is not None else []
        writer.writerow(head + ["line", "lower", "upper", "observed", "recal_lower", "recal_upper"])
        for name, idx, d in results:
            for k, i in enumerate(idx):
                writer.writerow(([name] if name is not None else []) + [
                    int(rec.lines[i]), repr(float(rec.lower[i])), repr(float(rec.upper[i])), repr(float(rec.observed[i])),
                    repr(float(d.recal_lower[k])), repr(float(d.recal_upper[k])),
                ])
        atomic_write_text(args.emit_recalibrated, buf.getvalue())

    if svg is not None:
        atomic_write_text(args.plot, svg)
    return EXIT_OK


def cmd_score(args) -> int:
    rec = read_records(args.input, args.group_col, args.allow_degenerate)
    if args.levels:
        scores = noncentral_interval_scores(rec.lower, rec.upper, rec.observed, parse_levels(args.levels))
    else:
        scores = generalized_interval_scores(rec.lower, rec.upper, rec.observed, args.alpha,
                                             parse_transform(args.transform))
    scores = np.atleast_1d(scores)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    head = ["group"] if rec.groups is not None else []
    writer.writerow(head + ["line", "lower", "upper", "observed", "score"])
    for i in range(scores.size):
        writer.writerow(([rec.groups[i]] if rec.groups is not None else []) + [
            int(rec.lines[i]), repr(float(rec.lower[i])), repr(float(rec.upper[i])), repr(float(rec.observed[i])),
            repr(float(scores[i])),
        ])
    _emit(buf.getvalue(), args.out)
    print(f"n={scores.size} mean_score={mean_score(scores)!r}", file=sys.stderr)
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.n < 2:
        raise InputError("--n must be at least 2: the decomposition needs two or more cases")
    out = Path(args.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputError(f"cannot create output directory {out}: {exc}") from exc
    rows = run_simulation_study(args.n, args.seed, args.alpha)
    atomic_write_text(out / "study.csv", study_csv(rows))
    atomic_write_text(out / "reports.json",
                      dumps_json([report_json(r.report, forecaster=r.forecaster.value) for r in rows]))
    entries = [McbDscEntry.from_report(r.label, r.report) for r in rows]
    title = f"n={args.n}, alpha={args.alpha}, seed={args.seed}"
    atomic_write_text(out / "mcb_dsc.svg", mcb_dsc_plot(make_plot_spec(entries, title=title)))
    for r in rows:
        log.info("%s: IS=%.3f dsc=%.3f mcb=%.3f", r.label, r.interval_score, r.report.dsc, r.report.mcb)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="winkler", description="Interval score decomposition tools")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("input", help="CSV with columns lower,upper,observed[,group]")
        p.add_argument("--alpha", type=float, default=0.1, help="central interval level 1-alpha")
        p.add_argument("--levels", help="non-central levels 'alpha1,alpha2'")
        p.add_argument("--transform", help="identity | log-shift[:offset] | table:PATH")
        p.add_argument("--group-col", default="group", help="column naming the method (used if present)")
        p.add_argument("--allow-degenerate", action="store_true", help="accept intervals with lower == upper")
        p.add_argument("--out", help="output path (default: stdout)")

    ev = sub.add_parser("evaluate", help="decompose the mean interval score")
    common(ev)
    ev.add_argument("--order", choices=[k.value for k in OrderKind], default="componentwise")
    ev.add_argument("--allow-unsafe-order", action="store_true",
                    help="permit the midpoint order, whose miscalibration term can be negative")
    ev.add_argument("--emit-recalibrated", metavar="CSV", help="write IDR-recalibrated intervals")
    ev.add_argument("--plot", metavar="SVG", help="write a miscalibration-discrimination plot")
    ev.add_argument("--comparability-threshold", type=float, default=0.6)
    ev.set_defaults(func=cmd_evaluate)

    sc = sub.add_parser("score", help="per-row interval scores")
    common(sc)
    sc.set_defaults(func=cmd_score)

    sim = sub.add_parser("simulate", help="run the six-forecaster simulation study")
    sim.add_argument("--n", type=int, default=1000)
    sim.add_argument("--seed", type=int, default=1)
    sim.add_argument("--alpha", type=float, default=0.1)
    sim.add_argument("--out-dir", default=".")
    sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("WINKLER_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (DomainError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
