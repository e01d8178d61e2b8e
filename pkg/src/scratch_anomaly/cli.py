"""Command-line front end: ``scratch-anomalies detect --input DIR``."""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from pathlib import Path

from .anomaly import AnomalyReport, ModeComparison, compare_modes, detect
from .errors import EmptyCorpus, MalformedProject, NoScripts, UnreadableFile
from .miner import MinerConfig
from .model import to_dot

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_NO_DATA = 3


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _min_support(text: str) -> int | None:
    if text == "auto":
        return None
    return _positive_int(text)


def _fraction(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scratch-anomalies",
        description="Find anomalous scripts in a corpus of Scratch 3 solutions to one task.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("detect", help="mine patterns and report ranked anomalies")
    p.add_argument("--input", required=True, type=Path, help="directory of .sb3 / project .json files")
    p.add_argument("--mode", choices=("aa", "as"), default="aa",
                   help="aa: pool all scripts; as: mine per actor name (default: aa)")
    p.add_argument("--min-support", type=_min_support, default=None, metavar="K|auto",
                   help="minimum supporting scripts per pattern (default: auto = max(3, 10%% of group))")
    p.add_argument("--max-missing", type=_positive_int, default=2)
    p.add_argument("--min-confidence", type=_fraction, default=0.9)
    p.add_argument("--min-pattern-size", type=_positive_int, default=2)
    p.add_argument("--top", type=_positive_int, default=10, help="report at most this many anomalies")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--output", type=Path, help="write the report here instead of stdout")
    p.add_argument("--emit-models", type=Path, metavar="DIR", help="write one DOT file per script model")
    p.add_argument("--emit-patterns", type=Path, metavar="FILE", help="write mined patterns as JSON")
    p.add_argument("--compare-modes", action="store_true", help="run AA and AS and report their overlap")
    p.add_argument("--recursive", action="store_true", help="descend into subdirectories")
    p.add_argument("--adjacent-only", action="store_true", help="only pair directly consecutive blocks")
    p.add_argument("--no-self-pairs", action="store_true", help="drop (a, a) properties from loops")
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _fmt_props(props) -> list[str]:
    return [str(p) for p in sorted(props)]


def render_text(report: AnomalyReport) -> str:
    """Human-readable listing in the same order as the JSON report."""
    cfg = report.config.echo()
    lines = [
        f"Scratch anomaly report (mode {report.mode})",
        "config: " + " ".join(f"{k}={v}" for k, v in cfg.items() if k != "mode"),
        f"corpus: {report.projects} projects loaded, {len(report.skipped)} skipped, {report.scripts} scripts",
    ]
    for s in report.skipped:
        lines.append(f"  skipped {s.file}: {s.reason}")
    for g in report.groups:
        lines.append(f"group {g.key}: {g.scripts} scripts, k={g.min_support}, {len(g.patterns)} patterns")
    lines.append(f"violations found: {report.violations_found}, reported: {len(report.anomalies)}")
    lines.append("")
    if not report.anomalies:
        lines.append("No anomalies above confidence threshold.")
        return "\n".join(lines) + "\n"
    for a in report.anomalies:
        v = a.violation
        dead = " [dead code]" if a.dead_code else ""
        lines.append(f"#{a.rank}  confidence {v.confidence:.2f}  support {v.support}  same way {v.same_way_count}")
        lines.append(f"    project {v.script.project} / actor {v.script.actor} / script {v.script.index}{dead}")
        lines.append(f"    pattern {v.pattern} (group {v.group})")
        for prop in _fmt_props(v.present):
            lines.append(f"    present: {prop}")
        for prop in _fmt_props(v.missing):
            lines.append(f"    MISSING: {prop}")
        lines.append("")
    return "\n".join(lines)


def render_comparison(cmp: ModeComparison) -> str:
    parts = [render_text(cmp.aa), render_text(cmp.as_)]
    overlap = cmp.overlap
    lines = [f"Mode comparison: AA violations {cmp.aa.violations_found}, AS violations {cmp.as_.violations_found}",
             f"anomalies reported: AA {len(cmp.aa.anomalies)}, AS {len(cmp.as_.anomalies)}, in both {len(overlap)}"]
    for sid, missing in overlap:
        lines.append(f"  {sid}: missing {', '.join(_fmt_props(missing))}")
    return "\n".join(parts) + "\n".join(lines) + "\n"


def _safe_name(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", text)


def _emit_models(report: AnomalyReport, directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for sid, model in sorted(report.models.items()):
        name = f"{_safe_name(sid.project)}__{_safe_name(sid.actor)}__{sid.index}.dot"
        (directory / name).write_text(to_dot(model, str(sid)), encoding="utf-8")


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")

    config = MinerConfig(
        min_support=args.min_support,
        min_pattern_size=args.min_pattern_size,
        max_missing=args.max_missing,
        min_confidence=args.min_confidence,
        top_n=args.top,
        mode=args.mode.upper(),
        adjacent_only=args.adjacent_only,
        no_self_pairs=args.no_self_pairs,
    )
    try:
        if args.compare_modes:
            cmp = compare_modes(args.input, config, recursive=args.recursive)
            reports = [cmp.aa, cmp.as_]
            text = cmp.to_json() if args.format == "json" else render_comparison(cmp)
        else:
            report = detect(args.input, config, recursive=args.recursive)
            reports = [report]
            text = report.to_json() if args.format == "json" else render_text(report)
        if args.emit_models:
            _emit_models(reports[0], args.emit_models)
        if args.emit_patterns:
            if args.compare_modes:
                records = [{"mode": r.mode, **rec} for r in reports for rec in r.pattern_records()]
                payload = json.dumps(records, indent=2, ensure_ascii=False) + "\n"
            else:
                payload = reports[0].patterns_json()
            args.emit_patterns.write_text(payload, encoding="utf-8")
        if args.output:
            args.output.write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    except (EmptyCorpus, NoScripts) as exc:
        print(f"scratch-anomalies: {exc}", file=sys.stderr)
        return EXIT_NO_DATA
    except (UnreadableFile, MalformedProject, OSError) as exc:
        print(f"scratch-anomalies: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main() -> None:
    sys.exit(run())
