"""Command-line entry point.

Exit codes: 0 success, 1 analysis error (bad project, unknown mutant, ...),
2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import corpus, evalpipe
from .callgraph import FIGURE, FORMAL, GraphVariant, build, export
from .frontend import FrontendError
from .interpreter import DEFAULT_STEP_BUDGET
from .mutgen import MutationOperator, manifest_json

EXIT_OK, EXIT_ANALYSIS, EXIT_USAGE = 0, 1, 2


class AnalysisError(Exception):
    pass


def default_workers() -> int:
    env = os.environ.get("IMPACTLAB_WORKERS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise AnalysisError(f"IMPACTLAB_WORKERS must be an integer, got {env!r}") from None
        if value < 1:
            raise AnalysisError("IMPACTLAB_WORKERS must be at least 1")
        return value
    return os.cpu_count() or 1


def _positive(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise ValueError(text)
    return value


_positive.__name__ = "positive integer"


def _variant(text: str) -> GraphVariant:
    return GraphVariant.parse(text)


_variant.__name__ = "variant"


def _operator(text: str) -> MutationOperator:
    return MutationOperator.parse(text)


_operator.__name__ = "operator"


def _write(data: bytes, out) -> None:
    if out is None or out == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)


def _load(project_dir):
    try:
        return evalpipe.load_project(project_dir)
    except FileNotFoundError as exc:
        raise AnalysisError(str(exc)) from None


# -- commands ---------------------------------------------------------------


def cmd_graph(args) -> int:
    _, _, checked = _load(args.project)
    graph = build(checked, args.variant, args.field_orientation)
    _write(export(graph, args.format), args.output)
    return EXIT_OK


def cmd_mutate(args) -> int:
    name, units, checked = _load(args.project)
    baseline = evalpipe.green_baseline(checked, args.step_budget)
    runs = evalpipe.run_mutants(
        units, checked, args.op, args.cap, args.seed, args.step_budget, args.workers or default_workers(), baseline
    )
    text = manifest_json(name, args.op, args.seed, [(r.mutant, r.status) for r in runs])
    _write(text.encode("utf-8"), args.output)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    variants = args.variant or [GraphVariant.B]
    operators = args.op or list(MutationOperator)
    evaluations = evalpipe.evaluate_many(
        args.project,
        variants,
        operators,
        args.cap,
        args.seed,
        args.step_budget,
        workers=args.workers or default_workers(),
        exclude_unbounded=args.exclude_unbounded,
        field_orientation=args.field_orientation,
    )
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for ev in evaluations:
        ledger_path = out / f"{ev.project}-{ev.operator}-{ev.variant}.jsonl"
        ledger_path.write_text(evalpipe.ledger_to_jsonl(ev.ledger, ev.variant), encoding="utf-8")
    reports = [ev.report for ev in evaluations]
    suffix = "md" if args.report_format == "md" else "csv"
    (out / f"report.{suffix}").write_bytes(evalpipe.render_report(reports, args.report_format))
    if args.timing_reps:
        timing = evalpipe.timings(args.project, variants, args.timing_reps, args.step_budget)
        (out / "timing.csv").write_bytes(evalpipe.render_timings(timing))
    sys.stdout.buffer.write(evalpipe.render_report(reports, "md"))
    return EXIT_OK


def cmd_viz(args) -> int:
    _, _, checked = _load(args.project)
    try:
        text = Path(args.ledger).read_text(encoding="utf-8")
    except OSError as exc:
        raise AnalysisError(f"cannot read ledger: {exc}") from None
    ledger, tag = evalpipe.ledger_from_jsonl(text)
    variant = args.variant
    if tag is not None:
        if variant is not None and variant.value != tag:
            raise AnalysisError(f"ledger was computed for variant {tag}, not {variant.value}")
        variant = GraphVariant(tag)
    if variant is None:
        variant = GraphVariant.B
    record = ledger.get(args.mutant)
    if record is None:
        raise AnalysisError(f"mutant {args.mutant} is not in the ledger")
    graph = build(checked, variant, args.field_orientation)
    try:
        data = evalpipe.render_impact_dot(graph, record)
    except KeyError as exc:
        raise AnalysisError(str(exc.args[0])) from None
    _write(data, args.output)
    return EXIT_OK


def cmd_verify_corpus(args) -> int:
    ok = True
    for name, passed, detail in corpus.verify_corpus(args.step_budget):
        print(f"{name}: {'ok' if passed else 'FAIL ' + detail}")
        ok = ok and passed
    return EXIT_OK if ok else EXIT_ANALYSIS


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="impactlab", description="Call-graph impact prediction laboratory.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(p, budget=True):
        p.add_argument("project", help="project directory containing *.moo files")
        if budget:
            p.add_argument("--step-budget", type=_positive, default=DEFAULT_STEP_BUDGET, help="evaluation steps per test")

    def orientation(p):
        p.add_argument(
            "--field-orientation", choices=[FORMAL, FIGURE], default=FORMAL,
            help="field edge direction: formal is reader->field->writer, figure reverses it",
        )

    def sampling(p):
        p.add_argument("--cap", type=_positive, default=evalpipe.DEFAULT_CAP, help="max mutants per (project, operator)")
        p.add_argument("--seed", type=int, default=evalpipe.DEFAULT_SEED, help="sampling seed")
        p.add_argument("--workers", type=_positive, default=None,
                       help="worker processes (default: $IMPACTLAB_WORKERS or CPU count)")

    p = sub.add_parser("graph", help="build and export a call graph", formatter_class=fmt)
    common(p, budget=False)
    p.add_argument("--variant", type=_variant, default=GraphVariant.B, help="graph variant: s, b, h or f")
    p.add_argument("--format", choices=["json", "dot"], default="json", help="output format")
    orientation(p)
    p.add_argument("-o", "--output", default=None, help="output file (default: stdout)")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("mutate", help="enumerate, sample and classify mutants", formatter_class=fmt)
    common(p)
    p.add_argument("--op", type=_operator, required=True, help="mutation operator: ABS, AOR, LCR, ROR or UOI")
    sampling(p)
    p.add_argument("-o", "--output", default=None, help="manifest file (default: stdout)")
    p.set_defaults(func=cmd_mutate)

    p = sub.add_parser("evaluate", help="run the full prediction evaluation", formatter_class=fmt)
    common(p)
    p.add_argument("--variant", type=_variant, action="append", default=None,
                   help="graph variant, repeatable (default: b)")
    p.add_argument("--op", type=_operator, action="append", default=None,
                   help="mutation operator, repeatable (default: all five)")
    sampling(p)
    p.add_argument("--exclude-unbounded", action="store_true", help="drop unbounded mutants from K instead of scoring them 0")
    orientation(p)
    p.add_argument("--out-dir", default="impactlab-out", help="directory for ledgers, report and timings")
    p.add_argument("--report-format", choices=["csv", "md"], default="csv", help="report file format")
    p.add_argument("--timing-reps", type=int, default=3, help="timing repetitions (0 skips timing; otherwise >= 3)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("viz", help="render one mutant's predicted and actual impact as DOT", formatter_class=fmt)
    common(p, budget=False)
    p.add_argument("--ledger", required=True, help="ledger file written by evaluate")
    p.add_argument("--mutant", required=True, help="mutant id")
    p.add_argument("--variant", type=_variant, default=None, help="graph variant (default: the ledger's)")
    orientation(p)
    p.add_argument("-o", "--output", default=None, help="output file (default: stdout)")
    p.set_defaults(func=cmd_viz)

    p = sub.add_parser("verify-corpus", help="check the bundled corpus against its recorded statistics",
                       formatter_class=fmt)
    p.add_argument("--step-budget", type=_positive, default=DEFAULT_STEP_BUDGET, help="evaluation steps per test")
    p.set_defaults(func=cmd_verify_corpus)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "timing_reps", 0) and 0 < args.timing_reps < 3:
        parser.error("--timing-reps must be 0 or at least 3")
    try:
        return args.func(args)
    except (AnalysisError, evalpipe.EvaluationError, FrontendError, ValueError, OSError) as exc:
        print(f"impactlab: error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())
