"""Command-line interface: ``hypermon {check,monitor,gen-qbf,transform,classify,bench}``.

Exit codes: 0 verdict true, 1 verdict false, 2 error.  Machine-readable JSON
goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import random
import sys
import time
from pathlib import Path
from typing import Iterator, Sequence, TextIO

from . import __version__
from .evaluate import EvalCache, EvalError, check
from .formula import FormulaError, HyperFormula, classify, format_formula, parse_formula
from .kripke import (
    FiniteTrace,
    KripkeError,
    KripkeStructure,
    LogMode,
    TraceLog,
    build_tree,
    classify_frame,
    dump_structure,
    minimize_to_dag,
    parse_trace_line,
    parse_traces,
    self_composition,
    structure_from_json,
    structure_to_json,
)
from .monitor import Session
from .parallel import check_parallel, supports_parallel
from .reductions import QbfError, random_qbf, reduce_qbf_acyclic, reduce_qbf_tree
from .formula import Quant
from .selfcomp import check_selfcomp

EXIT_TRUE, EXIT_FALSE, EXIT_ERROR = 0, 1, 2


class CliError(Exception):
    pass


# ---------------------------------------------------------------------------
# input helpers


def read_formula(arg: str) -> HyperFormula:
    """``arg`` is a formula file, or the formula text itself."""
    path = Path(arg)
    text = path.read_text(encoding="utf-8") if path.is_file() else arg
    lines = [ln for ln in text.splitlines() if not ln.lstrip().startswith("#")]
    return parse_formula("\n".join(lines))


def _prepend(traces: list[FiniteTrace], letter: str | None) -> list[FiniteTrace]:
    if letter is None:
        return traces
    first = parse_trace_line(letter).letters[0]
    return [FiniteTrace((first,) + t.letters) for t in traces]


def read_source(path: str, *, dag: bool = False, prepend: str | None = None) -> KripkeStructure | TraceLog:
    """Structure JSON (``.json``) or a trace file turned into a tree/DAG log."""
    text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    if path.endswith(".json") or text.lstrip().startswith("{"):
        return structure_from_json(json.loads(text))
    log = build_tree(_prepend(parse_traces(text), prepend))
    return minimize_to_dag(log) if dag else log


def _structure(src: KripkeStructure | TraceLog) -> KripkeStructure:
    return src.structure if isinstance(src, TraceLog) else src


def _emit(obj, out: TextIO, *, indent: int | None = None) -> None:
    out.write(json.dumps(obj, indent=indent, sort_keys=indent is not None) + "\n")


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("HYPERMON_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise CliError(f"HYPERMON_SEED must be an integer, got {env!r}") from None
    return 0


# ---------------------------------------------------------------------------
# commands


def cmd_check(args, out: TextIO) -> int:
    f = read_formula(args.formula)
    src = read_source(args.input, dag=args.dag, prepend=args.prepend_letter)
    if args.engine == "selfcomp":
        if not classify(f).alternation_free:
            raise CliError(f"engine 'selfcomp' needs an alternation-free formula, got {classify(f)}")
        verdict = check_selfcomp(_structure(src), f)
    elif args.engine == "parallel":
        if not supports_parallel(f):
            raise CliError(f"engine 'parallel' does not support fragment {classify(f)}")
        verdict = check_parallel(src, f, args.workers, empty_set=args.empty_set)
    else:
        verdict = check(src, f, empty_set=args.empty_set)
    _emit(verdict.to_json(), out)
    return EXIT_TRUE if verdict.holds else EXIT_FALSE


def read_batches(stream: TextIO) -> Iterator[list[FiniteTrace]]:
    """Trace lines grouped into batches separated by ``---`` lines."""
    batch: list[FiniteTrace] = []
    for line in stream:
        s = line.strip()
        if s == "---":
            if batch:
                yield batch
            batch = []
        elif s and not s.startswith("#"):
            batch.append(parse_trace_line(s))
    if batch:
        yield batch


def cmd_monitor(args, out: TextIO) -> int:
    f = read_formula(args.formula)
    session = Session(
        f,
        LogMode.DAG if args.dag else LogMode.TREE,
        empty_set=args.empty_set,
        use_cache=not args.no_cache,
        workers=args.workers,
    )
    stream = sys.stdin if args.input == "-" else open(args.input, encoding="utf-8")
    try:
        last = None
        for traces in read_batches(stream):
            last = session.ingest(_prepend(traces, args.prepend_letter))
            _emit(last.to_json(), out)
            out.flush()
    finally:
        if stream is not sys.stdin:
            stream.close()
    if last is None:
        last = session.current_verdict()
        _emit(last.to_json(), out)
    if args.report:
        Path(args.report).write_text(json.dumps(session.report(), indent=1) + "\n", encoding="utf-8")
    return EXIT_TRUE if last.holds else EXIT_FALSE


def cmd_gen_qbf(args, out: TextIO) -> int:
    seed = _seed(args)
    lead = {"exists": Quant.EXISTS, "forall": Quant.FORALL, None: None}[args.lead]
    q = random_qbf(seed, args.vars, args.clauses, args.alternations, lead=lead)
    red = reduce_qbf_acyclic(q) if args.reduction == "acyclic" else reduce_qbf_tree(q)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    dump_structure(red.structure, outdir / "structure.json")
    (outdir / "formula.txt").write_text(format_formula(red.formula) + "\n", encoding="utf-8")
    manifest = {
        "seed": seed,
        "n": args.vars,
        "m": args.clauses,
        "alternations": args.alternations,
        "ground_truth": red.ground_truth,
        "reduction": red.reduction,
        "qbf": str(q),
        "states": len(red.structure),
        "frame": classify_frame(red.structure).value,
    }
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    _emit(manifest, out)
    return 0


def cmd_transform(args, out: TextIO) -> int:
    src = read_source(args.input, dag=False, prepend=args.prepend_letter)
    k = _structure(src)
    if args.classify:
        result = classify_frame(k).value
    elif args.minimize:
        log = src if isinstance(src, TraceLog) else None
        if log is None:
            raise CliError("--minimize needs a trace file (a tree-shaped trace log) as input")
        result = structure_to_json(minimize_to_dag(log).structure)
    else:
        result = structure_to_json(self_composition(k, args.selfcomp))
    _emit(result, out)
    return 0


def cmd_classify(args, out: TextIO) -> int:
    fc = classify(read_formula(args.formula))
    _emit({"pattern": fc.pattern, "alternation_depth": fc.alternation_depth, "fragment": str(fc)}, out)
    return 0


def _bench_qbf(args, seed: int) -> list[dict]:
    rows = []
    for n in range(args.min_vars, args.max_vars + 1):
        for alt in range(0, min(args.max_alternations, n - 1) + 1):
            q = random_qbf(seed + 1000 * n + alt, n, args.clauses, alt)
            for red in (reduce_qbf_acyclic(q), reduce_qbf_tree(q)):
                t0 = time.perf_counter()
                v = check(red.structure, red.formula)
                dt = time.perf_counter() - t0
                rows.append(
                    {
                        "instance": f"{red.reduction}-n{n}-a{alt}",
                        "states": len(red.structure),
                        "alternations": classify(red.formula).alternation_depth,
                        "frame": classify_frame(red.structure).value,
                        "seconds": round(dt, 4),
                        "tuples_evaluated": v.stats["tuples_evaluated"],
                        "holds": v.holds,
                        "agrees": v.holds == red.ground_truth,
                    }
                )
    return rows


_RANDOM_FORMULAS = {
    0: "forall p1. forall p2. (G (a@p1 <-> a@p2)) -> (G (b@p1 <-> b@p2))",
    1: "forall p1. exists p2. G (a@p1 <-> b@p2)",
}


def _bench_random(args, seed: int) -> list[dict]:
    rng = random.Random(seed)
    rows = []
    for size in range(args.min_traces, args.max_traces + 1, max(1, args.step)):
        traces = [
            FiniteTrace([frozenset()] + [frozenset(p for p in "ab" if rng.random() < 0.5) for _ in range(rng.randint(1, 6))])
            for _ in range(size)
        ]
        for mode in (LogMode.TREE, LogMode.DAG):
            log = build_tree(traces)
            if mode is LogMode.DAG:
                log = minimize_to_dag(log)
            for alt, text in _RANDOM_FORMULAS.items():
                f = parse_formula(text)
                t0 = time.perf_counter()
                v = check(log, f)
                dt = time.perf_counter() - t0
                rows.append(
                    {
                        "instance": f"random-{mode.value}-t{len(log)}-a{alt}",
                        "states": len(log.structure),
                        "alternations": alt,
                        "frame": classify_frame(log.structure).value,
                        "seconds": round(dt, 4),
                        "tuples_evaluated": v.stats["tuples_evaluated"],
                        "holds": v.holds,
                    }
                )
    return rows


_BENCH_COLUMNS = ("instance", "states", "alternations", "frame", "seconds", "tuples_evaluated")


def _table(rows: list[dict]) -> str:
    widths = {c: max(len(c), *(len(str(r[c])) for r in rows)) if rows else len(c) for c in _BENCH_COLUMNS}
    lines = ["  ".join(c.ljust(widths[c]) for c in _BENCH_COLUMNS)]
    for r in rows:
        lines.append("  ".join(str(r[c]).ljust(widths[c]) for c in _BENCH_COLUMNS))
    return "\n".join(lines)


def cmd_bench(args, out: TextIO) -> int:
    seed = _seed(args)
    rows = _bench_qbf(args, seed) if args.suite == "qbf" else _bench_random(args, seed)
    if args.format == "json":
        _emit(rows, out)
    else:
        out.write(_table(rows) + "\n")
    if any(r.get("agrees") is False for r in rows):
        print("hypermon: reduction verdict disagrees with the QBF oracle", file=sys.stderr)
        return EXIT_ERROR
    return 0


# ---------------------------------------------------------------------------
# parser


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hypermon", description="HyperLTL model checking and monitoring over trace logs.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def log_opts(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--dag", action="store_true", help="minimize trace-file input into an acyclic log")
        sp.add_argument("--prepend-letter", metavar="L", help="prepend letter L (trace syntax) to every trace")

    c = sub.add_parser("check", help="model check a structure or trace file")
    c.add_argument("input", help="structure JSON or trace file ('-' for stdin)")
    c.add_argument("formula", help="formula file or formula text")
    c.add_argument("--engine", choices=("enum", "selfcomp", "parallel"), default="enum")
    c.add_argument("--workers", type=_positive, default=1)
    c.add_argument("--empty-set", choices=("error", "vacuous"), default="error")
    log_opts(c)
    c.set_defaults(func=cmd_check)

    m = sub.add_parser("monitor", help="check a policy after every batch of a trace stream")
    m.add_argument("formula", help="formula file or formula text")
    m.add_argument("--input", default="-", help="batch stream ('---' separates batches; default stdin)")
    m.add_argument("--workers", type=_positive, default=1)
    m.add_argument("--empty-set", choices=("error", "vacuous"), default="error")
    m.add_argument("--no-cache", action="store_true")
    m.add_argument("--report", metavar="PATH", help="write final session state (history, cache stats) as JSON")
    log_opts(m)
    m.set_defaults(func=cmd_monitor)

    g = sub.add_parser("gen-qbf", help="generate a QBF reduction instance directory")
    g.add_argument("--reduction", choices=("acyclic", "tree"), default="acyclic")
    g.add_argument("--seed", type=int)
    g.add_argument("--vars", type=_positive, required=True)
    g.add_argument("--clauses", type=int, required=True)
    g.add_argument("--alternations", type=int, default=0)
    g.add_argument("--lead", choices=("exists", "forall"))
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_qbf)

    t = sub.add_parser("transform", help="minimize, self-compose or classify a structure")
    grp = t.add_mutually_exclusive_group(required=True)
    grp.add_argument("--minimize", action="store_true")
    grp.add_argument("--selfcomp", type=_positive, metavar="N")
    grp.add_argument("--classify", action="store_true")
    t.add_argument("input")
    t.add_argument("--prepend-letter", metavar="L")
    t.set_defaults(func=cmd_transform)

    k = sub.add_parser("classify", help="quantifier pattern and alternation depth of a formula")
    k.add_argument("formula")
    k.set_defaults(func=cmd_classify)

    b = sub.add_parser("bench", help="timing and size report")
    b.add_argument("--suite", choices=("qbf", "random"), default="qbf")
    b.add_argument("--seed", type=int)
    b.add_argument("--min-vars", type=_positive, default=3)
    b.add_argument("--max-vars", type=_positive, default=6)
    b.add_argument("--clauses", type=int, default=4)
    b.add_argument("--max-alternations", type=int, default=2)
    b.add_argument("--min-traces", type=_positive, default=10)
    b.add_argument("--max-traces", type=_positive, default=40)
    b.add_argument("--step", type=int, default=10)
    b.add_argument("--format", choices=("table", "json"), default="table")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else 0
    try:
        return args.func(args, out)
    except (CliError, FormulaError, KripkeError, EvalError, QbfError, OSError, ValueError) as exc:
        print(f"hypermon: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
