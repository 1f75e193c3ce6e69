"""Data-parallel checking for alternation-free and two-quantifier AE/EA formulas.

Every tuple of traces is evaluated independently (in chunks spread over a
process pool), and the verdict is obtained by reducing the resulting boolean
table through balanced binary trees of conjunctions and disjunctions.
"""

from __future__ import annotations

import itertools
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from typing import Sequence

from .evaluate import LaneEvaluator, UnsupportedFragment, TraceSource, Verdict, _empty_verdict, resolve_traces
from .formula import Body, HyperFormula, Quant, classify
from .kripke import FiniteTrace

__all__ = ["check_parallel", "tree_reduce", "supports_parallel", "UnsupportedFragment"]


def supports_parallel(f: HyperFormula) -> bool:
    fc = classify(f)
    return fc.alternation_free or (fc.alternation_depth == 1 and len(f.prefix) == 2)


def tree_reduce(values: Sequence[bool], conjunction: bool) -> bool:
    """Balanced binary-tree AND/OR; the empty reduction is the unit."""
    layer = list(values)
    if not layer:
        return conjunction
    while len(layer) > 1:
        nxt = []
        for i in range(0, len(layer) - 1, 2):
            a, b = layer[i], layer[i + 1]
            nxt.append((a and b) if conjunction else (a or b))
        if len(layer) % 2:
            nxt.append(layer[-1])
        layer = nxt
    return layer[0]


def _eval_rows(body: Body, variables: tuple[str, ...], traces: list[FiniteTrace], outer: list[tuple[int, ...]]) -> list[list[bool]]:
    """One row per outer tuple: the body's truth for every innermost trace."""
    ev = LaneEvaluator(body, traces, variables[-1])
    rows = []
    for tup in outer:
        fixed = {variables[k]: traces[i] for k, i in enumerate(tup)}
        rows.append(ev.lanes(fixed))
    return rows


def _chunks(items: list, n: int) -> list[list]:
    size = max(1, -(-len(items) // n))
    return [items[i : i + size] for i in range(0, len(items), size)]


def _run_rows(pool: Executor, body: Body, variables, traces, parts) -> list[list[bool]]:
    futures = [pool.submit(_eval_rows, body, variables, traces, part) for part in parts]
    return [row for fut in futures for row in fut.result()]


def check_parallel(
    source: TraceSource,
    f: HyperFormula,
    workers: int = 1,
    *,
    empty_set: str = "error",
    executor: str | Executor = "process",
) -> Verdict:
    """Evaluate all trace tuples in parallel, then reduce.

    ``executor`` selects a process pool (default) or a thread pool when
    ``workers > 1``, or is an already running executor to reuse across calls;
    with one worker everything runs in-process.  The verdict never depends on
    the worker count.
    """
    if workers < 1:
        raise ValueError("workers must be positive")
    if not supports_parallel(f):
        raise UnsupportedFragment(
            f"parallel checking supports alternation-free and two-quantifier AE/EA formulas, not {classify(f)}"
        )
    traces, ids = resolve_traces(source)
    if not f.prefix:
        ev = LaneEvaluator(f.body, [], None)
        return Verdict(bool(ev.mask({})), stats={"tuples_evaluated": 1, "cache_hits": 0})
    if not traces:
        return _empty_verdict(f, empty_set)

    variables = f.variables
    quants = [q for q, _ in f.prefix]
    T = len(traces)
    outer = list(itertools.product(range(T), repeat=len(variables) - 1))
    if workers == 1:
        rows = _eval_rows(f.body, variables, traces, outer)
    elif isinstance(executor, Executor):
        rows = _run_rows(executor, f.body, variables, traces, _chunks(outer, workers))
    else:
        pool_cls: type[Executor] = ProcessPoolExecutor if executor == "process" else ThreadPoolExecutor
        with pool_cls(max_workers=workers) as pool:
            rows = _run_rows(pool, f.body, variables, traces, _chunks(outer, workers))
    stats = {"tuples_evaluated": len(outer) * T, "cache_hits": 0}

    fc = classify(f)
    witness: tuple[int, ...] | None = None
    if fc.alternation_free:
        conj = quants[0] is Quant.FORALL
        holds = tree_reduce([tree_reduce(r, conj) for r in rows], conj)
        want = not conj  # decisive tuple value
        if holds is want:
            for tup, row in zip(outer, rows):
                if want in row:
                    witness = tup + (row.index(want),)
                    break
    else:
        # upper tree over the first variable, lower tree over the second
        upper_conj = quants[0] is Quant.FORALL
        inner = [tree_reduce(r, not upper_conj) for r in rows]
        holds = tree_reduce(inner, upper_conj)
        want = not upper_conj
        if holds is want:
            witness = (inner.index(want),)
    v = Verdict(holds, stats=stats)
    if witness is not None:
        v.witness = {variables[k]: ids[i] for k, i in enumerate(witness)}
        v.witness_traces = {variables[k]: traces[i] for k, i in enumerate(witness)}
    return v
