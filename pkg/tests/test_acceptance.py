"""Acceptance suite: nine end-to-end criteria, one PASS/FAIL line each.

Run under pytest (the lines are printed even with output capture on) or
directly with ``python3 tests/test_acceptance.py``.  Every criterion is
seeded, so reruns see the same instances.
"""

from __future__ import annotations

import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import sample_structure  # noqa: E402
from generators import (  # noqa: E402
    random_acyclic_structure,
    random_formula,
    random_letter,
    random_parallel_formula,
    random_trace,
    random_traces,
)
from hypermon.evaluate import brute_force_check, check  # noqa: E402
from hypermon.formula import Quant, classify, parse_formula  # noqa: E402
from hypermon.kripke import (  # noqa: E402
    FiniteTrace,
    FrameClass,
    KripkeStructure,
    LogMode,
    build_tree,
    classify_frame,
    enumerate_traces,
    minimize_to_dag,
    parse_trace_line,
    self_composition,
)
from hypermon.monitor import session_new  # noqa: E402
from hypermon.parallel import check_parallel  # noqa: E402
from hypermon.reductions import Qbf, reference_qbf, qbf_solve, random_qbf, reduce_qbf_acyclic, reduce_qbf_tree  # noqa: E402
from hypermon.selfcomp import check_selfcomp  # noqa: E402

ACYCLIC_CLASSES = (FrameClass.TREE, FrameClass.ACYCLIC)  # a tree is a special acyclic frame


@dataclass
class Outcome:
    number: int
    title: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"criterion {self.number} [{'PASS' if self.passed else 'FAIL'}] {self.title}: {self.detail}"


def _report(outcome: Outcome, capsys=None) -> None:
    if capsys is not None:
        with capsys.disabled():
            print("\n" + outcome.line())
    else:
        print(outcome.line())


# ---------------------------------------------------------------------------
# 1. four-state golden test


def criterion_1() -> Outcome:
    t0 = time.perf_counter()
    v = check(sample_structure(), parse_formula("forall p1. forall p2. a@p1 U b@p2"))
    dt = time.perf_counter() - t0
    T = parse_trace_line
    pair = (v.witness_traces or {}).get("p1"), (v.witness_traces or {}).get("p2")
    ok = v.holds is False and pair == (T("a;b"), T("a;a;b")) and dt < 1.0
    return Outcome(1, "four-state golden", ok, f"holds={v.holds} witness=({pair[0]}, {pair[1]}) time={dt:.4f}s (limit 1s)")


# ---------------------------------------------------------------------------
# 2. oracle equivalence


def criterion_2(count: int = 600) -> Outcome:
    rng = random.Random(2002)
    t0 = time.perf_counter()
    agree = 0
    for i in range(count):
        traces = random_traces(rng, max_traces=10, max_len=6, shared_root=i % 3 != 0)
        f = random_formula(rng, max_quants=3, depth=4)
        # rotate between a plain list, a tree log and a minimized log
        source = traces if i % 3 == 0 else build_tree(traces)
        if i % 3 == 2:
            source = minimize_to_dag(source)
        agree += check(source, f).holds is brute_force_check(traces, f)
    dt = time.perf_counter() - t0
    ok = agree == count and dt < 60
    return Outcome(2, "oracle equivalence", ok, f"{agree}/{count} agree, {dt:.2f}s (limit 60s)")


# ---------------------------------------------------------------------------
# 3 and 4. QBF cross-validation


def qbf_corpus(count: int = 120) -> list[Qbf]:
    out = []
    for i in range(count):
        n = 2 + i % 5  # 2..6 variables
        m = 1 + (i // 5) % 5  # 1..5 clauses
        alt = min(i % 3, n - 1)
        lead = (Quant.EXISTS, Quant.FORALL)[(i // 3) % 2]
        out.append(random_qbf(3000 + i, n, m, alt, lead=lead))
    return out


def criterion_3() -> Outcome:
    corpus = qbf_corpus()
    t0 = time.perf_counter()
    agree = sum(check(r.structure, r.formula).holds is qbf_solve(q) for q in corpus for r in [reduce_qbf_acyclic(q)])
    dt = time.perf_counter() - t0
    leads = {q.quantifiers[0] for q in corpus}
    ref = reduce_qbf_acyclic(reference_qbf())
    ref_holds = check(ref.structure, ref.formula).holds
    ok = agree == len(corpus) and dt < 300 and len(leads) == 2 and len(ref.structure) == 61 and ref_holds
    detail = (
        f"{agree}/{len(corpus)} agree, {dt:.2f}s (limit 300s), both leads={len(leads) == 2}; "
        f"reference QBF: {len(ref.structure)} states, verdict={ref_holds}, oracle={qbf_solve(reference_qbf())}"
    )
    return Outcome(3, "QBF via acyclic reduction", ok, detail)


def criterion_4() -> Outcome:
    corpus = qbf_corpus()
    agree = shape = 0
    for q in corpus:
        r = reduce_qbf_tree(q)
        agree += check(r.structure, r.formula).holds is qbf_solve(q)
        shape += len(r.structure) == 3 and classify_frame(r.structure) is FrameClass.TREE
    ok = agree == shape == len(corpus)
    return Outcome(4, "QBF via tree reduction", ok, f"{agree}/{len(corpus)} agree, {shape}/{len(corpus)} are 3-state trees")


# ---------------------------------------------------------------------------
# 5 and 6. self-composition and parallel paths


def criterion_5(count: int = 220) -> Outcome:
    rng = random.Random(5005)
    agree = products_ok = 0
    for _ in range(count):
        k = random_acyclic_structure(rng, max_states=8)
        f = random_formula(rng, max_quants=3, depth=4, alternation_free=True)
        agree += check_selfcomp(k, f).holds is check(k, f).holds
        products_ok += classify_frame(self_composition(k, len(f.prefix))) in ACYCLIC_CLASSES
    ok = agree == products_ok == count
    return Outcome(5, "self-composition", ok, f"{agree}/{count} agree, {products_ok}/{count} products acyclic")


def criterion_6(count: int = 220) -> Outcome:
    rng = random.Random(6006)
    agree = 0
    with ProcessPoolExecutor(2) as pool2, ProcessPoolExecutor(8) as pool8:
        pools = {1: None, 2: pool2, 8: pool8}
        for _ in range(count):
            k = random_acyclic_structure(rng, max_states=8)
            f = random_parallel_formula(rng, depth=4)
            expected = check(k, f).holds
            got = [check_parallel(k, f, w, executor=pool or "process").holds for w, pool in pools.items()]
            agree += got == [expected] * 3
    return Outcome(6, "parallel path", agree == count, f"{agree}/{count} agree across workers 1, 2, 8")


# ---------------------------------------------------------------------------
# 7. tree log versus minimized log


def criterion_7(count: int = 220) -> Outcome:
    rng = random.Random(7007)
    agree = smaller = same_set = 0
    for _ in range(count):
        traces = random_traces(rng, max_traces=10, max_len=6)
        f = random_formula(rng, depth=4)
        tree = build_tree(traces)
        dag = minimize_to_dag(tree)
        agree += check(tree, f).holds is check(dag, f).holds
        smaller += len(dag.structure) <= len(tree.structure)
        same_set += set(enumerate_traces(dag.structure)) == set(enumerate_traces(tree.structure)) == set(traces)
    ok = agree == smaller == same_set == count
    return Outcome(7, "representation independence", ok, f"verdicts {agree}/{count}, sizes {smaller}/{count}, trace sets {same_set}/{count}")


# ---------------------------------------------------------------------------
# 8. monitoring soundness


def criterion_8(count: int = 220) -> Outcome:
    rng = random.Random(8008)
    seq_ok = lock_ok = cache_ok = 0
    locks = 0
    for _ in range(count):
        f = random_formula(rng, props="ab", depth=3)
        root = random_letter(rng, "ab")
        batches = [[random_trace(rng, "ab", 5, first=root) for _ in range(rng.randint(1, 3))] for _ in range(rng.randint(2, 5))]
        warm = session_new(f, LogMode.TREE)
        cold = session_new(f, LogMode.DAG, use_cache=False)
        union: list[FiniteTrace] = []
        good_seq = good_cache = True
        for b in batches:
            union.extend(b)
            scratch = check(union, f).holds
            w, c = warm.ingest(b).holds, cold.ingest(b).holds
            good_seq &= w is scratch
            good_cache &= w is c
        seq_ok += good_seq
        cache_ok += good_cache
        # random extensions after a lock must keep agreeing with the locked value
        good_lock = True
        if warm.locked_verdict is not None:
            locks += 1
            for _ in range(3):
                union.extend(random_trace(rng, "ab", 5, first=root) for _ in range(rng.randint(1, 3)))
                good_lock &= check(union, f).holds is warm.locked_verdict
        lock_ok += good_lock
    ok = seq_ok == lock_ok == cache_ok == count
    detail = f"session=scratch {seq_ok}/{count}, locks sound {lock_ok}/{count} ({locks} locked), warm=cold {cache_ok}/{count}"
    return Outcome(8, "monitoring soundness", ok, detail)


# ---------------------------------------------------------------------------
# 9. stutter invariance


def chains_structure(raw: list[list[frozenset]]) -> KripkeStructure:
    """Shared root plus one explicit state chain per raw (un-normalized) letter list."""
    labels = {"r": raw[0][0]}
    edges = []
    for i, letters in enumerate(raw):
        prev = "r"
        tail = letters[1:] or [letters[0]]
        for j, letter in enumerate(tail):
            s = f"t{i}_{j}"
            labels[s] = letter
            edges.append((prev, s))
            prev = s
        edges.append((prev, prev))
    return KripkeStructure.make(labels, "r", edges, ap="abc")


def criterion_9(count: int = 220) -> Outcome:
    rng = random.Random(9009)
    unchanged = 0
    for _ in range(count):
        traces = random_traces(rng, max_traces=6, max_len=5)
        f = random_formula(rng, depth=4)
        raw = [list(t.letters) for t in traces]
        stretched = [r + [r[-1]] * rng.randint(1, 3) if rng.random() < 0.6 else r for r in raw]
        base = check(traces, f).holds
        k = chains_structure(stretched)
        verdicts = [
            check([FiniteTrace(r) for r in stretched], f).holds,
            check(build_tree([FiniteTrace(r) for r in stretched]), f).holds,
            check(k, f).holds,
        ]
        if classify(f).alternation_free:
            verdicts.append(check_selfcomp(k, f).holds)
        unchanged += all(v is base for v in verdicts)
    return Outcome(9, "stutter invariance", unchanged == count, f"{unchanged}/{count} verdicts unchanged")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8, criterion_9]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i + 1}" for i in range(len(CRITERIA))])
def test_acceptance(criterion, capsys):
    outcome = criterion()
    _report(outcome, capsys)
    assert outcome.passed, outcome.line()


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    for r in results:
        _report(r)
    sys.exit(0 if all(r.passed for r in results) else 1)
