from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from generators import random_formula, random_letter, random_trace
from hypermon.evaluate import EmptyTraceSet, check
from hypermon.formula import FormulaError
from hypermon.kripke import FirstLetterMismatch, LogMode, parse_trace_line
from hypermon.monitor import Batch, current_verdict, ingest, session_new
from hypermon.policies import POLICIES

T = parse_trace_line


def test_observational_determinism_sequence():
    s = session_new(POLICIES["obs"], LogMode.TREE)
    assert s.ingest(Batch([T("i;i,o")])).holds is True
    v = s.ingest(Batch([T("i;i")]))
    assert v.holds is False
    assert s.locked_verdict is False
    third = s.ingest(Batch([T("i;o")]))
    assert third.holds is False
    assert third.stats["tuples_evaluated"] == 0
    assert third.witness == v.witness
    assert set(v.witness_traces.values()) == {T("i;i,o"), T("i;i")}
    report = s.report()
    assert report["holds"] is False and report["locked"] is True
    assert len(report["history"]) == 3


def test_fresh_sessions_follow_the_empty_set_flag():
    obs = session_new(POLICIES["obs"], LogMode.TREE, empty_set="vacuous")
    assert current_verdict(obs).holds is True
    ex = session_new("exists p. F x@p", LogMode.DAG, empty_set="vacuous")
    assert current_verdict(ex).holds is False
    with pytest.raises(EmptyTraceSet):
        current_verdict(session_new(POLICIES["obs"]))


def test_open_policy_is_rejected():
    with pytest.raises(FormulaError):
        session_new("forall p. a@q")


def test_root_letter_must_match():
    s = session_new("forall p. a@p")
    s.ingest([T("a;b")])
    with pytest.raises(FirstLetterMismatch):
        s.ingest([T("b")])
    assert len(s.log) == 1 and len(s.history) == 1


def test_duplicate_traces_change_nothing():
    s = ingest(session_new("forall p1. exists p2. G (a@p1 <-> !a@p2)"), Batch([T("a;.")]))
    before = len(s.log.structure)
    s.ingest([T("a;.;.")])
    assert len(s.log.structure) == before


def test_alternating_policies_never_lock():
    s = session_new("forall p1. exists p2. G (a@p1 <-> !a@p2)")
    assert s.ingest([T(".;a")]).holds is False
    assert s.ingest([T(".;.")]).holds is False
    assert s.locked_verdict is None


def test_parallel_session_agrees():
    a = session_new(POLICIES["obs"], workers=2)
    b = session_new(POLICIES["obs"])
    for batch in ([T("i;o")], [T("i;i,o"), T("i;.")]):
        assert a.ingest(batch).holds == b.ingest(batch).holds


def _random_batches(rng: random.Random):
    root = random_letter(rng, "ab")
    return [
        [random_trace(rng, "ab", 5, first=root) for _ in range(rng.randint(1, 3))] for _ in range(rng.randint(1, 4))
    ]


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_sessions_match_from_scratch_checks(seed):
    rng = random.Random(seed)
    f = random_formula(rng, props="ab", depth=3)
    sessions = [
        session_new(f, LogMode.TREE),
        session_new(f, LogMode.DAG),
        session_new(f, LogMode.TREE, use_cache=False),
    ]
    seen = []
    for batch in _random_batches(rng):
        seen.extend(batch)
        expected = check(seen, f).holds
        assert [s.ingest(batch).holds for s in sessions] == [expected] * 3
