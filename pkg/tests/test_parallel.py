from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from generators import random_parallel_formula, random_traces
from hypermon.evaluate import UnsupportedFragment, brute_force_check, check
from hypermon.formula import parse_formula
from hypermon.kripke import build_tree
from hypermon.parallel import check_parallel, supports_parallel, tree_reduce
from hypermon.policies import load_policy


def test_tree_reduce():
    assert tree_reduce([], True) is True
    assert tree_reduce([], False) is False
    assert tree_reduce([True] * 7 + [False], True) is False
    assert tree_reduce([False] * 4 + [True], False) is True


def test_supported_fragments():
    assert supports_parallel(parse_formula("forall p1. forall p2. forall p3. a@p1"))
    assert supports_parallel(parse_formula("exists p1. forall p2. a@p1"))
    assert not supports_parallel(parse_formula("forall p1. forall p2. exists p3. a@p1"))
    with pytest.raises(UnsupportedFragment):
        check_parallel([], parse_formula("forall p1. exists p2. forall p3. a@p1"))


def test_obs_is_worker_independent():
    rng = random.Random(5)
    log = build_tree(random_traces(rng, props="io"))
    f = load_policy("obs")
    verdicts = {check_parallel(log, f, w).holds for w in (1, 4)}
    assert verdicts == {check(log, f).holds}


def test_sample_forall_exists(sample):
    f = parse_formula("forall p1. exists p2. a@p1 U b@p2")
    for w in (1, 2):
        assert check_parallel(sample, f, w).holds is check(sample, f).holds


def test_sample_forall_forall_counterexample(sample):
    v = check_parallel(sample, parse_formula("forall p1. forall p2. a@p1 U b@p2"), 2)
    assert v.holds is False
    assert v.witness is not None


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_matches_brute_force(seed):
    rng = random.Random(seed)
    traces = random_traces(rng, max_traces=6)
    f = random_parallel_formula(rng)
    with ThreadPoolExecutor(3) as pool:
        v = check_parallel(traces, f, 3, executor=pool)
    assert v.holds is brute_force_check(traces, f)
    assert v.holds is check_parallel(traces, f, 1).holds
