from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from generators import random_acyclic_structure, random_formula
from hypermon.evaluate import UnsupportedFragment, check, ltl_eval
from hypermon.formula import parse_formula
from hypermon.kripke import KripkeStructure
from hypermon.selfcomp import check_selfcomp


def test_sample_eventually_b(sample):
    assert check_selfcomp(sample, parse_formula("exists p. F b@p")).holds is True


def test_sample_universal_through_the_dual(sample):
    assert check_selfcomp(sample, parse_formula("forall p. F b@p")).holds is True
    assert check_selfcomp(sample, parse_formula("exists p. G !b@p")).holds is False


def test_line_graph_reachability():
    k = KripkeStructure.make({0: {"s"}, 1: set(), 2: {"t"}}, 0, [(0, 1), (1, 2), (2, 2)])
    v = check_selfcomp(k, parse_formula("exists p. F (s@p & F t@p)"))
    assert v.holds is True
    assert v.witness == {"p": 0}


def test_sample_until_pair(sample):
    assert check_selfcomp(sample, parse_formula("forall p1. forall p2. a@p1 U b@p2")).holds is False
    v = check_selfcomp(sample, parse_formula("exists p1. exists p2. a@p1 U b@p2"))
    assert v.holds is True
    assert ltl_eval(parse_formula("exists p1. exists p2. a@p1 U b@p2").body, v.witness_traces)


def test_alternating_formula_is_rejected(sample):
    with pytest.raises(UnsupportedFragment):
        check_selfcomp(sample, parse_formula("forall p1. exists p2. a@p1 U b@p2"))


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_agrees_with_enumeration(seed):
    rng = random.Random(seed)
    k = random_acyclic_structure(rng, max_states=6)
    f = random_formula(rng, alternation_free=True, depth=3)
    v = check_selfcomp(k, f)
    assert v.holds is check(k, f).holds
    if v.witness_traces is not None:
        decisive = v.holds  # existential witness satisfies, universal counterexample violates
        assert ltl_eval(f.body, v.witness_traces) is decisive
