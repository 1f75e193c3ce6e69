from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from generators import random_formula
from hypermon.formula import (
    FALSE,
    TRUE,
    And,
    Atom,
    Eventually,
    FormulaError,
    FormulaSyntaxError,
    Globally,
    HyperFormula,
    Iff,
    Implies,
    Next,
    Not,
    Or,
    Quant,
    Until,
    WeakUntil,
    classify,
    dualize,
    expand_derived,
    format_body,
    format_formula,
    free_vars,
    nnf,
    parse_formula,
    walk,
)

OBS = "forall p1. forall p2. (G (i@p1 <-> i@p2)) -> (G (o@p1 <-> o@p2))"


def test_parse_observational_determinism():
    f = parse_formula(OBS)
    assert f.prefix == ((Quant.FORALL, "p1"), (Quant.FORALL, "p2"))
    assert f.body == Implies(
        Globally(Iff(Atom("i", "p1"), Atom("i", "p2"))),
        Globally(Iff(Atom("o", "p1"), Atom("o", "p2"))),
    )


def test_parse_reachability():
    f = parse_formula("exists p. F (s@p & F t@p)")
    assert f.prefix == ((Quant.EXISTS, "p"),)
    assert f.body == Eventually(And(Atom("s", "p"), Eventually(Atom("t", "p"))))


def test_unbound_variable_is_rejected():
    with pytest.raises(FormulaError, match="unbound"):
        parse_formula("forall p. a@q")


def test_duplicate_quantifier_is_rejected():
    with pytest.raises(FormulaError):
        parse_formula("forall p. exists p. a@p")


@pytest.mark.parametrize(
    "text",
    ["forall p. (a@p", "forall p. a@p &", "forall . a@p", "forall p. a@", "forall p. a@p b@p", ""],
)
def test_syntax_errors_carry_offset_and_expectation(text):
    with pytest.raises(FormulaSyntaxError) as info:
        parse_formula(text)
    assert 0 <= info.value.offset <= len(text)
    assert info.value.expected


def test_reserved_prefix_needs_opt_in():
    with pytest.raises(FormulaError):
        parse_formula("exists p. __x@p")
    assert parse_formula("exists p. __x@p", allow_reserved=True).body == Atom("__x", "p")


def test_precedence_and_associativity():
    body = parse_formula("exists p. !a@p & b@p | c@p -> a@p -> b@p").body
    assert body == Implies(
        Or(And(Not(Atom("a", "p")), Atom("b", "p")), Atom("c", "p")),
        Implies(Atom("a", "p"), Atom("b", "p")),
    )
    assert parse_formula("exists p. a@p U b@p U c@p").body == Until(Atom("a", "p"), Until(Atom("b", "p"), Atom("c", "p")))
    assert parse_formula("exists p. X a@p W b@p").body == WeakUntil(Next(Atom("a", "p")), Atom("b", "p"))


def test_keywords_may_be_propositions():
    body = parse_formula("exists p. X@p & F@p & true").body
    assert body == And(And(Atom("X", "p"), Atom("F", "p")), TRUE)
    assert parse_formula("exists p. false").body == FALSE


def test_format_examples():
    assert format_body(Atom("a", "p")) == "a@p"
    assert format_body(Until(Atom("a", "p1"), Atom("b", "p2"))) == "(a@p1 U b@p2)"
    assert format_formula(parse_formula(OBS)) == "forall p1. forall p2. (G (i@p1 <-> i@p2) -> G (o@p1 <-> o@p2))"


@pytest.mark.parametrize(
    "prefix, expected",
    [
        ("forall p1. forall p2.", ("forall_only", 0)),
        ("exists p1.", ("exists_only", 0)),
        ("forall p1. forall p2. exists p3.", ("AE", 1)),
        ("forall p1. exists p2. forall p3. exists p4.", ("AE", 3)),
        ("exists p1. forall p2.", ("EA", 1)),
    ],
)
def test_classify(prefix, expected):
    variables = [w.rstrip(".") for w in prefix.split() if w.startswith("p")]
    f = parse_formula(prefix + " " + " & ".join(f"a@{v}" for v in variables))
    fc = classify(f)
    assert (fc.pattern, fc.alternation_depth) == expected


def test_dualize_examples():
    f = parse_formula("forall p. forall q. a@p U b@q")
    d = dualize(f)
    assert d.prefix == ((Quant.EXISTS, "p"), (Quant.EXISTS, "q"))
    assert d.body == Not(f.body)
    g = parse_formula("exists p. a@p")
    assert dualize(g) == HyperFormula(((Quant.FORALL, "p"),), Not(Atom("a", "p")))


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_round_trip_and_dual_involution(seed):
    f = random_formula(random.Random(seed))
    assert parse_formula(format_formula(f)) == f
    # dualize strips one root negation instead of stacking another, so the
    # round trip is exact up to a leading double negation
    body = f.body
    if isinstance(body, Not) and isinstance(body.arg, Not):
        body = body.arg.arg
    assert dualize(dualize(f)) in (f, HyperFormula(f.prefix, body))
    assert free_vars(f.body) <= set(f.variables)


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_rewrites_keep_variables(seed):
    f = random_formula(random.Random(seed))
    for rewritten in (expand_derived(f.body), nnf(f.body)):
        assert free_vars(rewritten) == free_vars(f.body)
    basic = (Atom, Not, Or, Next, Until, type(TRUE))
    assert all(isinstance(n, basic) for n in walk(expand_derived(f.body)))
