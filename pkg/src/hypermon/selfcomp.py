"""Alternation-free checking through self-composition.

``exists p1..pk. body`` holds on ``K`` iff some path of the k-fold product
satisfies the body with ``a@pi`` read as the product proposition ``a__i``.
The path search is a depth-first formula progression over (product state,
remaining obligation) pairs; universal formulas are decided through their
dual.
"""

from __future__ import annotations

from .formula import (
    FALSE,
    TRUE,
    And,
    Atom,
    Body,
    Eventually,
    Globally,
    HyperFormula,
    Iff,
    Implies,
    Next,
    Not,
    Or,
    Quant,
    TrueF,
    Until,
    WeakUntil,
    classify,
    dualize,
)
from .evaluate import UnsupportedFragment, Verdict
from .kripke import (
    FiniteTrace,
    FrameClass,
    GeneralFrameUnsupported,
    KripkeStructure,
    classify_frame,
    enumerate_traces,
    indexed_prop,
    self_composition,
)

__all__ = ["check_selfcomp", "progress", "tail_holds", "index_body", "UnsupportedFragment"]


def index_body(body: Body, variables: tuple[str, ...], var: str) -> Body:
    """Rename ``a@variables[i]`` to ``a__{i+1}@var``."""
    pos = {v: i + 1 for i, v in enumerate(variables)}

    def go(n: Body) -> Body:
        if isinstance(n, TrueF):
            return n
        if isinstance(n, Atom):
            return Atom(indexed_prop(n.prop, pos[n.var]), var)
        if isinstance(n, (Not, Next, Eventually, Globally)):
            return type(n)(go(n.arg))
        return type(n)(go(n.left), go(n.right))

    return go(body)


def _neg(a: Body) -> Body:
    if a == TRUE:
        return FALSE
    if a == FALSE:
        return TRUE
    if isinstance(a, Not):
        return a.arg
    return Not(a)


def _and(a: Body, b: Body) -> Body:
    if a == FALSE or b == FALSE:
        return FALSE
    if a == TRUE:
        return b
    if b == TRUE or a == b:
        return a
    return And(a, b)


def _or(a: Body, b: Body) -> Body:
    if a == TRUE or b == TRUE:
        return TRUE
    if a == FALSE:
        return b
    if b == FALSE or a == b:
        return a
    return Or(a, b)


def progress(node: Body, letter: frozenset) -> Body:
    """Obligation for the next position, given ``node`` must hold now."""
    if isinstance(node, TrueF):
        return TRUE
    if isinstance(node, Atom):
        return TRUE if node.prop in letter else FALSE
    if isinstance(node, Not):
        return _neg(progress(node.arg, letter))
    if isinstance(node, Next):
        return node.arg
    if isinstance(node, And):
        return _and(progress(node.left, letter), progress(node.right, letter))
    if isinstance(node, Or):
        return _or(progress(node.left, letter), progress(node.right, letter))
    if isinstance(node, Implies):
        return _or(_neg(progress(node.left, letter)), progress(node.right, letter))
    if isinstance(node, Iff):
        a, b = progress(node.left, letter), progress(node.right, letter)
        return _or(_and(a, b), _and(_neg(a), _neg(b)))
    if isinstance(node, Eventually):
        return _or(progress(node.arg, letter), node)
    if isinstance(node, Globally):
        return _and(progress(node.arg, letter), node)
    if isinstance(node, (Until, WeakUntil)):
        return _or(progress(node.right, letter), _and(progress(node.left, letter), node))
    raise TypeError(f"not a formula node: {node!r}")


def tail_holds(node: Body, letter: frozenset) -> bool:
    """Truth of ``node`` on the word ``letter`` repeated forever."""
    if isinstance(node, TrueF):
        return True
    if isinstance(node, Atom):
        return node.prop in letter
    if isinstance(node, Not):
        return not tail_holds(node.arg, letter)
    if isinstance(node, (Next, Globally)):
        return tail_holds(node.arg, letter)
    if isinstance(node, Eventually):
        return tail_holds(node.arg, letter)
    if isinstance(node, And):
        return tail_holds(node.left, letter) and tail_holds(node.right, letter)
    if isinstance(node, Or):
        return tail_holds(node.left, letter) or tail_holds(node.right, letter)
    if isinstance(node, Implies):
        return not tail_holds(node.left, letter) or tail_holds(node.right, letter)
    if isinstance(node, Iff):
        return tail_holds(node.left, letter) == tail_holds(node.right, letter)
    if isinstance(node, Until):
        return tail_holds(node.right, letter)
    if isinstance(node, WeakUntil):
        return tail_holds(node.right, letter) or tail_holds(node.left, letter)
    raise TypeError(f"not a formula node: {node!r}")


def _find_path(prod: KripkeStructure, body: Body) -> list | None:
    """First product path (in successor order) whose trace satisfies ``body``."""
    memo: dict[tuple, bool] = {}

    def search(state, obligation: Body) -> list | None:
        key = (state, obligation)
        if memo.get(key) is False:
            return None
        letter = prod.labels[state]
        if prod.is_terminal(state):
            ok = tail_holds(obligation, letter)
            memo[key] = ok
            return [state] if ok else None
        nxt = progress(obligation, letter)
        if nxt == FALSE:
            memo[key] = False
            return None
        for succ in prod.successors(state):
            rest = search(succ, nxt)
            if rest is not None:
                memo[key] = True
                return [state] + rest
        memo[key] = False
        return None

    return search(prod.init, body)


def check_selfcomp(k: KripkeStructure, f: HyperFormula) -> Verdict:
    """Decide an alternation-free formula on a tree or acyclic structure.

    Witness indices refer to :func:`~hypermon.kripke.enumerate_traces` order.
    """
    if not classify(f).alternation_free:
        raise UnsupportedFragment("self-composition only handles alternation-free formulas")
    if classify_frame(k) is FrameClass.GENERAL:
        raise GeneralFrameUnsupported("self-composition checking needs a tree or acyclic frame")
    if not f.prefix:
        return Verdict(tail_holds(f.body, frozenset()))
    universal = f.prefix[0][0] is Quant.FORALL
    g = dualize(f) if universal else f
    variables = g.variables
    n = len(variables)
    prod = self_composition(k, n, reachable_only=True)
    body = index_body(g.body, variables, variables[0])
    path = _find_path(prod, body)
    found = path is not None
    verdict = Verdict(holds=(not found) if universal else found)
    if found:
        comps = {
            v: FiniteTrace(k.labels[tup[i]] for tup in path) for i, v in enumerate(variables)
        }
        index: dict[FiniteTrace, int] = {}
        for i, t in enumerate(enumerate_traces(k)):
            index[t] = i
            if all(c in index for c in comps.values()):
                break
        verdict.witness = {v: index[t] for v, t in comps.items()}
        verdict.witness_traces = comps
    return verdict
