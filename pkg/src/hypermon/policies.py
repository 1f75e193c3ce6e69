"""Information-flow policies as propositional HyperLTL.

The conference-manager policies talk about a three-valued decision variable
``dec`` (acc/rej/undec) plus a dummy value.  Here it is bit-blasted into two
propositions::

    dec1 dec0
      0    0    dummy
      0    1    acc
      1    0    rej
      1    1    undec

``ses`` is the low output (submission assigned to a session).
"""

from __future__ import annotations

from .formula import HyperFormula, parse_formula

__all__ = ["POLICIES", "load_policy"]


def _dec_eq(a: str, b: str) -> str:
    return f"((dec0@{a} <-> dec0@{b}) & (dec1@{a} <-> dec1@{b}))"


def _is_dummy(v: str) -> str:
    return f"(!dec0@{v} & !dec1@{v})"


def _is_acc(v: str) -> str:
    return f"(dec0@{v} & !dec1@{v})"


def _is_rej(v: str) -> str:
    return f"(!dec0@{v} & dec1@{v})"


def _obj(a: str, b: str) -> str:
    return f"((F {_is_acc(a)} -> F {_is_acc(b)}) & (F {_is_rej(a)} -> F {_is_rej(b)}))"


POLICIES: dict[str, str] = {
    # observational determinism over low input i and low output o
    "obs": "forall p1. forall p2. (G (i@p1 <-> i@p2)) -> (G (o@p1 <-> o@p2))",
    # non-interference for deterministic systems: p2 is p1 with dec purged
    "gmni": (
        f"forall p1. forall p2. (G {_is_dummy('p2')} & G !{_dec_eq('p1', 'p2')})"
        " -> G (ses@p1 <-> ses@p2)"
    ),
    # generalized non-interference: p3 interleaves p1's high input and p2's low output
    "gni": f"forall p1. forall p2. exists p3. G {_dec_eq('p1', 'p3')} & G (ses@p2 <-> ses@p3)",
    "obj": f"forall p1. exists p2. {_obj('p1', 'p2')}",
    "ref": (
        f"forall p1. exists p2. forall p3. exists p4. {_obj('p1', 'p2')}"
        f" & G {_dec_eq('p4', 'p2')} & G (ses@p4 <-> ses@p3)"
    ),
    # reachability from s to t along one trace
    "reach": "exists p. F (s@p & F t@p)",
}


def load_policy(name: str) -> HyperFormula:
    try:
        return parse_formula(POLICIES[name])
    except KeyError:
        raise KeyError(f"unknown policy {name!r}; known: {', '.join(sorted(POLICIES))}") from None
