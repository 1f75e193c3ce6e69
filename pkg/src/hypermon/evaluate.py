"""Deciding ``T |= phi`` for finite trace sets.

The quantifier engine enumerates the trace set once per quantifier, from the
outside in, and short-circuits.  The innermost quantifier is evaluated for
all candidate traces at once: every sub-formula is computed backwards over
positions ``0..H`` as a list of integers whose bits are the candidate traces
("lanes").  Position ``H`` is the common tail where every trace stutters on
its last letter, so Until/F/G there reduce to their one-letter fixpoints.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence, Union

from .formula import (
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
    expand_derived,
    free_vars,
)
from .kripke import (
    FiniteTrace,
    FrameClass,
    GeneralFrameUnsupported,
    KripkeStructure,
    TraceLog,
    classify_frame,
    enumerate_traces,
)

__all__ = [
    "Verdict",
    "EvalCache",
    "EvalError",
    "EmptyTraceSet",
    "OracleGuardExceeded",
    "UnsupportedFragment",
    "TraceSource",
    "ltl_eval",
    "check",
    "brute_force_check",
    "resolve_traces",
    "LaneEvaluator",
    "EMPTY_SET_POLICIES",
]

EMPTY_SET_POLICIES = ("error", "vacuous")
BRUTE_FORCE_LIMIT = 10**6

TraceSource = Union[TraceLog, KripkeStructure, Sequence[FiniteTrace]]


class EvalError(ValueError):
    pass


class EmptyTraceSet(EvalError):
    pass


class OracleGuardExceeded(EvalError):
    pass


class UnsupportedFragment(EvalError):
    pass


@dataclass
class Verdict:
    holds: bool
    witness: dict[str, int] | None = None
    witness_traces: dict[str, FiniteTrace] | None = None
    stats: dict[str, int] = field(default_factory=lambda: {"tuples_evaluated": 0, "cache_hits": 0})

    def to_json(self) -> dict:
        return {"holds": self.holds, "witness": self.witness, "stats": dict(self.stats)}


class EvalCache:
    """Per-tuple body verdicts, keyed by (body, variable order, trace ids).

    A tuple's verdict does not depend on the rest of the trace set, so entries
    stay valid while a log grows.  Writes are idempotent; concurrent writers
    can only ever store the same value.
    """

    def __init__(self) -> None:
        self._tokens: dict[tuple, int] = {}
        self._data: dict[tuple, bool] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def token(self, body: Body, variables: tuple[str, ...]) -> int:
        key = (body, variables)
        with self._lock:
            return self._tokens.setdefault(key, len(self._tokens))

    def get(self, key: tuple) -> bool | None:
        return self._data.get(key)

    def put(self, key: tuple, value: bool) -> None:
        prev = self._data.setdefault(key, value)
        if prev != value:
            raise AssertionError(f"cache divergence for {key!r}")

    def __len__(self) -> int:
        return len(self._data)


# ---------------------------------------------------------------------------
# lane evaluator

Rows = list  # list[int], one lane mask per position


class _Ctx:
    __slots__ = ("H", "full", "lane_var", "lane_rows", "fixed", "memo")

    def __init__(self, H: int, full: int, lane_var: str | None, lane_rows, fixed: Mapping[str, FiniteTrace]):
        self.H = H
        self.full = full
        self.lane_var = lane_var
        self.lane_rows = lane_rows
        self.fixed = fixed
        self.memo: dict[tuple[str, str], Rows] = {}

    def atom(self, prop: str, var: str) -> Rows:
        key = (prop, var)
        rows = self.memo.get(key)
        if rows is None:
            if var == self.lane_var:
                rows = self.lane_rows(prop)
            else:
                try:
                    t = self.fixed[var]
                except KeyError:
                    raise EvalError(f"trace variable {var!r} is unbound") from None
                full = self.full
                rows = [full if prop in t[j] else 0 for j in range(self.H + 1)]
            self.memo[key] = rows
        return rows


def _compile(node: Body) -> Callable[[_Ctx], Rows]:
    if isinstance(node, TrueF):
        return lambda c: [c.full] * (c.H + 1)
    if isinstance(node, Atom):
        p, v = node.prop, node.var
        return lambda c: c.atom(p, v)
    if isinstance(node, Not):
        f = _compile(node.arg)
        return lambda c: [c.full ^ x for x in f(c)]
    if isinstance(node, Next):
        f = _compile(node.arg)

        def nxt(c: _Ctx) -> Rows:
            r = f(c)
            return r[1:] + r[-1:]

        return nxt
    if isinstance(node, Eventually):
        f = _compile(node.arg)

        def ev(c: _Ctx) -> Rows:
            r = f(c)
            out = r[:]
            for j in range(c.H - 1, -1, -1):
                out[j] |= out[j + 1]
            return out

        return ev
    if isinstance(node, Globally):
        f = _compile(node.arg)

        def gl(c: _Ctx) -> Rows:
            r = f(c)
            out = r[:]
            for j in range(c.H - 1, -1, -1):
                out[j] &= out[j + 1]
            return out

        return gl
    f, g = _compile(node.left), _compile(node.right)
    if isinstance(node, And):
        return lambda c: [x & y for x, y in zip(f(c), g(c))]
    if isinstance(node, Or):
        return lambda c: [x | y for x, y in zip(f(c), g(c))]
    if isinstance(node, Implies):
        return lambda c: [(c.full ^ x) | y for x, y in zip(f(c), g(c))]
    if isinstance(node, Iff):
        return lambda c: [c.full ^ (x ^ y) for x, y in zip(f(c), g(c))]
    if isinstance(node, (Until, WeakUntil)):
        weak = isinstance(node, WeakUntil)

        def until(c: _Ctx) -> Rows:
            a, b = f(c), g(c)
            H = c.H
            out = [0] * (H + 1)
            # tail letter loops forever: U needs b there, W accepts a as well
            r = b[H] | a[H] if weak else b[H]
            out[H] = r
            for j in range(H - 1, -1, -1):
                r = b[j] | (a[j] & r)
                out[j] = r
            return out

        return until
    raise TypeError(f"not a formula node: {node!r}")


class LaneEvaluator:
    """Evaluates one body over a fixed trace list.

    ``lanes(fixed)`` returns, for every trace in the list, whether the body
    holds when the innermost variable is bound to it and the other variables
    as in ``fixed``.
    """

    def __init__(self, body: Body, traces: Sequence[FiniteTrace], lane_var: str | None):
        self.body = body
        self.traces = list(traces)
        self.lane_var = lane_var
        self.fn = _compile(body)
        self.H = max((len(t) for t in self.traces), default=1) - 1
        self.full = (1 << len(self.traces)) - 1 if lane_var is not None else 1
        self._rows: dict[str, Rows] = {}

    def _lane_rows(self, prop: str) -> Rows:
        rows = self._rows.get(prop)
        if rows is None:
            rows = []
            for j in range(self.H + 1):
                m = 0
                for i, t in enumerate(self.traces):
                    if prop in t[j]:
                        m |= 1 << i
                rows.append(m)
            self._rows[prop] = rows
        return rows

    def mask(self, fixed: Mapping[str, FiniteTrace]) -> int:
        # the horizon must also cover the fixed traces; lane rows stutter past their own end
        H = max([self.H] + [len(t) - 1 for t in fixed.values()])
        lane_rows = self._lane_rows
        if H > self.H:
            pad = H - self.H

            def lane_rows(prop: str) -> Rows:
                r = self._lane_rows(prop)
                return r + r[-1:] * pad

        ctx = _Ctx(H, self.full, self.lane_var, lane_rows, fixed)
        return self.fn(ctx)[0]

    def lanes(self, fixed: Mapping[str, FiniteTrace]) -> list[bool]:
        m = self.mask(fixed)
        return [bool(m >> i & 1) for i in range(len(self.traces))]


def ltl_eval(body: Body, assignment: Mapping[str, FiniteTrace]) -> bool:
    """Truth of a quantifier-free body at position 0 under ``assignment``."""
    missing = free_vars(body) - set(assignment)
    if missing:
        raise EvalError(f"unbound trace variable(s): {', '.join(sorted(missing))}")
    traces = [t if isinstance(t, FiniteTrace) else FiniteTrace(t) for t in assignment.values()]
    bound = dict(zip(assignment, traces))
    H = max((len(t) for t in traces), default=1) - 1
    ctx = _Ctx(H, 1, None, None, bound)
    return bool(_compile(body)(ctx)[0])


# ---------------------------------------------------------------------------
# quantifier engine


def resolve_traces(source: TraceSource) -> tuple[list[FiniteTrace], list[int]]:
    """Trace list and stable trace ids for any accepted trace source."""
    if isinstance(source, TraceLog):
        return list(source.traces), list(range(len(source.traces)))
    if isinstance(source, KripkeStructure):
        if classify_frame(source) is FrameClass.GENERAL:
            raise GeneralFrameUnsupported("model checking needs a tree or acyclic frame")
        traces = list(enumerate_traces(source))
        return traces, list(range(len(traces)))
    out: list[FiniteTrace] = []
    seen: set[FiniteTrace] = set()
    for t in source:
        t = t if isinstance(t, FiniteTrace) else FiniteTrace(t)
        if t not in seen:
            seen.add(t)
            out.append(t)
    return out, list(range(len(out)))


def _empty_verdict(f: HyperFormula, empty_set: str) -> Verdict:
    if empty_set not in EMPTY_SET_POLICIES:
        raise ValueError(f"unknown empty-set policy {empty_set!r}")
    if empty_set == "error":
        raise EmptyTraceSet("the trace set is empty (use the 'vacuous' empty-set policy to allow this)")
    return Verdict(holds=f.prefix[0][0] is Quant.FORALL)


def outer_block(f: HyperFormula) -> int:
    """Length of the outermost maximal block of equal quantifiers."""
    n = 1
    while n < len(f.prefix) and f.prefix[n][0] is f.prefix[0][0]:
        n += 1
    return n


def check(
    source: TraceSource,
    f: HyperFormula,
    *,
    cache: EvalCache | None = None,
    empty_set: str = "error",
) -> Verdict:
    """Decide whether the traces of ``source`` satisfy ``f``.

    The witness binds the outermost quantifier block when it decides the
    verdict (an existential block that holds, or a universal block that
    fails); trace indices refer to insertion order for logs, enumeration
    order for structures and first occurrence for plain lists.
    """
    traces, ids = resolve_traces(source)
    return _check_traces(traces, ids, f, cache=cache, empty_set=empty_set)


def _check_traces(
    traces: list[FiniteTrace],
    ids: list[int],
    f: HyperFormula,
    *,
    cache: EvalCache | None,
    empty_set: str,
) -> Verdict:
    stats = {"tuples_evaluated": 0, "cache_hits": 0}
    if not f.prefix:
        ev = LaneEvaluator(f.body, [], None)
        stats["tuples_evaluated"] = 1
        return Verdict(bool(ev.mask({})), stats=stats)
    if not traces:
        v = _empty_verdict(f, empty_set)
        v.stats = stats
        return v

    variables = f.variables
    quants = [q for q, _ in f.prefix]
    depth = len(variables)
    block = outer_block(f)
    lane_var = variables[-1]
    ev = LaneEvaluator(f.body, traces, lane_var)
    token = cache.token(f.body, variables) if cache is not None else None
    T = len(traces)
    bound: list[int] = []
    witness: list[int] | None = None

    def innermost() -> list[bool]:
        if cache is not None:
            prefix = tuple(ids[i] for i in bound)
            keys = [(token, prefix + (ids[i],)) for i in range(T)]
            found = [cache.get(k) for k in keys]
            if all(x is not None for x in found):
                stats["cache_hits"] += T
                cache.hits += T
                return found  # type: ignore[return-value]
        fixed = {variables[k]: traces[i] for k, i in enumerate(bound)}
        res = ev.lanes(fixed)
        stats["tuples_evaluated"] += T
        if cache is not None:
            cache.misses += T
            for k, r in zip(keys, res):
                cache.put(k, r)
        return res

    def decide(level: int) -> bool:
        nonlocal witness
        want = quants[level] is Quant.EXISTS  # value that decides this level
        if level == depth - 1:
            res = innermost()
            for i, r in enumerate(res):
                if r is want:
                    if witness is None and level < block:
                        witness = bound + [i]
                    return want
            return not want
        for i in range(T):
            bound.append(i)
            r = decide(level + 1)
            bound.pop()
            if r is want:
                if witness is None and level == block - 1:
                    witness = bound + [i]
                return want
        return not want

    holds = decide(0)
    v = Verdict(holds, stats=stats)
    if witness is not None:
        v.witness = {variables[k]: ids[i] for k, i in enumerate(witness)}
        v.witness_traces = {variables[k]: traces[i] for k, i in enumerate(witness)}
    return v


# ---------------------------------------------------------------------------
# independent oracle


def _shift(assign: dict[str, tuple], i: int) -> dict[str, tuple]:
    return {v: t[min(i, len(t) - 1):] for v, t in assign.items()}


def _sat(node: Body, assign: dict[str, tuple]) -> bool:
    # direct transcription of the satisfaction relation over explicit suffixes
    if isinstance(node, TrueF):
        return True
    if isinstance(node, Atom):
        return node.prop in assign[node.var][0]
    if isinstance(node, Not):
        return not _sat(node.arg, assign)
    if isinstance(node, Or):
        return _sat(node.left, assign) or _sat(node.right, assign)
    if isinstance(node, Next):
        return _sat(node.arg, _shift(assign, 1))
    if isinstance(node, Until):
        # suffixes from the longest remaining length on are all identical
        horizon = max((len(t) for t in assign.values()), default=1)
        return any(
            _sat(node.right, _shift(assign, i)) and all(_sat(node.left, _shift(assign, j)) for j in range(i))
            for i in range(horizon)
        )
    raise TypeError(f"unexpected node after expansion: {node!r}")


def brute_force_check(traces: Iterable[FiniteTrace], f: HyperFormula) -> bool:
    """Reference semantics: no cache, no short-circuit, no dynamic programming."""
    uniq: list[tuple] = []
    for t in traces:
        t = t if isinstance(t, FiniteTrace) else FiniteTrace(t)
        if t.letters not in uniq:
            uniq.append(t.letters)
    if not uniq:
        raise EmptyTraceSet("brute-force oracle needs at least one trace")
    if len(uniq) ** len(f.prefix) > BRUTE_FORCE_LIMIT:
        raise OracleGuardExceeded(f"{len(uniq)}^{len(f.prefix)} assignments exceed the oracle limit")
    body = expand_derived(f.body)

    def quant(level: int, assign: dict[str, tuple]) -> bool:
        if level == len(f.prefix):
            return _sat(body, assign)
        q, var = f.prefix[level]
        results = [quant(level + 1, {**assign, var: t}) for t in uniq]
        return any(results) if q is Quant.EXISTS else all(results)

    return quant(0, {})
