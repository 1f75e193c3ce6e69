"""Kripke structures over finite trace logs.

A finite trace ``u = l0 l1 ... ln`` stands for the infinite word
``l0 ... ln ln ln ...``; structures represent this by a self-loop on the
terminal state.  Tree-shaped logs share prefixes, DAG logs additionally share
suffixes.
"""

from __future__ import annotations

import enum
import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Iterator, Mapping, Sequence

from .formula import IDENT_RE

__all__ = [
    "Letter",
    "FiniteTrace",
    "KripkeStructure",
    "FrameClass",
    "LogMode",
    "TraceLog",
    "KripkeError",
    "InvalidStructure",
    "FirstLetterMismatch",
    "EmptyInput",
    "GeneralFrameUnsupported",
    "classify_frame",
    "build_tree",
    "minimize_to_dag",
    "enumerate_traces",
    "self_composition",
    "indexed_prop",
    "parse_trace_line",
    "parse_traces",
    "format_trace",
    "structure_to_json",
    "structure_from_json",
    "load_structure",
    "dump_structure",
]

StateId = Hashable
Letter = frozenset  # frozenset[str]


class KripkeError(ValueError):
    pass


class InvalidStructure(KripkeError):
    pass


class FirstLetterMismatch(KripkeError):
    def __init__(self, first: Letter, other: Letter):
        self.first, self.other = first, other
        super().__init__(
            f"traces must share their first letter: {_fmt_letter(first)} vs {_fmt_letter(other)}"
        )


class EmptyInput(KripkeError):
    pass


class GeneralFrameUnsupported(KripkeError):
    pass


def _fmt_letter(letter: Letter) -> str:
    return "{" + ",".join(sorted(letter)) + "}"


def _sort_key(state: StateId) -> tuple:
    # ints before strings; mixed id types still get a total order
    if isinstance(state, bool) or not isinstance(state, int):
        return (1, str(state))
    return (0, state)


@dataclass(frozen=True, init=False)
class FiniteTrace:
    """Finite letter sequence whose last letter repeats forever.

    Stored in stutter-normal form: trailing repetitions of the final letter
    are dropped, so ``a;b;b`` and ``a;b`` compare equal.
    """

    letters: tuple[Letter, ...]

    def __init__(self, letters: Iterable[Iterable[str]]):
        seq = [frozenset(l) for l in letters]
        if not seq:
            raise ValueError("a trace needs at least one letter")
        while len(seq) > 1 and seq[-1] == seq[-2]:
            seq.pop()
        object.__setattr__(self, "letters", tuple(seq))

    def __len__(self) -> int:
        return len(self.letters)

    def __getitem__(self, i: int) -> Letter:
        # positions past the end stutter on the final letter
        return self.letters[min(i, len(self.letters) - 1)]

    def __str__(self) -> str:
        return format_trace(self)

    def __repr__(self) -> str:
        return f"FiniteTrace({format_trace(self)!r})"


class FrameClass(str, enum.Enum):
    TREE = "tree"
    ACYCLIC = "acyclic"
    GENERAL = "general"


class LogMode(str, enum.Enum):
    TREE = "tree"
    DAG = "dag"


@dataclass(frozen=True)
class KripkeStructure:
    states: tuple[StateId, ...]
    init: StateId
    edges: frozenset[tuple[StateId, StateId]]
    labels: Mapping[StateId, Letter]
    ap: frozenset[str]
    _succ: dict = field(init=False, repr=False, compare=False, hash=False)
    _pred: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        state_set = set(self.states)
        if len(state_set) != len(self.states):
            raise InvalidStructure("duplicate state ids")
        if self.init not in state_set:
            raise InvalidStructure(f"initial state {self.init!r} is not a state")
        succ: dict = {s: [] for s in self.states}
        pred: dict = {s: [] for s in self.states}
        for a, b in self.edges:
            if a not in state_set or b not in state_set:
                raise InvalidStructure(f"edge ({a!r}, {b!r}) mentions an unknown state")
            succ[a].append(b)
            pred[b].append(a)
        for s in self.states:
            if not succ[s]:
                raise InvalidStructure(f"state {s!r} has no successor (transition relation must be total)")
            if s not in self.labels:
                raise InvalidStructure(f"state {s!r} has no label")
            if not self.labels[s] <= self.ap:
                extra = sorted(self.labels[s] - self.ap)
                raise InvalidStructure(f"state {s!r} is labelled with undeclared propositions {extra}")
            succ[s].sort(key=_sort_key)
            pred[s].sort(key=_sort_key)
        object.__setattr__(self, "_succ", {s: tuple(v) for s, v in succ.items()})
        object.__setattr__(self, "_pred", {s: tuple(v) for s, v in pred.items()})

    @classmethod
    def make(
        cls,
        labels: Mapping[StateId, Iterable[str]],
        init: StateId,
        edges: Iterable[tuple[StateId, StateId]],
        ap: Iterable[str] | None = None,
    ) -> "KripkeStructure":
        lab = {s: frozenset(v) for s, v in labels.items()}
        if ap is None:
            ap = set().union(*lab.values()) if lab else set()
        return cls(tuple(lab), init, frozenset((a, b) for a, b in edges), lab, frozenset(ap))

    def successors(self, s: StateId) -> tuple[StateId, ...]:
        return self._succ[s]

    def predecessors(self, s: StateId) -> tuple[StateId, ...]:
        return self._pred[s]

    def is_terminal(self, s: StateId) -> bool:
        return self._succ[s] == (s,)

    def __len__(self) -> int:
        return len(self.states)


def classify_frame(k: KripkeStructure) -> FrameClass:
    for s in k.states:
        if s in k.successors(s) and len(k.successors(s)) > 1:
            return FrameClass.GENERAL
    # Kahn's algorithm on the frame without self-loops
    indeg = {s: sum(1 for p in k.predecessors(s) if p != s) for s in k.states}
    queue = deque(s for s in k.states if indeg[s] == 0)
    seen = 0
    while queue:
        s = queue.popleft()
        seen += 1
        for t in k.successors(s):
            if t != s:
                indeg[t] -= 1
                if indeg[t] == 0:
                    queue.append(t)
    if seen != len(k.states):
        return FrameClass.GENERAL
    for s in k.states:
        preds = [p for p in k.predecessors(s) if p != s]
        if s == k.init:
            if preds:
                return FrameClass.ACYCLIC
        elif len(preds) != 1:
            return FrameClass.ACYCLIC
    return FrameClass.TREE


def enumerate_traces(k: KripkeStructure) -> Iterator[FiniteTrace]:
    """Yield every trace of ``k`` once, ordered by state path.

    Paths are explored depth first with successors in ascending state-id
    order; traces that stutter-normalize to an already yielded one are
    skipped.
    """
    if classify_frame(k) is FrameClass.GENERAL:
        raise GeneralFrameUnsupported("trace enumeration needs a tree or acyclic frame")
    for trace, _ in _enumerate_paths(k):
        yield trace


def _enumerate_paths(k: KripkeStructure) -> Iterator[tuple[FiniteTrace, tuple[StateId, ...]]]:
    seen: set[FiniteTrace] = set()
    stack: list[tuple[StateId, int]] = [(k.init, 0)]
    path: list[StateId] = []
    while stack:
        s, depth = stack.pop()
        del path[depth:]
        path.append(s)
        if k.is_terminal(s):
            t = FiniteTrace(k.labels[x] for x in path)
            if t not in seen:
                seen.add(t)
                yield t, tuple(path)
            continue
        for nxt in reversed(k.successors(s)):
            stack.append((nxt, depth + 1))


# ---------------------------------------------------------------------------
# trace logs


@dataclass(frozen=True)
class TraceLog:
    """A trace set together with the structure that stores it.

    ``traces[i]`` is the trace ingested i-th (after deduplication) and
    ``trace_paths[i]`` the state path that spells it, ending in a terminal
    state.
    """

    structure: KripkeStructure
    mode: LogMode
    traces: tuple[FiniteTrace, ...]
    trace_paths: tuple[tuple[StateId, ...], ...]

    @property
    def trace_ids(self) -> dict[int, tuple[StateId, ...]]:
        return dict(enumerate(self.trace_paths))

    def extend(self, traces: Iterable[FiniteTrace]) -> "TraceLog":
        merged = build_tree(list(self.traces) + list(traces))
        return minimize_to_dag(merged) if self.mode is LogMode.DAG else merged

    def __len__(self) -> int:
        return len(self.traces)


def _dedup(traces: Iterable[FiniteTrace]) -> list[FiniteTrace]:
    out: list[FiniteTrace] = []
    seen: set[FiniteTrace] = set()
    for t in traces:
        if not isinstance(t, FiniteTrace):
            t = FiniteTrace(t)
        if t not in seen:
            seen.add(t)
            out.append(t)
    return out


def build_tree(traces: Sequence[FiniteTrace]) -> TraceLog:
    """Assemble traces into a prefix tree.

    A trace that ends at a node which has further children continues into a
    child carrying the same letter, so every trace ends in a terminal leaf
    with a self-loop.
    """
    uniq = _dedup(traces)
    if not uniq:
        raise EmptyInput("cannot build a trace log from no traces")
    root_letter = uniq[0][0]
    for t in uniq[1:]:
        if t[0] != root_letter:
            raise FirstLetterMismatch(root_letter, t[0])

    labels: list[Letter] = [root_letter]
    children: list[dict[Letter, int]] = [{}]
    ends: list[bool] = [False]

    def child(node: int, letter: Letter) -> int:
        nxt = children[node].get(letter)
        if nxt is None:
            nxt = len(labels)
            labels.append(letter)
            children.append({})
            ends.append(False)
            children[node][letter] = nxt
        return nxt

    end_nodes: list[int] = []
    for t in uniq:
        node = 0
        for letter in t.letters[1:]:
            node = child(node, letter)
        ends[node] = True
        end_nodes.append(node)

    # push end markers down until they sit on childless nodes
    changed = True
    while changed:
        changed = False
        for node in range(len(labels)):
            if ends[node] and children[node]:
                ends[node] = False
                ends[child(node, labels[node])] = True
                changed = True

    edges = set()
    for node, ch in enumerate(children):
        for nxt in ch.values():
            edges.add((node, nxt))
        if not ch:
            edges.add((node, node))
    ap = frozenset().union(*labels)
    k = KripkeStructure(tuple(range(len(labels))), 0, frozenset(edges), dict(enumerate(labels)), ap)
    paths = tuple(_spell(k, t) for t in uniq)
    return TraceLog(k, LogMode.TREE, tuple(uniq), paths)


def _spell(k: KripkeStructure, t: FiniteTrace) -> tuple[StateId, ...]:
    """Find the first state path (in enumeration order) whose trace is ``t``."""
    n = len(t)

    def go(s: StateId, i: int) -> tuple[StateId, ...] | None:
        if k.labels[s] != t[i]:
            return None
        if k.is_terminal(s):
            return (s,) if i >= n - 1 else None
        for nxt in k.successors(s):
            rest = go(nxt, min(i + 1, n - 1) if i >= n - 1 else i + 1)
            if rest is not None:
                return (s,) + rest
        return None

    path = go(k.init, 0)
    if path is None:
        raise KripkeError(f"trace {t} is not a trace of the structure")
    return path


def minimize_to_dag(log: TraceLog) -> TraceLog:
    """Merge states with equal label and equal set of suffix traces.

    Classes are computed bottom-up: a terminal state is identified by its
    label, any other state by its label and the set of classes of its
    successors.  For prefix trees built by :func:`build_tree` siblings carry
    distinct letters, which makes this congruence coincide with suffix-trace
    equality.
    """
    k = log.structure
    order = _topological(k)
    cls: dict[StateId, int] = {}
    sigs: dict[tuple, int] = {}
    for s in reversed(order):
        if k.is_terminal(s):
            sig = (k.labels[s], None)
        else:
            sig = (k.labels[s], frozenset(cls[t] for t in k.successors(s)))
        cls[s] = sigs.setdefault(sig, len(sigs))
    # renumber classes in order of first appearance from the root (BFS)
    new_id: dict[int, int] = {}
    queue = deque([k.init])
    rep: dict[int, StateId] = {}
    visited = {k.init}
    while queue:
        s = queue.popleft()
        c = cls[s]
        if c not in new_id:
            new_id[c] = len(new_id)
            rep[c] = s
        for t in k.successors(s):
            if t not in visited:
                visited.add(t)
                queue.append(t)
    labels = {new_id[c]: k.labels[s] for c, s in rep.items()}
    edges = {(new_id[cls[a]], new_id[cls[b]]) for a, b in k.edges if cls[a] in new_id}
    dag = KripkeStructure(tuple(sorted(labels)), new_id[cls[k.init]], frozenset(edges), labels, k.ap)
    paths = tuple(tuple(new_id[cls[s]] for s in p) for p in log.trace_paths)
    return TraceLog(dag, LogMode.DAG, log.traces, paths)


def _topological(k: KripkeStructure) -> list[StateId]:
    indeg = {s: sum(1 for p in k.predecessors(s) if p != s) for s in k.states}
    queue = deque(sorted((s for s in k.states if indeg[s] == 0), key=_sort_key))
    out = []
    while queue:
        s = queue.popleft()
        out.append(s)
        for t in k.successors(s):
            if t != s:
                indeg[t] -= 1
                if indeg[t] == 0:
                    queue.append(t)
    if len(out) != len(k.states):
        raise GeneralFrameUnsupported("structure has a non-trivial cycle")
    return out


# ---------------------------------------------------------------------------
# self-composition


def indexed_prop(prop: str, i: int) -> str:
    """Name of proposition ``prop`` in the ``i``-th (1-based) component."""
    return f"{prop}__{i}"


def self_composition(k: KripkeStructure, n: int, *, reachable_only: bool = False) -> KripkeStructure:
    """n-fold synchronous product of ``k`` with itself.

    Product state ``(s1, ..., sn)`` is labelled ``{a__i | a in L(si)}``.  With
    ``reachable_only`` only states reachable from the initial tuple are built.
    """
    if n < 1:
        raise ValueError("self-composition needs n >= 1")

    def label(tup: tuple) -> Letter:
        return frozenset(indexed_prop(a, i + 1) for i, s in enumerate(tup) for a in k.labels[s])

    def succ(tup: tuple) -> Iterator[tuple]:
        return itertools.product(*(k.successors(s) for s in tup))

    init = (k.init,) * n
    if reachable_only:
        states = [init]
        seen = {init}
        edges = set()
        i = 0
        while i < len(states):
            tup = states[i]
            i += 1
            for nxt in succ(tup):
                edges.add((tup, nxt))
                if nxt not in seen:
                    seen.add(nxt)
                    states.append(nxt)
    else:
        ordered = sorted(k.states, key=_sort_key)
        states = list(itertools.product(ordered, repeat=n))
        edges = {(tup, nxt) for tup in states for nxt in succ(tup)}
    ap = frozenset(indexed_prop(a, i) for a in k.ap for i in range(1, n + 1))
    return KripkeStructure(tuple(states), init, frozenset(edges), {t: label(t) for t in states}, ap)


# ---------------------------------------------------------------------------
# text and JSON formats


def parse_trace_line(line: str) -> FiniteTrace:
    """Parse ``a;a,b;.`` style trace text (``.`` is the empty letter)."""
    letters = []
    for chunk in line.strip().split(";"):
        chunk = chunk.strip()
        if chunk == ".":
            letters.append(frozenset())
            continue
        names = [p.strip() for p in chunk.split(",")]
        for p in names:
            if not IDENT_RE.match(p):
                raise ValueError(f"bad proposition {p!r} in trace line {line.strip()!r}")
        letters.append(frozenset(names))
    return FiniteTrace(letters)


def parse_traces(text: str) -> list[FiniteTrace]:
    out = []
    for line in text.splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        out.append(parse_trace_line(line))
    return out


def format_trace(t: FiniteTrace) -> str:
    return ";".join(",".join(sorted(l)) if l else "." for l in t.letters)


def _json_id(s: StateId):
    if isinstance(s, tuple):
        return ",".join(str(_json_id(x)) for x in s)
    return s


def structure_to_json(k: KripkeStructure) -> dict:
    ordered = sorted(k.states, key=_sort_key)
    return {
        "ap": sorted(k.ap),
        "states": [{"id": _json_id(s), "props": sorted(k.labels[s])} for s in ordered],
        "init": _json_id(k.init),
        "edges": sorted(([_json_id(a), _json_id(b)] for a, b in k.edges), key=lambda e: (_sort_key(e[0]), _sort_key(e[1]))),
    }


def structure_from_json(doc: Mapping) -> KripkeStructure:
    try:
        labels = {st["id"]: frozenset(st.get("props", ())) for st in doc["states"]}
        edges = frozenset((a, b) for a, b in doc["edges"])
        ap = frozenset(doc.get("ap", set().union(*labels.values()) if labels else ()))
        return KripkeStructure(tuple(labels), doc["init"], edges, labels, ap)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, KripkeError):
            raise
        raise InvalidStructure(f"malformed structure JSON: {exc}") from exc


def dump_structure(k: KripkeStructure, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(structure_to_json(k), fh, indent=1)
        fh.write("\n")


def load_structure(path) -> KripkeStructure:
    with open(path, encoding="utf-8") as fh:
        return structure_from_json(json.load(fh))
