"""QBF instances and their reductions to HyperLTL model checking.

Two gadgets are generated, each labelled with the QBF's truth value as
computed by an exhaustive game-tree oracle:

* :func:`reduce_qbf_acyclic` maps a CNF QBF to an acyclic structure with one
  branch per clause and a chain of diamonds encoding all assignments, plus a
  formula with one trace variable per alternation depth.
* :func:`reduce_qbf_tree` maps an arbitrary QBF to the fixed three-state tree
  ``{}{x}^w, {}{}^w`` with one trace variable per Boolean variable.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence, Union

from .formula import (
    TRUE,
    And,
    Atom,
    Body,
    Eventually,
    HyperFormula,
    Iff,
    Implies,
    Next,
    Not,
    Or,
    Quant,
    conj,
    disj,
)
from .kripke import KripkeStructure

__all__ = [
    "BVar",
    "BNot",
    "BAnd",
    "BOr",
    "BoolExpr",
    "Qbf",
    "QbfError",
    "ReductionOutput",
    "qbf_solve",
    "reduce_qbf_acyclic",
    "reduce_qbf_tree",
    "random_qbf",
    "acyclic_state_count",
    "acyclic_edge_count",
    "reference_qbf",
    "depth_prop",
]

QBF_VAR_LIMIT = 20


class QbfError(ValueError):
    pass


@dataclass(frozen=True)
class BVar:
    index: int  # 1-based


@dataclass(frozen=True)
class BNot:
    arg: "BoolExpr"


@dataclass(frozen=True)
class BAnd:
    args: tuple["BoolExpr", ...]


@dataclass(frozen=True)
class BOr:
    args: tuple["BoolExpr", ...]


BoolExpr = Union[BVar, BNot, BAnd, BOr]


def _beval(e: BoolExpr, assignment: Sequence[bool]) -> bool:
    if isinstance(e, BVar):
        return assignment[e.index - 1]
    if isinstance(e, BNot):
        return not _beval(e.arg, assignment)
    if isinstance(e, BAnd):
        return all(_beval(a, assignment) for a in e.args)
    return any(_beval(a, assignment) for a in e.args)


@dataclass(frozen=True)
class Qbf:
    """``Q1 x1 ... Qn xn. matrix`` with variables numbered from 1.

    The matrix is either a CNF (``clauses``: signed 1-based literals) or an
    arbitrary Boolean expression (``matrix``).
    """

    quantifiers: tuple[Quant, ...]
    clauses: tuple[tuple[int, ...], ...] | None = None
    matrix: BoolExpr | None = None

    def __post_init__(self) -> None:
        if (self.clauses is None) == (self.matrix is None):
            raise QbfError("give exactly one of clauses or matrix")
        n = len(self.quantifiers)
        for clause in self.clauses or ():
            for lit in clause:
                if lit == 0 or abs(lit) > n:
                    raise QbfError(f"literal {lit} out of range for {n} variables")

    @property
    def n(self) -> int:
        return len(self.quantifiers)

    @property
    def is_cnf(self) -> bool:
        return self.clauses is not None

    def body(self) -> BoolExpr:
        if self.matrix is not None:
            return self.matrix
        return BAnd(tuple(BOr(tuple(BVar(l) if l > 0 else BNot(BVar(-l)) for l in c)) for c in self.clauses))

    @property
    def alternations(self) -> int:
        q = self.quantifiers
        return sum(1 for a, b in zip(q, q[1:]) if a is not b)

    def depths(self) -> list[int]:
        """Alternation depth of each variable, starting at 1."""
        out, d = [], 1
        for i, q in enumerate(self.quantifiers):
            if i and q is not self.quantifiers[i - 1]:
                d += 1
            out.append(d)
        return out

    def __str__(self) -> str:
        pre = "".join(f"{'E' if q is Quant.EXISTS else 'A'}x{i + 1}." for i, q in enumerate(self.quantifiers))
        if self.clauses is not None:
            mat = " & ".join("(" + " | ".join(f"{'~' if l < 0 else ''}x{abs(l)}" for l in c) + ")" for c in self.clauses)
        else:
            mat = repr(self.matrix)
        return pre + " " + (mat or "true")


def qbf_solve(q: Qbf) -> bool:
    """Truth value by exhaustive game-tree search over the prefix."""
    if q.n > QBF_VAR_LIMIT:
        raise QbfError(f"{q.n} variables exceed the oracle limit of {QBF_VAR_LIMIT}")
    body = q.body()
    assignment = [False] * q.n

    def play(i: int) -> bool:
        if i == q.n:
            return _beval(body, assignment)
        results = []
        for value in (False, True):
            assignment[i] = value
            results.append(play(i + 1))
        assignment[i] = False
        return any(results) if q.quantifiers[i] is Quant.EXISTS else all(results)

    return play(0)


@dataclass(frozen=True)
class ReductionOutput:
    structure: KripkeStructure
    formula: HyperFormula
    ground_truth: bool
    reduction: str


# ---------------------------------------------------------------------------
# acyclic gadget


def depth_prop(d: int) -> str:
    return f"q__{d}"


def acyclic_state_count(n: int, m: int) -> int:
    return 1 + (m + 1) + 2 * n * m + 3 * n


def acyclic_edge_count(n: int, m: int) -> int:
    # init->r_j, r_j->v_1, v->u, u->v, clause self-loops, r_0->s/s', s/s'->s^, s^->s/s', s^_n loop
    return (m + 1) + m + n * m + (n - 1) * m + m + 2 + 2 * n + 2 * (n - 1) + 1


def reduce_qbf_acyclic(q: Qbf, *, depth_match: str = "both") -> ReductionOutput:
    """Acyclic structure and formula that hold iff the CNF QBF ``q`` is true.

    States: ``init``; ``r0`` heading the assignment chain
    ``s_i / sbar_i -> shat_i``; ``r{j}`` (labelled ``c``) heading clause
    branch ``v{j}_1 u{j}_1 ... v{j}_n u{j}_n``.  Position ``2i`` of every
    trace below ``r*`` talks about variable ``x_i``.

    One trace variable ``t{d}`` per alternation depth ``d`` is quantified like
    the QBF variables of that depth, followed by a universal ``c0`` ranging
    over clause traces.  Universal depths must pick assignment traces
    (premise), existential depths must too (conclusion), and every clause
    trace must meet some depth trace on a literal it satisfies.

    ``depth_match="both"`` requires the depth marker ``q__d`` on both traces
    at the meeting position.  ``"iff"`` only asks the two traces to agree on
    it, which lets a depth-``d`` trace satisfy literals of other depths; it
    is kept to demonstrate why that variant is unsound.
    """
    if not q.is_cnf:
        raise QbfError("the acyclic reduction needs a CNF matrix")
    if depth_match not in ("both", "iff"):
        raise ValueError(f"unknown depth_match {depth_match!r}")
    for clause in q.clauses:
        vs = [abs(l) for l in clause]
        if len(set(vs)) != len(vs):
            raise QbfError(f"clause {clause} mentions a variable twice")
    n, m = q.n, len(q.clauses)
    if n < 1:
        raise QbfError("the acyclic reduction needs at least one variable")
    d = q.depths()
    D = d[-1]

    labels: dict[str, set[str]] = {"init": set(), "r0": set()}
    edges: set[tuple[str, str]] = {("init", "r0"), ("r0", "s1"), ("r0", "sbar1")}
    for i in range(1, n + 1):
        qd = depth_prop(d[i - 1])
        labels[f"s{i}"] = {"p", qd}
        labels[f"sbar{i}"] = {"pbar", qd}
        labels[f"shat{i}"] = set()
        edges |= {(f"s{i}", f"shat{i}"), (f"sbar{i}", f"shat{i}")}
        if i < n:
            edges |= {(f"shat{i}", f"s{i + 1}"), (f"shat{i}", f"sbar{i + 1}")}
    edges.add((f"shat{n}", f"shat{n}"))
    for j, clause in enumerate(q.clauses, start=1):
        labels[f"r{j}"] = {"c"}
        edges |= {("init", f"r{j}"), (f"r{j}", f"v{j}_1")}
        pos = {l for l in clause if l > 0}
        neg = {-l for l in clause if l < 0}
        for i in range(1, n + 1):
            lab = {depth_prop(d[i - 1])}
            if i in pos:
                lab.add("p")
            if i in neg:
                lab.add("pbar")
            labels[f"v{j}_{i}"] = lab
            labels[f"u{j}_{i}"] = set()
            edges.add((f"v{j}_{i}", f"u{j}_{i}"))
            if i < n:
                edges.add((f"u{j}_{i}", f"v{j}_{i + 1}"))
        edges.add((f"u{j}_{n}", f"u{j}_{n}"))
    ap = {"c", "p", "pbar"} | {depth_prop(k) for k in range(1, D + 1)}
    k = KripkeStructure.make(labels, "init", edges, ap)

    depth_quant = {d[i]: q.quantifiers[i] for i in range(n)}
    var = {k_: f"t{k_}" for k_ in range(1, D + 1)}
    clause_var = "c0"

    def not_clause(v: str) -> Body:
        return Next(Not(Atom("c", v)))

    def meet(k_: int) -> Body:
        qd = depth_prop(k_)
        if depth_match == "both":
            marker = And(Atom(qd, var[k_]), Atom(qd, clause_var))
        else:
            marker = Iff(Atom(qd, var[k_]), Atom(qd, clause_var))
        lit = Or(
            And(Atom("p", clause_var), Atom("p", var[k_])),
            And(Atom("pbar", clause_var), Atom("pbar", var[k_])),
        )
        return And(marker, lit)

    universal = [k_ for k_ in range(1, D + 1) if depth_quant[k_] is Quant.FORALL]
    existential = [k_ for k_ in range(1, D + 1) if depth_quant[k_] is Quant.EXISTS]
    premise = conj(*[not_clause(var[k_]) for k_ in universal], Next(Atom("c", clause_var)))
    conclusion = conj(*[not_clause(var[k_]) for k_ in existential], Eventually(disj(*[meet(k_) for k_ in range(1, D + 1)])))
    prefix = tuple((depth_quant[k_], var[k_]) for k_ in range(1, D + 1)) + ((Quant.FORALL, clause_var),)
    formula = HyperFormula(prefix, Implies(premise, conclusion))
    return ReductionOutput(k, formula, qbf_solve(q), "acyclic")


# ---------------------------------------------------------------------------
# tree gadget


def _to_ltl(e: BoolExpr) -> Body:
    if isinstance(e, BVar):
        return Next(Atom("x", f"t{e.index}"))
    if isinstance(e, BNot):
        return Not(_to_ltl(e.arg))
    parts = [_to_ltl(a) for a in e.args]
    if isinstance(e, BAnd):
        return conj(*parts) if parts else TRUE
    return disj(*parts)


def reduce_qbf_tree(q: Qbf) -> ReductionOutput:
    """Three-state tree and a formula with the QBF's own prefix.

    Trace variable ``t{i}`` stands for ``x_i``: picking ``{}{x}^w`` sets it
    true, ``{}{}^w`` false; each ``x_i`` in the matrix becomes ``X x@t{i}``.
    """
    k = KripkeStructure.make(
        {"root": set(), "leaf_x": {"x"}, "leaf_empty": set()},
        "root",
        {("root", "leaf_x"), ("root", "leaf_empty"), ("leaf_x", "leaf_x"), ("leaf_empty", "leaf_empty")},
        {"x"},
    )
    prefix = tuple((qk, f"t{i + 1}") for i, qk in enumerate(q.quantifiers))
    formula = HyperFormula(prefix, _to_ltl(q.body()))
    return ReductionOutput(k, formula, qbf_solve(q), "tree")


# ---------------------------------------------------------------------------
# instances


def random_qbf(
    seed: int,
    n_vars: int,
    n_clauses: int,
    alternations: int,
    *,
    lead: Quant | None = None,
    clause_width: int = 3,
) -> Qbf:
    """Deterministic pseudorandom CNF QBF with exactly ``alternations`` switches.

    Block sizes are drawn at random (each block non-empty); the leading
    quantifier is random unless ``lead`` is given.  Clauses mention
    ``min(clause_width, n_vars)`` distinct variables with random signs.
    """
    if n_vars < 1 or n_clauses < 0 or alternations < 0:
        raise QbfError("n_vars must be positive, n_clauses and alternations non-negative")
    if alternations >= n_vars:
        raise QbfError(f"{alternations} alternations need more than {n_vars} variables")
    if n_vars > QBF_VAR_LIMIT:
        raise QbfError(f"at most {QBF_VAR_LIMIT} variables")
    rng = random.Random(seed)
    first = lead if lead is not None else rng.choice((Quant.EXISTS, Quant.FORALL))
    cuts = sorted(rng.sample(range(1, n_vars), alternations))
    quants = []
    kind = first
    for i in range(n_vars):
        if i in cuts:
            kind = kind.flip()
        quants.append(kind)
    width = min(clause_width, n_vars)
    clauses = []
    for _ in range(n_clauses):
        vs = rng.sample(range(1, n_vars + 1), width)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in sorted(vs)))
    return Qbf(tuple(quants), tuple(clauses))


def reference_qbf() -> Qbf:
    """The five-variable, four-clause instance with prefix E A E E A."""
    E, A = Quant.EXISTS, Quant.FORALL
    return Qbf((E, A, E, E, A), ((1, -2, 3), (-1, 2, -4), (-3, 4, -5), (1, 4, 5)))
