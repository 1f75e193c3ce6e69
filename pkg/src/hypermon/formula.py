"""HyperLTL formulas: AST, concrete syntax, classification and duality.

Concrete syntax (quantifiers bind weakest)::

    forall p1. forall p2. (G (i@p1 <-> i@p2)) -> (G (o@p1 <-> o@p2))

Operator precedence, tightest first: ``! X F G``, ``U W`` (right-assoc),
``&``, ``|``, ``->`` (right-assoc), ``<->`` (right-assoc).
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterator, Union

__all__ = [
    "Quant",
    "TrueF",
    "Atom",
    "Not",
    "And",
    "Or",
    "Implies",
    "Iff",
    "Next",
    "Until",
    "WeakUntil",
    "Eventually",
    "Globally",
    "Body",
    "HyperFormula",
    "FragmentClass",
    "FormulaError",
    "FormulaSyntaxError",
    "TRUE",
    "FALSE",
    "parse_formula",
    "format_formula",
    "format_body",
    "classify",
    "dualize",
    "free_vars",
    "props",
    "nnf",
    "expand_derived",
    "conj",
    "disj",
    "IDENT_RE",
]

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class Quant(enum.Enum):
    FORALL = "forall"
    EXISTS = "exists"

    def flip(self) -> "Quant":
        return Quant.EXISTS if self is Quant.FORALL else Quant.FORALL


@dataclass(frozen=True)
class TrueF:
    pass


@dataclass(frozen=True)
class Atom:
    prop: str
    var: str


@dataclass(frozen=True)
class Not:
    arg: "Body"


@dataclass(frozen=True)
class And:
    left: "Body"
    right: "Body"


@dataclass(frozen=True)
class Or:
    left: "Body"
    right: "Body"


@dataclass(frozen=True)
class Implies:
    left: "Body"
    right: "Body"


@dataclass(frozen=True)
class Iff:
    left: "Body"
    right: "Body"


@dataclass(frozen=True)
class Next:
    arg: "Body"


@dataclass(frozen=True)
class Until:
    left: "Body"
    right: "Body"


@dataclass(frozen=True)
class WeakUntil:
    left: "Body"
    right: "Body"


@dataclass(frozen=True)
class Eventually:
    arg: "Body"


@dataclass(frozen=True)
class Globally:
    arg: "Body"


Body = Union[TrueF, Atom, Not, And, Or, Implies, Iff, Next, Until, WeakUntil, Eventually, Globally]

TRUE: Body = TrueF()
FALSE: Body = Not(TRUE)

_UNARY = (Not, Next, Eventually, Globally)
_BINARY = (And, Or, Implies, Iff, Until, WeakUntil)


class FormulaError(ValueError):
    """Raised for ill-formed formulas (unbound or duplicate trace variables)."""


class FormulaSyntaxError(FormulaError):
    def __init__(self, message: str, offset: int, expected: tuple[str, ...] = ()):
        self.offset = offset
        self.expected = expected
        detail = f" (expected one of: {', '.join(expected)})" if expected else ""
        super().__init__(f"{message} at offset {offset}{detail}")


@dataclass(frozen=True)
class HyperFormula:
    prefix: tuple[tuple[Quant, str], ...]
    body: Body

    def __post_init__(self) -> None:
        names = [v for _, v in self.prefix]
        if len(set(names)) != len(names):
            dup = next(v for v in names if names.count(v) > 1)
            raise FormulaError(f"duplicate quantifier variable {dup!r}")
        unbound = free_vars(self.body) - set(names)
        if unbound:
            raise FormulaError(f"unbound trace variable(s): {', '.join(sorted(unbound))}")

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for _, v in self.prefix)

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class FragmentClass:
    """Quantifier pattern of a prefix.

    ``pattern`` is one of ``"exists_only"``, ``"forall_only"``, ``"EA"`` or
    ``"AE"``; the two alternating patterns carry their alternation depth.
    """

    pattern: str
    alternation_depth: int

    @property
    def alternation_free(self) -> bool:
        return self.alternation_depth == 0

    def __str__(self) -> str:
        if self.alternation_free:
            return self.pattern
        return f"{self.pattern}_{self.alternation_depth}"


# ---------------------------------------------------------------------------
# traversal helpers


def children(node: Body) -> tuple[Body, ...]:
    if isinstance(node, (TrueF, Atom)):
        return ()
    if isinstance(node, _UNARY):
        return (node.arg,)
    return (node.left, node.right)


def walk(node: Body) -> Iterator[Body]:
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(children(n)))


def free_vars(node: Body) -> set[str]:
    return {n.var for n in walk(node) if isinstance(n, Atom)}


def props(node: Body) -> set[str]:
    return {n.prop for n in walk(node) if isinstance(n, Atom)}


def conj(*parts: Body) -> Body:
    """Right-nested conjunction; ``TRUE`` for no parts."""
    if not parts:
        return TRUE
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = And(p, out)
    return out


def disj(*parts: Body) -> Body:
    if not parts:
        return FALSE
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Or(p, out)
    return out


def expand_derived(node: Body) -> Body:
    """Rewrite F, G and W into the core connectives (true, atoms, !, |, X, U).

    ``&``, ``->`` and ``<->`` are also reduced to ``!`` and ``|``.
    """
    if isinstance(node, (TrueF, Atom)):
        return node
    if isinstance(node, Not):
        return Not(expand_derived(node.arg))
    if isinstance(node, Next):
        return Next(expand_derived(node.arg))
    if isinstance(node, Eventually):
        return Until(TRUE, expand_derived(node.arg))
    if isinstance(node, Globally):
        return Not(Until(TRUE, Not(expand_derived(node.arg))))
    a, b = expand_derived(node.left), expand_derived(node.right)
    if isinstance(node, Or):
        return Or(a, b)
    if isinstance(node, And):
        return Not(Or(Not(a), Not(b)))
    if isinstance(node, Implies):
        return Or(Not(a), b)
    if isinstance(node, Iff):
        return Or(Not(Or(Not(a), Not(b))), Not(Or(a, b)))
    if isinstance(node, Until):
        return Until(a, b)
    if isinstance(node, WeakUntil):
        return Or(Until(a, b), Not(Until(TRUE, Not(a))))
    raise TypeError(f"not a formula node: {node!r}")


def nnf(node: Body, negate: bool = False) -> Body:
    """Negation normal form; negations end up on atoms and ``true`` only.

    Uses the finite-word-with-stutter dualities: ``!X a == X !a``,
    ``!(a U b) == (!b W (!a & !b))`` and ``!(a W b) == (!b U (!a & !b))``.
    """
    if isinstance(node, (TrueF, Atom)):
        return Not(node) if negate else node
    if isinstance(node, Not):
        return nnf(node.arg, not negate)
    if isinstance(node, Next):
        return Next(nnf(node.arg, negate))
    if isinstance(node, Eventually):
        return Globally(nnf(node.arg, True)) if negate else Eventually(nnf(node.arg))
    if isinstance(node, Globally):
        return Eventually(nnf(node.arg, True)) if negate else Globally(nnf(node.arg))
    if isinstance(node, And):
        cls = Or if negate else And
        return cls(nnf(node.left, negate), nnf(node.right, negate))
    if isinstance(node, Or):
        cls = And if negate else Or
        return cls(nnf(node.left, negate), nnf(node.right, negate))
    if isinstance(node, Implies):
        if negate:
            return And(nnf(node.left), nnf(node.right, True))
        return Or(nnf(node.left, True), nnf(node.right))
    if isinstance(node, Iff):
        pos = Or(And(nnf(node.left), nnf(node.right)), And(nnf(node.left, True), nnf(node.right, True)))
        neg = Or(And(nnf(node.left), nnf(node.right, True)), And(nnf(node.left, True), nnf(node.right)))
        return neg if negate else pos
    if isinstance(node, Until):
        if negate:
            nb = nnf(node.right, True)
            return WeakUntil(nb, And(nnf(node.left, True), nb))
        return Until(nnf(node.left), nnf(node.right))
    if isinstance(node, WeakUntil):
        if negate:
            nb = nnf(node.right, True)
            return Until(nb, And(nnf(node.left, True), nb))
        return WeakUntil(nnf(node.left), nnf(node.right))
    raise TypeError(f"not a formula node: {node!r}")


# ---------------------------------------------------------------------------
# classification and duality


def classify(f: HyperFormula) -> FragmentClass:
    kinds = [q for q, _ in f.prefix]
    if not kinds:
        return FragmentClass("forall_only", 0)
    switches = sum(1 for a, b in zip(kinds, kinds[1:]) if a is not b)
    if switches == 0:
        return FragmentClass("exists_only" if kinds[0] is Quant.EXISTS else "forall_only", 0)
    return FragmentClass("EA" if kinds[0] is Quant.EXISTS else "AE", switches)


def dualize(f: HyperFormula) -> HyperFormula:
    """Flip every quantifier and negate the body.

    A body that is already a negation is unwrapped instead, so dualizing twice
    gives back the original formula.
    """
    body = f.body.arg if isinstance(f.body, Not) else Not(f.body)
    return HyperFormula(tuple((q.flip(), v) for q, v in f.prefix), body)


# ---------------------------------------------------------------------------
# formatting

_BIN_SYMBOL = {And: "&", Or: "|", Implies: "->", Iff: "<->", Until: "U", WeakUntil: "W"}
_UN_SYMBOL = {Not: "!", Next: "X", Eventually: "F", Globally: "G"}


def format_body(node: Body) -> str:
    if isinstance(node, TrueF):
        return "true"
    if isinstance(node, Atom):
        return f"{node.prop}@{node.var}"
    if isinstance(node, _UNARY):
        sym = _UN_SYMBOL[type(node)]
        inner = format_body(node.arg)
        return f"{sym}{inner}" if sym == "!" else f"{sym} {inner}"
    return f"({format_body(node.left)} {_BIN_SYMBOL[type(node)]} {format_body(node.right)})"


def format_formula(f: HyperFormula) -> str:
    quants = "".join(f"{q.value} {v}. " for q, v in f.prefix)
    return quants + format_body(f.body)


# ---------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<op><->|->|[!&|().@])|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<bad>\S))"
)
_KEYWORD_UNARY = {"X": Next, "F": Eventually, "G": Globally}
_KEYWORD_BINARY = {"U": Until, "W": WeakUntil}


@dataclass
class _Tok:
    kind: str  # "op" | "ident" | "eof"
    text: str
    offset: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            break
        if m.group("bad") is not None:
            raise FormulaSyntaxError(f"unexpected character {m.group('bad')!r}", m.start("bad"))
        kind = "op" if m.group("op") is not None else "ident"
        toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, allow_reserved: bool):
        self.toks = _tokenize(text)
        self.i = 0
        self.allow_reserved = allow_reserved

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> _Tok:
        if self.tok.text != text or self.tok.kind == "eof":
            raise FormulaSyntaxError(f"unexpected {self._describe()}", self.tok.offset, (repr(text),))
        return self.advance()

    def _describe(self) -> str:
        return "end of input" if self.tok.kind == "eof" else repr(self.tok.text)

    def ident(self, what: str) -> str:
        if self.tok.kind != "ident":
            raise FormulaSyntaxError(f"unexpected {self._describe()}", self.tok.offset, (what,))
        return self.advance().text

    # formula := quant* body
    def formula(self) -> HyperFormula:
        prefix: list[tuple[Quant, str]] = []
        seen: set[str] = set()
        while self.tok.kind == "ident" and self.tok.text in ("forall", "exists") and self.peek().kind == "ident":
            q = Quant(self.advance().text)
            off = self.tok.offset
            var = self.ident("trace variable")
            if var in seen:
                raise FormulaError(f"duplicate quantifier variable {var!r} at offset {off}")
            seen.add(var)
            self.expect(".")
            prefix.append((q, var))
        body = self.iff()
        if self.tok.kind != "eof":
            raise FormulaSyntaxError(
                f"unexpected {self._describe()}", self.tok.offset, ("'&'", "'|'", "'->'", "'<->'", "'U'", "'W'", "end of input")
            )
        unbound = sorted(free_vars(body) - seen)
        if unbound:
            raise FormulaError(f"unbound trace variable(s): {', '.join(unbound)}")
        return HyperFormula(tuple(prefix), body)

    def iff(self) -> Body:
        left = self.impl()
        if self.tok.text == "<->" and self.tok.kind == "op":
            self.advance()
            return Iff(left, self.iff())
        return left

    def impl(self) -> Body:
        left = self.or_()
        if self.tok.text == "->" and self.tok.kind == "op":
            self.advance()
            return Implies(left, self.impl())
        return left

    def or_(self) -> Body:
        node = self.and_()
        while self.tok.kind == "op" and self.tok.text == "|":
            self.advance()
            node = Or(node, self.and_())
        return node

    def and_(self) -> Body:
        node = self.unt()
        while self.tok.kind == "op" and self.tok.text == "&":
            self.advance()
            node = And(node, self.unt())
        return node

    def unt(self) -> Body:
        left = self.un()
        if self.tok.kind == "ident" and self.tok.text in _KEYWORD_BINARY and self.peek().text != "@":
            cls = _KEYWORD_BINARY[self.advance().text]
            return cls(left, self.unt())
        return left

    def un(self) -> Body:
        t = self.tok
        if t.kind == "op" and t.text == "!":
            self.advance()
            return Not(self.un())
        if t.kind == "ident" and t.text in _KEYWORD_UNARY and self.peek().text != "@":
            self.advance()
            return _KEYWORD_UNARY[t.text](self.un())
        return self.atom()

    def atom(self) -> Body:
        t = self.tok
        if t.kind == "op" and t.text == "(":
            self.advance()
            node = self.iff()
            self.expect(")")
            return node
        if t.kind == "ident":
            if t.text in ("true", "false") and self.peek().text != "@":
                self.advance()
                return TRUE if t.text == "true" else FALSE
            prop = self.advance().text
            if prop.startswith("__") and not self.allow_reserved:
                raise FormulaSyntaxError(f"reserved proposition name {prop!r}", t.offset)
            self.expect("@")
            var = self.ident("trace variable")
            return Atom(prop, var)
        raise FormulaSyntaxError(
            f"unexpected {self._describe()}", t.offset, ("'('", "'!'", "'X'", "'F'", "'G'", "'true'", "'false'", "prop@var")
        )


def parse_formula(text: str, *, allow_reserved: bool = False) -> HyperFormula:
    """Parse a closed HyperLTL formula.

    Raises :class:`FormulaSyntaxError` (with the offending offset and expected
    tokens) for malformed text and :class:`FormulaError` for unbound or
    duplicated trace variables.
    """
    return _Parser(text, allow_reserved).formula()
