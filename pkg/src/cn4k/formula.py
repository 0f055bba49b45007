"""Formulas of the modal Nelson language: AST, concrete syntax, closure.

Concrete syntax (ASCII)::

    ~A      strong negation
    A & B   conjunction        (left-assoc)
    A | B   disjunction        (left-assoc)
    A -> B  implication        (right-assoc)
    []A     box
    <>A     diamond

Binding strength: ``~ [] <>``  >  ``&``  >  ``|``  >  ``->``.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator


class Polarity(enum.Enum):
    POS = "pos"
    NEG = "neg"

    def flip(self) -> "Polarity":
        return Polarity.NEG if self is Polarity.POS else Polarity.POS


class Formula:
    """Base class of all formula nodes. Instances are immutable and hashable."""

    __slots__ = ()

    def __str__(self) -> str:
        return render(self)

    # convenience constructors, handy in tests and generators
    def __invert__(self) -> "Neg":
        return Neg(self)

    def __and__(self, other: "Formula") -> "And":
        return And(self, other)

    def __or__(self, other: "Formula") -> "Or":
        return Or(self, other)

    def __rshift__(self, other: "Formula") -> "Impl":
        return Impl(self, other)


def _init_hash(obj, *parts) -> None:
    object.__setattr__(obj, "_h", hash((type(obj).__name__,) + parts))


@dataclass(frozen=True, slots=True, repr=False)
class Var(Formula):
    name: str
    _h: int = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        _init_hash(self, self.name)

    def __hash__(self):
        return self._h

    def __repr__(self):
        return f"Var({self.name!r})"


@dataclass(frozen=True, slots=True, repr=False)
class Neg(Formula):
    sub: Formula
    _h: int = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        _init_hash(self, self.sub)

    def __hash__(self):
        return self._h

    def __repr__(self):
        return f"Neg({self.sub!r})"


@dataclass(frozen=True, slots=True, repr=False)
class Box(Formula):
    sub: Formula
    _h: int = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        _init_hash(self, self.sub)

    def __hash__(self):
        return self._h

    def __repr__(self):
        return f"Box({self.sub!r})"


@dataclass(frozen=True, slots=True, repr=False)
class Dia(Formula):
    sub: Formula
    _h: int = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        _init_hash(self, self.sub)

    def __hash__(self):
        return self._h

    def __repr__(self):
        return f"Dia({self.sub!r})"


@dataclass(frozen=True, slots=True, repr=False)
class And(Formula):
    l: Formula
    r: Formula
    _h: int = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        _init_hash(self, self.l, self.r)

    def __hash__(self):
        return self._h

    def __repr__(self):
        return f"And({self.l!r}, {self.r!r})"


@dataclass(frozen=True, slots=True, repr=False)
class Or(Formula):
    l: Formula
    r: Formula
    _h: int = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        _init_hash(self, self.l, self.r)

    def __hash__(self):
        return self._h

    def __repr__(self):
        return f"Or({self.l!r}, {self.r!r})"


@dataclass(frozen=True, slots=True, repr=False)
class Impl(Formula):
    l: Formula
    r: Formula
    _h: int = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        _init_hash(self, self.l, self.r)

    def __hash__(self):
        return self._h

    def __repr__(self):
        return f"Impl({self.l!r}, {self.r!r})"


UNARY = (Neg, Box, Dia)
BINARY = (And, Or, Impl)


def iff(a: Formula, b: Formula) -> Formula:
    """``a <-> b`` as the conjunction of both implications (no primitive biconditional)."""
    return And(Impl(a, b), Impl(b, a))


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, Var):
        return ()
    if isinstance(f, UNARY):
        return (f.sub,)
    return (f.l, f.r)


def subformulas(f: Formula) -> set[Formula]:
    out: set[Formula] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g in out:
            continue
        out.add(g)
        stack.extend(children(g))
    return out


def variables(f: Formula) -> set[str]:
    return {g.name for g in subformulas(f) if isinstance(g, Var)}


def complexity(f: Formula) -> int:
    """Number of connectives; variables count 0."""
    if isinstance(f, Var):
        return 0
    return 1 + sum(complexity(c) for c in children(f))


def size(f: Formula) -> int:
    """Number of AST nodes (variables included)."""
    return 1 + sum(size(c) for c in children(f))


def is_negation_free(f: Formula) -> bool:
    return not any(isinstance(g, Neg) for g in subformulas(f))


def is_literal(f: Formula) -> bool:
    return isinstance(f, Var) or (isinstance(f, Neg) and isinstance(f.sub, Var))


def _negation_components(f: Formula) -> tuple[Formula, ...]:
    # formulas that left/right rules and modal projections derive from a negated formula
    if not isinstance(f, Neg):
        return ()
    g = f.sub
    if isinstance(g, Neg):
        return (g.sub,)
    if isinstance(g, (And, Or)):
        return (Neg(g.l), Neg(g.r))
    if isinstance(g, Impl):
        return (g.l, Neg(g.r))
    if isinstance(g, (Box, Dia)):
        return (Neg(g.sub),)
    return ()


def closure(f: Formula | list[Formula] | tuple[Formula, ...] | set[Formula]) -> frozenset[Formula]:
    """Finite universe of formulas a backward derivation from ``f`` can mention.

    Smallest set that contains every subformula, prefixes each negation-free
    member with one and with two ``~``, and contains the negated components
    (``~A``, ``~B`` of ``~(A & B)`` and so on) of every negated member.
    Accepts a single formula or a collection (the closure of a sequent).
    """
    roots = [f] if isinstance(f, Formula) else list(f)
    out: set[Formula] = set()
    todo: list[Formula] = list(roots)
    while todo:
        g = todo.pop()
        if g in out:
            continue
        out.add(g)
        todo.extend(children(g))
        todo.extend(_negation_components(g))
        if is_negation_free(g):
            todo.append(Neg(g))
            todo.append(Neg(Neg(g)))
    return frozenset(out)


# --------------------------------------------------------------------------
# concrete syntax
# --------------------------------------------------------------------------

class ParseError(ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        super().__init__(f"{message} at position {position}")
        self.message = message
        self.position = position
        self.text = text


_TOKEN_RE = re.compile(r"\s*(?:(->)|(\[\])|(<>)|([~&|()])|([A-Za-z][A-Za-z0-9_]*))")


def tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        tok = next(g for g in m.groups() if g is not None)
        tokens.append((tok, m.start(m.lastindex)))
        pos = m.end()
    tokens.append(("", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    def peek(self) -> str:
        return self.toks[self.i][0]

    def take(self) -> tuple[str, int]:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, msg: str):
        raise ParseError(msg, self.toks[self.i][1], self.text)

    def form(self) -> Formula:
        left = self.disj()
        if self.peek() == "->":
            self.take()
            return Impl(left, self.form())
        return left

    def disj(self) -> Formula:
        f = self.conj()
        while self.peek() == "|":
            self.take()
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.peek() == "&":
            self.take()
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        tok = self.peek()
        if tok == "~":
            self.take()
            return Neg(self.unary())
        if tok == "[]":
            self.take()
            return Box(self.unary())
        if tok == "<>":
            self.take()
            return Dia(self.unary())
        if tok == "(":
            self.take()
            f = self.form()
            if self.peek() != ")":
                self.fail("expected ')'")
            self.take()
            return f
        if tok and (tok[0].isalpha()):
            self.take()
            return Var(tok)
        if tok == "":
            self.fail("unexpected end of input")
        self.fail(f"unexpected token {tok!r}")


def parse(text: str) -> Formula:
    """Parse a formula; raises :class:`ParseError` carrying the offending position."""
    p = _Parser(text)
    f = p.form()
    if p.peek() != "":
        p.fail(f"unexpected token {p.peek()!r}")
    return f


_PREC = {Impl: 1, Or: 2, And: 3}


@lru_cache(maxsize=65536)
def render(f: Formula) -> str:
    if isinstance(f, Var):
        return f.name
    if isinstance(f, UNARY):
        op = {Neg: "~", Box: "[]", Dia: "<>"}[type(f)]
        sub = render(f.sub)
        if isinstance(f.sub, BINARY):
            sub = f"({sub})"
        return op + sub
    prec = _PREC[type(f)]
    left, right = render(f.l), render(f.r)
    if isinstance(f.l, BINARY) and (
        _PREC[type(f.l)] < prec or (_PREC[type(f.l)] == prec and isinstance(f, Impl))
    ):
        left = f"({left})"
    if isinstance(f.r, BINARY) and (
        _PREC[type(f.r)] < prec or (_PREC[type(f.r)] == prec and not isinstance(f, Impl))
    ):
        right = f"({right})"
    op = {And: "&", Or: "|", Impl: "->"}[type(f)]
    return f"{left} {op} {right}"


def sort_key(f: Formula) -> tuple[int, str]:
    return (size(f), render(f))


def iter_formulas(atoms: list[str], max_size: int) -> Iterator[Formula]:
    """All formulas over ``atoms`` with at most ``max_size`` nodes, by size."""
    by_size: dict[int, list[Formula]] = {1: [Var(a) for a in atoms]}
    for n in range(2, max_size + 1):
        level: list[Formula] = []
        for g in by_size[n - 1]:
            level.extend((Neg(g), Box(g), Dia(g)))
        for k in range(1, n - 1):
            for a in by_size[k]:
                for b in by_size[n - 1 - k]:
                    level.extend((And(a, b), Or(a, b), Impl(a, b)))
        by_size[n] = level
    for n in range(1, max_size + 1):
        yield from by_size[n]
