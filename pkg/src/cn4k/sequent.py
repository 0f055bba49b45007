"""Single-succedent sequents, the rules of the five calculi, proof trees.

A proof tree node records its conclusion, the rule applied, the principal
formula (mandatory for left rules, defaults to the succedent for right
rules) and its premises. ``check_proof`` is strict about multiplicities:
no implicit weakening or contraction. ``weaken``/``contract``/``invert``
are the height-preserving transformations on such trees.
"""

from __future__ import annotations

import enum
import json
from collections import Counter
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path
from typing import Iterable

from .formula import And, Box, Dia, Formula, Impl, Neg, Or, ParseError, Var, parse, render
from .logics import LogicId


class ProofError(ValueError):
    pass


# --------------------------------------------------------------------------
# sequents
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Sequent:
    antecedent: tuple[Formula, ...]
    succedent: Formula

    def __post_init__(self):
        object.__setattr__(self, "antecedent", tuple(sorted(self.antecedent, key=render)))

    @classmethod
    def of(cls, antecedent: Iterable[Formula], succedent: Formula) -> "Sequent":
        return cls(tuple(antecedent), succedent)

    def counter(self) -> Counter:
        return Counter(self.antecedent)

    def count(self, f: Formula) -> int:
        return self.antecedent.count(f)

    def add(self, *fs: Formula) -> "Sequent":
        return Sequent(self.antecedent + fs, self.succedent)

    def remove(self, f: Formula) -> "Sequent":
        ant = list(self.antecedent)
        try:
            ant.remove(f)
        except ValueError:
            raise ProofError(f"{render(f)} not in antecedent of {self}") from None
        return Sequent(tuple(ant), self.succedent)

    def with_succedent(self, g: Formula) -> "Sequent":
        return Sequent(self.antecedent, g)

    def set_form(self) -> "Sequent":
        """The antecedent quotiented to a set."""
        return Sequent(tuple(dict.fromkeys(self.antecedent)), self.succedent)

    def formulas(self) -> tuple[Formula, ...]:
        return self.antecedent + (self.succedent,)

    def __str__(self) -> str:
        ant = ", ".join(render(f) for f in self.antecedent)
        return f"{ant} => {render(self.succedent)}" if ant else f"=> {render(self.succedent)}"


def parse_sequent(text: str) -> Sequent:
    """``"f1, f2 => g"``, ``"=> g"`` or a bare formula ``"g"``."""
    if "=>" in text:
        left, _, right = text.partition("=>")
        if "=>" in right:
            raise ParseError("more than one '=>'", len(left) + 2 + right.index("=>"), text)
        ant = []
        offset = 0
        for chunk in left.split(","):
            if chunk.strip():
                try:
                    ant.append(parse(chunk))
                except ParseError as e:
                    raise ParseError(e.message, offset + e.position, text) from None
            elif left.strip():
                raise ParseError("empty antecedent formula", offset, text)
            offset += len(chunk) + 1
        try:
            succ = parse(right)
        except ParseError as e:
            raise ParseError(e.message, len(left) + 2 + e.position, text) from None
        return Sequent.of(ant, succ)
    return Sequent((), parse(text))


def formula_interpretation(s: Sequent) -> Formula:
    """``A1 & ... & An -> B`` (left-nested conjunction); just ``B`` if empty."""
    if not s.antecedent:
        return s.succedent
    conj = s.antecedent[0]
    for f in s.antecedent[1:]:
        conj = And(conj, f)
    return Impl(conj, s.succedent)


def box_projection(gamma: Iterable[Formula]) -> list[Formula]:
    return [f.sub for f in gamma if isinstance(f, Box)]


def dia_neg_projection(gamma: Iterable[Formula]) -> list[Formula]:
    return [Neg(f.sub.sub) for f in gamma if isinstance(f, Neg) and isinstance(f.sub, Dia)]


# --------------------------------------------------------------------------
# rules
# --------------------------------------------------------------------------

class RuleId(enum.Enum):
    AX = "ax"
    AX_NEG = "ax_neg"
    NEGNEG_L = "negneg_l"
    NEGNEG_R = "negneg_r"
    AND_L = "and_l"
    AND_R = "and_r"
    OR_L = "or_l"
    OR_R1 = "or_r1"
    OR_R2 = "or_r2"
    NEG_OR_L = "neg_or_l"
    NEG_OR_R = "neg_or_r"
    NEG_AND_R1 = "neg_and_r1"
    NEG_AND_R2 = "neg_and_r2"
    NEG_AND_L = "neg_and_l"
    IMP_L = "imp_l"
    IMP_R = "imp_r"
    NEG_IMP_L = "neg_imp_l"
    NEG_IMP_R = "neg_imp_r"
    BOX = "box"
    DIA = "dia"
    BOX_NEG = "box_neg"
    DIA_NEG = "dia_neg"
    DIA_PM = "dia_pm"
    BOX_NEG_PM = "box_neg_pm"
    DIA_YV = "dia_yv"
    BOX_NEG_YV = "box_neg_yv"
    BOX_JOIN = "box_join"
    DIA_JOIN = "dia_join"
    BOX_NEG_JOIN = "box_neg_join"
    DIA_NEG_JOIN = "dia_neg_join"
    DIA_1 = "dia_1"
    BOX_NEG_1 = "box_neg_1"
    DIA_1_JOIN = "dia_1_join"
    BOX_NEG_1_JOIN = "box_neg_1_join"
    CUT = "cut"

    @classmethod
    def from_name(cls, name: str) -> "RuleId":
        try:
            return cls(name)
        except ValueError:
            raise ProofError(f"unknown rule {name!r}") from None

    @property
    def is_axiom(self) -> bool:
        return self in (RuleId.AX, RuleId.AX_NEG)

    @property
    def is_left(self) -> bool:
        return self in LEFT_RULES

    @property
    def is_right(self) -> bool:
        return self in RIGHT_RULES

    @property
    def is_modal(self) -> bool:
        return self in MODAL_RULES

    @property
    def arity(self) -> int:
        if self.is_axiom:
            return 0
        if self in (RuleId.AND_R, RuleId.OR_L, RuleId.NEG_OR_R, RuleId.NEG_AND_L,
                    RuleId.IMP_L, RuleId.NEG_IMP_R, RuleId.CUT):
            return 2
        return 1


LEFT_RULES = frozenset({
    RuleId.NEGNEG_L, RuleId.AND_L, RuleId.OR_L, RuleId.NEG_OR_L,
    RuleId.NEG_AND_L, RuleId.IMP_L, RuleId.NEG_IMP_L,
})
RIGHT_RULES = frozenset({
    RuleId.NEGNEG_R, RuleId.AND_R, RuleId.OR_R1, RuleId.OR_R2, RuleId.NEG_OR_R,
    RuleId.NEG_AND_R1, RuleId.NEG_AND_R2, RuleId.IMP_R, RuleId.NEG_IMP_R,
})
INVERTIBLE_LEFT = LEFT_RULES - {RuleId.IMP_L}
INVERTIBLE_RIGHT = RIGHT_RULES - {RuleId.OR_R1, RuleId.OR_R2, RuleId.NEG_AND_R1, RuleId.NEG_AND_R2}


@dataclass(frozen=True)
class ModalShape:
    left: str | None      # "dia" (<>A) or "negbox" (~[]A) in the antecedent, or None
    right: str            # "box", "dia", "negbox", "negdia" succedent shape
    box_context: bool     # premise receives the box projection of the context
    dianeg_context: bool  # premise receives the ~<> projection of the context


MODAL_SHAPES: dict[RuleId, ModalShape] = {
    RuleId.BOX: ModalShape(None, "box", True, False),
    RuleId.DIA: ModalShape("dia", "dia", False, False),
    RuleId.BOX_NEG: ModalShape("negbox", "negbox", False, False),
    RuleId.DIA_NEG: ModalShape(None, "negdia", False, True),
    RuleId.DIA_PM: ModalShape("dia", "dia", True, False),
    RuleId.BOX_NEG_PM: ModalShape("negbox", "negbox", False, True),
    RuleId.DIA_YV: ModalShape("dia", "dia", False, True),
    RuleId.BOX_NEG_YV: ModalShape("negbox", "negbox", True, False),
    RuleId.BOX_JOIN: ModalShape(None, "box", True, True),
    RuleId.DIA_JOIN: ModalShape("negbox", "dia", False, False),
    RuleId.BOX_NEG_JOIN: ModalShape("dia", "negbox", False, False),
    RuleId.DIA_NEG_JOIN: ModalShape(None, "negdia", True, True),
    RuleId.DIA_1: ModalShape("dia", "dia", True, True),
    RuleId.BOX_NEG_1: ModalShape("negbox", "negbox", True, True),
    RuleId.DIA_1_JOIN: ModalShape("negbox", "dia", True, True),
    RuleId.BOX_NEG_1_JOIN: ModalShape("dia", "negbox", True, True),
}
MODAL_RULES = frozenset(MODAL_SHAPES)

N4_RULES = frozenset({RuleId.AX, RuleId.AX_NEG}) | LEFT_RULES | RIGHT_RULES

RULES_OF: dict[LogicId, frozenset[RuleId]] = {
    LogicId.CN4K: N4_RULES | {RuleId.BOX, RuleId.DIA, RuleId.BOX_NEG, RuleId.DIA_NEG},
    LogicId.CN4K_YV: N4_RULES | {RuleId.BOX, RuleId.DIA_YV, RuleId.BOX_NEG_YV, RuleId.DIA_NEG},
    LogicId.CN4K_PM: N4_RULES | {RuleId.BOX, RuleId.DIA_PM, RuleId.BOX_NEG_PM, RuleId.DIA_NEG},
    LogicId.CN4K_JOIN: N4_RULES | {RuleId.BOX_JOIN, RuleId.DIA, RuleId.DIA_JOIN, RuleId.BOX_NEG,
                                   RuleId.BOX_NEG_JOIN, RuleId.DIA_NEG_JOIN},
    LogicId.CN4K_ONE: N4_RULES | {RuleId.BOX_JOIN, RuleId.DIA_1, RuleId.DIA_1_JOIN, RuleId.BOX_NEG_1,
                                  RuleId.BOX_NEG_1_JOIN, RuleId.DIA_NEG_JOIN},
}


def _unwrap(shape: str, f: Formula) -> Formula | None:
    """Body of ``f`` if it has the given modal shape."""
    if shape == "box":
        return f.sub if isinstance(f, Box) else None
    if shape == "dia":
        return f.sub if isinstance(f, Dia) else None
    if isinstance(f, Neg):
        if shape == "negbox" and isinstance(f.sub, Box):
            return f.sub.sub
        if shape == "negdia" and isinstance(f.sub, Dia):
            return f.sub.sub
    return None


def left_components(rule: RuleId, f: Formula) -> list[list[Formula]] | None:
    """Formulas replacing principal ``f`` in each premise of a left rule."""
    if rule is RuleId.NEGNEG_L and isinstance(f, Neg) and isinstance(f.sub, Neg):
        return [[f.sub.sub]]
    if rule is RuleId.AND_L and isinstance(f, And):
        return [[f.l, f.r]]
    if rule is RuleId.OR_L and isinstance(f, Or):
        return [[f.l], [f.r]]
    if rule is RuleId.IMP_L and isinstance(f, Impl):
        # left premise keeps the principal and has succedent f.l; see apply_rule
        return [[f], [f.r]]
    if isinstance(f, Neg):
        g = f.sub
        if rule is RuleId.NEG_OR_L and isinstance(g, Or):
            return [[Neg(g.l), Neg(g.r)]]
        if rule is RuleId.NEG_AND_L and isinstance(g, And):
            return [[Neg(g.l)], [Neg(g.r)]]
        if rule is RuleId.NEG_IMP_L and isinstance(g, Impl):
            return [[g.l, Neg(g.r)]]
    return None


def right_components(rule: RuleId, f: Formula) -> list[tuple[tuple[Formula, ...], Formula]] | None:
    """(added antecedent formulas, new succedent) for each premise of a right rule."""
    if rule is RuleId.NEGNEG_R and isinstance(f, Neg) and isinstance(f.sub, Neg):
        return [((), f.sub.sub)]
    if rule is RuleId.AND_R and isinstance(f, And):
        return [((), f.l), ((), f.r)]
    if rule is RuleId.OR_R1 and isinstance(f, Or):
        return [((), f.l)]
    if rule is RuleId.OR_R2 and isinstance(f, Or):
        return [((), f.r)]
    if rule is RuleId.IMP_R and isinstance(f, Impl):
        return [((f.l,), f.r)]
    if isinstance(f, Neg):
        g = f.sub
        if rule is RuleId.NEG_OR_R and isinstance(g, Or):
            return [((), Neg(g.l)), ((), Neg(g.r))]
        if rule is RuleId.NEG_AND_R1 and isinstance(g, And):
            return [((), Neg(g.l))]
        if rule is RuleId.NEG_AND_R2 and isinstance(g, And):
            return [((), Neg(g.r))]
        if rule is RuleId.NEG_IMP_R and isinstance(g, Impl):
            return [((), g.l), ((), Neg(g.r))]
    return None


def default_principal(rule: RuleId, s: Sequent) -> Formula | None:
    if rule.is_right or (rule.is_modal and MODAL_SHAPES[rule].left is None):
        return s.succedent
    if rule.is_axiom:
        return s.succedent
    return None


def apply_rule(rule: RuleId, principal: Formula | None, s: Sequent) -> list[Sequent] | None:
    """Premises of ``rule`` applied backwards to ``s`` at ``principal``; None if it does not match.

    Cut is not determined by its conclusion and is rejected here.
    """
    if principal is None:
        principal = default_principal(rule, s)
        if principal is None:
            return None
    if rule is RuleId.AX:
        if isinstance(principal, Var) and principal == s.succedent and principal in s.antecedent:
            return []
        return None
    if rule is RuleId.AX_NEG:
        if (isinstance(principal, Neg) and isinstance(principal.sub, Var)
                and principal == s.succedent and principal in s.antecedent):
            return []
        return None
    if rule.is_left:
        if principal not in s.antecedent:
            return None
        comps = left_components(rule, principal)
        if comps is None:
            return None
        if rule is RuleId.IMP_L:
            rest = s.remove(principal)
            return [s.with_succedent(principal.l), rest.add(principal.r)]
        rest = s.remove(principal)
        return [rest.add(*c) for c in comps]
    if rule.is_right:
        if principal != s.succedent:
            return None
        comps = right_components(rule, principal)
        if comps is None:
            return None
        return [Sequent(s.antecedent + added, succ) for added, succ in comps]
    if rule.is_modal:
        shape = MODAL_SHAPES[rule]
        body_r = _unwrap(shape.right, s.succedent)
        if body_r is None:
            return None
        ant: list[Formula] = []
        if shape.left is not None:
            if principal not in s.antecedent:
                return None
            body_l = _unwrap(shape.left, principal)
            if body_l is None:
                return None
            ant.append(body_l if shape.left == "dia" else Neg(body_l))
        elif principal != s.succedent:
            return None
        if shape.box_context:
            ant.extend(box_projection(s.antecedent))
        if shape.dianeg_context:
            ant.extend(dia_neg_projection(s.antecedent))
        succ = body_r if shape.right in ("box", "dia") else Neg(body_r)
        return [Sequent(tuple(ant), succ)]
    return None


def backward_instances(s: Sequent, logic: LogicId) -> list[tuple[RuleId, Formula, list[Sequent]]]:
    """Every rule application of ``logic`` (cut excluded) with conclusion ``s``."""
    out = []
    distinct = list(dict.fromkeys(s.antecedent))
    for rule in RuleId:
        if rule not in RULES_OF[logic]:
            continue
        if rule.is_axiom or rule.is_right or (rule.is_modal and MODAL_SHAPES[rule].left is None):
            candidates = [s.succedent]
        else:
            candidates = distinct
        for principal in candidates:
            prem = apply_rule(rule, principal, s)
            if prem is not None:
                out.append((rule, principal, prem))
    return out


# ⋖ on modal rules: same conclusion, premise a sub-multiset
_WEAKER_EDGES = [
    (RuleId.BOX, RuleId.BOX_JOIN),
    (RuleId.BOX_NEG_JOIN, RuleId.BOX_NEG_1_JOIN),
    (RuleId.DIA, RuleId.DIA_YV), (RuleId.DIA_YV, RuleId.DIA_1),
    (RuleId.BOX_NEG, RuleId.BOX_NEG_PM), (RuleId.BOX_NEG_PM, RuleId.BOX_NEG_1),
    (RuleId.DIA_NEG, RuleId.DIA_NEG_JOIN),
    (RuleId.DIA_JOIN, RuleId.DIA_1_JOIN),
    (RuleId.DIA, RuleId.DIA_PM), (RuleId.DIA_PM, RuleId.DIA_1),
    (RuleId.BOX_NEG, RuleId.BOX_NEG_YV), (RuleId.BOX_NEG_YV, RuleId.BOX_NEG_1),
]


def _weaker_closure() -> frozenset[tuple[RuleId, RuleId]]:
    rel = set(_WEAKER_EDGES)
    changed = True
    while changed:
        changed = False
        for a, b in list(rel):
            for c, d in list(rel):
                if b == c and (a, d) not in rel:
                    rel.add((a, d))
                    changed = True
    return frozenset(rel)


WEAKER = _weaker_closure()


def rule_order_weaker(a: RuleId, b: RuleId) -> bool:
    return (a, b) in WEAKER


# --------------------------------------------------------------------------
# proof trees
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ProofTree:
    sequent: Sequent
    rule: RuleId
    principal: Formula | None = None
    children: tuple["ProofTree", ...] = ()

    @cached_property
    def height(self) -> int:
        return 1 + max(c.height for c in self.children) if self.children else 0

    @cached_property
    def size(self) -> int:
        return 1 + sum(c.size for c in self.children)

    def nodes(self):
        stack = [self]
        while stack:
            t = stack.pop()
            yield t
            stack.extend(t.children)

    def uses(self, rule: RuleId) -> bool:
        return any(t.rule is rule for t in self.nodes())


class OccurrenceRole(enum.Enum):
    SIDE = "side"
    WEAK = "weak"
    PRINCIPAL = "principal"


def occurrence_roles(t: ProofTree) -> tuple[list[tuple[Formula, OccurrenceRole]], OccurrenceRole]:
    """Roles of the conclusion's antecedent occurrences, and of its succedent."""
    rule, s = t.rule, t.sequent
    principal = t.principal if t.principal is not None else default_principal(rule, s)
    roles = []
    taken = False
    if rule.is_axiom:
        for f in s.antecedent:
            if f == principal and not taken:
                roles.append((f, OccurrenceRole.PRINCIPAL))
                taken = True
            else:
                roles.append((f, OccurrenceRole.WEAK))
        return roles, OccurrenceRole.PRINCIPAL
    if rule.is_modal:
        shape = MODAL_SHAPES[rule]
        for f in s.antecedent:
            if shape.left is not None and f == principal and not taken:
                roles.append((f, OccurrenceRole.PRINCIPAL))
                taken = True
            elif shape.box_context and isinstance(f, Box):
                roles.append((f, OccurrenceRole.PRINCIPAL))
            elif shape.dianeg_context and isinstance(f, Neg) and isinstance(f.sub, Dia):
                roles.append((f, OccurrenceRole.PRINCIPAL))
            else:
                roles.append((f, OccurrenceRole.WEAK))
        return roles, OccurrenceRole.PRINCIPAL
    if rule.is_left:
        for f in s.antecedent:
            if f == principal and not taken:
                roles.append((f, OccurrenceRole.PRINCIPAL))
                taken = True
            else:
                roles.append((f, OccurrenceRole.SIDE))
        return roles, OccurrenceRole.SIDE
    side = OccurrenceRole.PRINCIPAL if rule.is_right else OccurrenceRole.SIDE
    return [(f, OccurrenceRole.SIDE) for f in s.antecedent], side


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    path: tuple[int, ...] = ()
    rule: RuleId | None = None
    reason: str = ""
    expected: tuple[str, ...] = ()
    found: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok

    def describe(self) -> str:
        if self.ok:
            return "ok"
        where = "root" if not self.path else "root/" + "/".join(map(str, self.path))
        msg = f"{where}: {self.reason}"
        if self.expected or self.found:
            msg += f"\n  expected: {list(self.expected)}\n  found:    {list(self.found)}"
        return msg


def _check_cut(t: ProofTree) -> str | None:
    if len(t.children) != 2:
        return "cut needs two premises"
    left, right = t.children[0].sequent, t.children[1].sequent
    cut = t.principal if t.principal is not None else left.succedent
    if left.succedent != cut:
        return f"left premise must conclude the cut formula {render(cut)}"
    if right.succedent != t.sequent.succedent:
        return "right premise must share the conclusion's succedent"
    if cut not in right.antecedent:
        return f"cut formula {render(cut)} missing from right premise antecedent"
    if left.counter() + (right.counter() - Counter([cut])) != t.sequent.counter():
        return "conclusion antecedent is not the union of the premise contexts"
    return None


def check_proof(t: ProofTree, logic: LogicId, allow_cut: bool = False) -> CheckResult:
    """Verify every node against the rules of ``logic``; first failure reported."""
    stack: list[tuple[ProofTree, tuple[int, ...]]] = [(t, ())]
    allowed = RULES_OF[logic]
    while stack:
        node, path = stack.pop()
        rule = node.rule
        if rule is RuleId.CUT:
            if not allow_cut:
                return CheckResult(False, path, rule, "cut is not a rule of the cut-free calculus")
            err = _check_cut(node)
            if err:
                return CheckResult(False, path, rule, err)
        else:
            if rule not in allowed:
                return CheckResult(False, path, rule, f"rule {rule.value} is not in the calculus for {logic.value}")
            if len(node.children) != rule.arity:
                return CheckResult(False, path, rule,
                               f"rule {rule.value} has {rule.arity} premise(s), node has {len(node.children)}")
            if rule.is_left and node.principal is None:
                return CheckResult(False, path, rule, "left rule without principal formula annotation")
            expected = apply_rule(rule, node.principal, node.sequent)
            if expected is None:
                what = "axiom" if rule.is_axiom else "rule"
                pr = render(node.principal) if node.principal is not None else "-"
                return CheckResult(False, path, rule,
                               f"{what} {rule.value} does not match {node.sequent} at principal {pr}")
            found = [c.sequent for c in node.children]
            if found != expected:
                return CheckResult(False, path, rule, f"premises do not match rule {rule.value}",
                               tuple(map(str, expected)), tuple(map(str, found)))
        for i, c in enumerate(node.children):
            stack.append((c, path + (i,)))
    return CheckResult(True)


# --------------------------------------------------------------------------
# constructions and transformations
# --------------------------------------------------------------------------

_DIA_RULE = {
    LogicId.CN4K: RuleId.DIA, LogicId.CN4K_JOIN: RuleId.DIA, LogicId.CN4K_PM: RuleId.DIA_PM,
    LogicId.CN4K_YV: RuleId.DIA_YV, LogicId.CN4K_ONE: RuleId.DIA_1,
}
_BOX_NEG_RULE = {
    LogicId.CN4K: RuleId.BOX_NEG, LogicId.CN4K_JOIN: RuleId.BOX_NEG, LogicId.CN4K_PM: RuleId.BOX_NEG_PM,
    LogicId.CN4K_YV: RuleId.BOX_NEG_YV, LogicId.CN4K_ONE: RuleId.BOX_NEG_1,
}


def _box_rule(logic: LogicId) -> RuleId:
    return RuleId.BOX_JOIN if logic in (LogicId.CN4K_JOIN, LogicId.CN4K_ONE) else RuleId.BOX


def _dia_neg_rule(logic: LogicId) -> RuleId:
    return RuleId.DIA_NEG_JOIN if logic in (LogicId.CN4K_JOIN, LogicId.CN4K_ONE) else RuleId.DIA_NEG


def _step(rule: RuleId, principal: Formula, s: Sequent, build) -> ProofTree:
    premises = apply_rule(rule, principal, s)
    assert premises is not None, (rule, s)
    return ProofTree(s, rule, principal, tuple(build(p) for p in premises))


def derive_general_axiom(f: Formula, gamma: Iterable[Formula] = (),
                         logic: LogicId = LogicId.CN4K) -> ProofTree:
    """A cut-free proof of ``gamma, f => f``, by induction on ``f``."""
    return _identity(Sequent.of(list(gamma) + [f], f), f, logic)


def _identity(s: Sequent, f: Formula, logic: LogicId) -> ProofTree:
    # s is  G, f => f
    def ident(g):
        return lambda p: _identity(p, g, logic)

    if isinstance(f, Var):
        return ProofTree(s, RuleId.AX, f)
    if isinstance(f, Neg) and isinstance(f.sub, Var):
        return ProofTree(s, RuleId.AX_NEG, f)
    if isinstance(f, And):
        return _step(RuleId.AND_L, f, s, lambda p: ProofTree(
            p, RuleId.AND_R, f, (_identity(p.with_succedent(f.l), f.l, logic),
                                 _identity(p.with_succedent(f.r), f.r, logic))))
    if isinstance(f, Or):
        prem = apply_rule(RuleId.OR_L, f, s)
        return ProofTree(s, RuleId.OR_L, f, (
            ProofTree(prem[0], RuleId.OR_R1, f, (_identity(prem[0].with_succedent(f.l), f.l, logic),)),
            ProofTree(prem[1], RuleId.OR_R2, f, (_identity(prem[1].with_succedent(f.r), f.r, logic),)),
        ))
    if isinstance(f, Impl):
        # G, f => f  <-imp_r-  G, f, A => B  <-imp_l-  (G, f, A => A) (G, B, A => B)
        inner = s.add(f.l).with_succedent(f.r)
        left, right = apply_rule(RuleId.IMP_L, f, inner)
        return ProofTree(s, RuleId.IMP_R, f, (ProofTree(inner, RuleId.IMP_L, f, (
            _identity(left, f.l, logic), _identity(right, f.r, logic))),))
    if isinstance(f, Box):
        return _step(_box_rule(logic), f, s, ident(f.sub))
    if isinstance(f, Dia):
        return _step(_DIA_RULE[logic], f, s, ident(f.sub))
    assert isinstance(f, Neg)
    g = f.sub
    if isinstance(g, Neg):
        return _step(RuleId.NEGNEG_L, f, s, lambda p: _step(
            RuleId.NEGNEG_R, f, p.with_succedent(f), ident(g.sub)))
    if isinstance(g, And):
        prem = apply_rule(RuleId.NEG_AND_L, f, s)
        return ProofTree(s, RuleId.NEG_AND_L, f, (
            _step(RuleId.NEG_AND_R1, f, prem[0], ident(Neg(g.l))),
            _step(RuleId.NEG_AND_R2, f, prem[1], ident(Neg(g.r))),
        ))
    if isinstance(g, Or):
        return _step(RuleId.NEG_OR_L, f, s, lambda p: ProofTree(p, RuleId.NEG_OR_R, f, (
            _identity(p.with_succedent(Neg(g.l)), Neg(g.l), logic),
            _identity(p.with_succedent(Neg(g.r)), Neg(g.r), logic))))
    if isinstance(g, Impl):
        return _step(RuleId.NEG_IMP_L, f, s, lambda p: ProofTree(p, RuleId.NEG_IMP_R, f, (
            _identity(p.with_succedent(g.l), g.l, logic),
            _identity(p.with_succedent(Neg(g.r)), Neg(g.r), logic))))
    if isinstance(g, Box):
        return _step(_BOX_NEG_RULE[logic], f, s, ident(Neg(g.sub)))
    if isinstance(g, Dia):
        return _step(_dia_neg_rule(logic), f, s, ident(Neg(g.sub)))
    raise TypeError(f"not a formula: {f!r}")


def weaken(t: ProofTree, f: Formula) -> ProofTree:
    """Proof of ``f, G => A`` from a proof of ``G => A``; height unchanged."""
    s = t.sequent.add(f)
    if t.rule.is_axiom:
        return replace(t, sequent=s)
    if t.rule is RuleId.CUT:
        left, right = t.children
        return ProofTree(s, RuleId.CUT, t.principal, (left, weaken(right, f)))
    premises = apply_rule(t.rule, t.principal, s)
    if premises is None:
        raise ProofError(f"cannot weaken node {t.rule.value} at {t.sequent}")
    return ProofTree(s, t.rule, t.principal,
                     tuple(weaken_to(c, p) for c, p in zip(t.children, premises)))


def weaken_to(t: ProofTree, target: Sequent) -> ProofTree:
    """Weaken ``t`` until it concludes ``target`` (a super-multiset, same succedent)."""
    if target.succedent != t.sequent.succedent:
        raise ProofError(f"cannot weaken {t.sequent} to {target}: succedents differ")
    missing = t.sequent.counter() - target.counter()
    if missing:
        raise ProofError(f"cannot weaken {t.sequent} to {target}: would drop formulas")
    for g in (target.counter() - t.sequent.counter()).elements():
        t = weaken(t, g)
    return t


def invert(t: ProofTree, f: Formula, rule: RuleId, index: int = 0) -> ProofTree:
    """Height-preserving inversion of left rule ``rule`` at antecedent formula ``f``.

    Returns a proof of the ``index``-th premise of ``rule`` applied to ``t``'s
    conclusion. For ``imp_l`` only the right premise (``index=1``) is
    invertible.
    """
    if rule not in INVERTIBLE_LEFT and not (rule is RuleId.IMP_L and index == 1):
        raise ProofError(f"{rule.value} is not invertible at premise {index}")
    comps = left_components(rule, f)
    if comps is None or f not in t.sequent.antecedent:
        raise ProofError(f"{rule.value} does not apply to {render(f)} in {t.sequent}")
    target = t.sequent.remove(f).add(*comps[index])
    return _invert(t, f, rule, index, target)


def _invert(t: ProofTree, f: Formula, rule: RuleId, index: int, target: Sequent) -> ProofTree:
    if t.rule.is_axiom:
        return replace(t, sequent=target)
    if t.rule is rule and t.principal == f:
        child = t.children[index]
        assert child.sequent == target
        return child
    if t.rule is RuleId.CUT:
        left, right = t.children
        cut = t.principal if t.principal is not None else left.sequent.succedent
        right_ctx = right.sequent.counter() - Counter([cut])
        if right_ctx[f]:
            new_right = invert(right, f, rule, index)
            return ProofTree(target, RuleId.CUT, t.principal, (left, new_right))
        new_left = invert(left, f, rule, index)
        return ProofTree(target, RuleId.CUT, t.principal, (new_left, right))
    premises = apply_rule(t.rule, t.principal, target)
    if premises is None:
        raise ProofError(f"cannot invert through {t.rule.value} at {t.sequent}")
    kids = []
    for c, p in zip(t.children, premises):
        if t.rule.is_modal:
            kids.append(weaken_to(c, p))
        else:
            kids.append(_invert(c, f, rule, index, p))
    return ProofTree(target, t.rule, t.principal, tuple(kids))


def contract(t: ProofTree, f: Formula) -> ProofTree:
    """Proof of ``f, G => A`` from a proof of ``f, f, G => A``; height does not grow."""
    if t.sequent.count(f) < 2:
        raise ProofError(f"contraction needs two copies of {render(f)} in {t.sequent}")
    s = t.sequent.remove(f)
    if t.rule.is_axiom:
        return replace(t, sequent=s)
    if t.rule is RuleId.CUT:
        left, right = t.children
        cut = t.principal if t.principal is not None else left.sequent.succedent
        right_ctx = right.sequent.counter() - Counter([cut])
        if right_ctx[f] >= 2:
            return ProofTree(s, RuleId.CUT, t.principal, (left, contract(right, f)))
        if left.sequent.count(f) >= 2:
            return ProofTree(s, RuleId.CUT, t.principal, (contract(left, f), right))
        raise ProofError("contraction across the two sides of a cut is not supported")
    premises = apply_rule(t.rule, t.principal, s)
    if premises is None:
        raise ProofError(f"cannot contract through {t.rule.value} at {t.sequent}")
    kids = []
    for i, (c, p) in enumerate(zip(t.children, premises)):
        surplus = c.sequent.counter() - p.counter()
        if p.counter() - c.sequent.counter():
            raise ProofError(f"unexpected premise shape under {t.rule.value}")
        for g in surplus.elements():
            if c.sequent.count(g) >= 2:
                c = contract(c, g)
            else:
                # g was consumed as principal by this very rule: invert the surviving copy
                c = invert(c, g, t.rule, i)
                for comp in left_components(t.rule, g)[i]:
                    c = contract(c, comp)
        kids.append(c)
    return ProofTree(s, t.rule, t.principal, tuple(kids))


# --------------------------------------------------------------------------
# certificate format
# --------------------------------------------------------------------------

CERTIFICATE_FORMAT = "cn4k-proof/1"


def proof_to_dict(t: ProofTree) -> dict:
    return {
        "sequent": {
            "antecedent": [render(f) for f in t.sequent.antecedent],
            "succedent": render(t.sequent.succedent),
        },
        "rule": t.rule.value,
        "principal": render(t.principal) if t.principal is not None else None,
        "children": [proof_to_dict(c) for c in t.children],
    }


def proof_from_dict(d: dict) -> ProofTree:
    try:
        seq = d["sequent"]
        if isinstance(seq, str):
            sequent = parse_sequent(seq)
        else:
            sequent = Sequent.of([parse(x) for x in seq["antecedent"]], parse(seq["succedent"]))
        rule = RuleId.from_name(d["rule"])
        raw = d.get("principal")
        if raw is None:
            principal = None
        elif isinstance(raw, int) and not isinstance(raw, bool):
            if not 0 <= raw < len(sequent.antecedent):
                raise ProofError(f"principal index {raw} out of range")
            principal = sequent.antecedent[raw]
        else:
            principal = parse(raw)
        children = tuple(proof_from_dict(c) for c in d.get("children", []))
    except (KeyError, TypeError) as e:
        raise ProofError(f"malformed proof node: {e}") from None
    return ProofTree(sequent, rule, principal, children)


def certificate(t: ProofTree, logic: LogicId) -> dict:
    return {"format": CERTIFICATE_FORMAT, "logic": logic.value, "proof": proof_to_dict(t)}


def load_certificate(path: str | Path) -> tuple[ProofTree, LogicId | None]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return read_certificate(data)


def read_certificate(data: dict) -> tuple[ProofTree, LogicId | None]:
    if "proof" in data:
        logic = LogicId.from_name(data["logic"]) if data.get("logic") else None
        return proof_from_dict(data["proof"]), logic
    return proof_from_dict(data), None


def dump_certificate(t: ProofTree, logic: LogicId) -> str:
    return json.dumps(certificate(t, logic), indent=1)
