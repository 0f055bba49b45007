"""Terminating backward proof search for the five cut-free calculi.

The search runs on set-based sequents (antecedent as a frozenset) with a
per-branch loop check. Invertible rules are applied eagerly without
backtracking; the remaining choices (one-sided disjunction rules, ``imp_l``,
modal rules) are backtracked over. A proved sequent is turned back into a
multiset proof tree that passes ``check_proof``: each node applies its rule
to the set form of its sequent and duplicated premise formulas are put in
by the weakening transformation.

Why eager invertible steps keep the search complete: in a minimal-height
proof, an invertible premise has height no larger than its conclusion and a
strictly smaller multiset of formulas, while a non-invertible premise has
strictly smaller minimal height. Along the search path that follows a
minimal proof, that pair decreases lexicographically, so the loop check
never cuts it.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence, Union

from .formula import And, Formula, Impl, Neg, Or, closure, render
from .logics import LogicId
from .sequent import (
    MODAL_SHAPES,
    RULES_OF,
    ProofTree,
    RuleId,
    Sequent,
    apply_rule,
    backward_instances,
    check_proof,
    left_components,
    right_components,
    weaken_to,
)

SetSeq = tuple[frozenset, Formula]


class BudgetExhausted(Exception):
    pass


@dataclass
class SearchStats:
    nodes: int = 0
    cache_hits: int = 0
    loop_prunes: int = 0
    max_depth: int = 0

    def as_dict(self) -> dict:
        return {"nodes": self.nodes, "cache_hits": self.cache_hits,
                "loop_prunes": self.loop_prunes, "max_depth": self.max_depth}


@dataclass(frozen=True)
class Proved:
    tree: ProofTree
    stats: SearchStats = field(default_factory=SearchStats, compare=False)
    kind = "proved"


@dataclass(frozen=True)
class NotProvable:
    stats: SearchStats = field(default_factory=SearchStats, compare=False)
    kind = "not_provable"


@dataclass(frozen=True)
class BudgetExceeded:
    stats: SearchStats = field(default_factory=SearchStats, compare=False)
    kind = "budget_exceeded"


Verdict = Union[Proved, NotProvable, BudgetExceeded]


# order in which invertible rules are tried during saturation
_LEFT_PRIORITY = (RuleId.NEGNEG_L, RuleId.AND_L, RuleId.NEG_OR_L, RuleId.NEG_IMP_L,
                  RuleId.OR_L, RuleId.NEG_AND_L)
_RIGHT_PRIORITY = (RuleId.NEGNEG_R, RuleId.IMP_R, RuleId.AND_R, RuleId.NEG_OR_R, RuleId.NEG_IMP_R)
_NONINV_RIGHT = (RuleId.OR_R1, RuleId.OR_R2, RuleId.NEG_AND_R1, RuleId.NEG_AND_R2)


@dataclass(frozen=True)
class _Node:
    """Set-based proof: one rule application at a set sequent."""
    key: SetSeq
    rule: RuleId
    principal: Formula | None
    children: tuple["_Node", ...]


def _is_axiom(ant: frozenset, succ: Formula) -> RuleId | None:
    if succ in ant:
        if succ.__class__.__name__ == "Var":
            return RuleId.AX
        if isinstance(succ, Neg) and succ.sub.__class__.__name__ == "Var":
            return RuleId.AX_NEG
    return None


def _set_key(s: Sequent) -> SetSeq:
    return frozenset(s.antecedent), s.succedent


def _left_premises(rule: RuleId, g: Formula, ant: frozenset, succ: Formula) -> list[SetSeq] | None:
    comps = left_components(rule, g)
    if comps is None:
        return None
    if rule is RuleId.IMP_L:
        return [(ant, g.l), ((ant - {g}) | {g.r}, succ)]
    rest = ant - {g}
    return [(rest | frozenset(c), succ) for c in comps]


def _right_premises(rule: RuleId, ant: frozenset, succ: Formula) -> list[SetSeq] | None:
    comps = right_components(rule, succ)
    if comps is None:
        return None
    return [(ant | frozenset(added), s) for added, s in comps]


def _modal_premises(rule: RuleId, g: Formula | None, ant: frozenset, succ: Formula) -> list[SetSeq] | None:
    seq = Sequent(tuple(ant), succ)
    prem = apply_rule(rule, g, seq)
    if prem is None:
        return None
    return [_set_key(p) for p in prem]


class _Search:
    def __init__(self, logic: LogicId, budget: int | None, use_cache: bool,
                 universe: frozenset | None):
        self.logic = logic
        self.rules = RULES_OF[logic]
        self.modal = [r for r in RuleId if r in self.rules and r.is_modal]
        self.budget = budget
        self.use_cache = use_cache
        self.universe = universe
        self.stats = SearchStats()
        self.proved: dict[SetSeq, _Node] = {}
        self.failed: set[SetSeq] = set()

    def _tick(self, depth: int):
        self.stats.nodes += 1
        if depth > self.stats.max_depth:
            self.stats.max_depth = depth
        if self.budget is not None and self.stats.nodes > self.budget:
            raise BudgetExhausted

    def _invertible(self, ant: frozenset, succ: Formula):
        # first applicable invertible rule in priority order
        ordered = sorted(ant, key=render)
        for rule in _LEFT_PRIORITY:
            for g in ordered:
                prem = _left_premises(rule, g, ant, succ)
                if prem is not None:
                    return rule, g, prem
        for rule in _RIGHT_PRIORITY:
            prem = _right_premises(rule, ant, succ)
            if prem is not None:
                return rule, succ, prem
        return None

    def _choices(self, ant: frozenset, succ: Formula):
        out = []
        for rule in _NONINV_RIGHT:
            prem = _right_premises(rule, ant, succ)
            if prem is not None:
                out.append((rule, succ, prem))
        ordered = sorted(ant, key=render)
        for rule in self.modal:
            if MODAL_SHAPES[rule].left is None:
                prem = _modal_premises(rule, succ, ant, succ)
                if prem is not None:
                    out.append((rule, succ, prem))
            else:
                for g in ordered:
                    prem = _modal_premises(rule, g, ant, succ)
                    if prem is not None:
                        out.append((rule, g, prem))
        for g in ordered:
            if isinstance(g, Impl):
                out.append((RuleId.IMP_L, g, _left_premises(RuleId.IMP_L, g, ant, succ)))
        return out

    def prove(self, key: SetSeq, history: frozenset, depth: int) -> tuple[_Node | None, bool]:
        """(proof or None, whether the loop check influenced the outcome)."""
        hit = self.proved.get(key)
        if hit is not None:
            self.stats.cache_hits += 1
            return hit, False
        if self.use_cache and key in self.failed:
            self.stats.cache_hits += 1
            return None, False
        self._tick(depth)
        ant, succ = key
        if self.universe is not None:
            stray = [f for f in (*ant, succ) if f not in self.universe]
            assert not stray, f"formula outside the closure: {[render(f) for f in stray]}"
        ax = _is_axiom(ant, succ)
        if ax is not None:
            node = _Node(key, ax, succ, ())
            self._remember(key, node)
            return node, False
        inner = history | {key}
        inv = self._invertible(ant, succ)
        if inv is not None:
            rule, g, premises = inv
            node, touched = self._try(rule, g, premises, inner, depth, key)
        else:
            node, touched = None, False
            for rule, g, premises in self._choices(ant, succ):
                node, t = self._try(rule, g, premises, inner, depth, key)
                touched |= t
                if node is not None:
                    break
        if node is not None:
            self._remember(key, node)
        elif not touched:
            self.failed.add(key)
        return node, touched

    def _try(self, rule, g, premises, inner, depth, key):
        if any(p in inner for p in premises):
            self.stats.loop_prunes += 1
            return None, True
        kids = []
        touched = False
        # the right premise of imp_l is cheaper to refute; try it first
        order = range(len(premises))
        if rule is RuleId.IMP_L:
            order = (1, 0)
        results: dict[int, _Node] = {}
        for i in order:
            child, t = self.prove(premises[i], inner, depth + 1)
            touched |= t
            if child is None:
                return None, touched
            results[i] = child
        kids = [results[i] for i in range(len(premises))]
        return _Node(key, rule, g, tuple(kids)), touched

    def _remember(self, key, node):
        if self.use_cache:
            self.proved[key] = node


def _rebuild(node: _Node, memo: dict) -> ProofTree:
    """Multiset proof of the set form of ``node.key``."""
    hit = memo.get(node.key)
    if hit is not None:
        return hit
    ant, succ = node.key
    seq = Sequent(tuple(ant), succ)
    if node.rule.is_axiom:
        tree = ProofTree(seq, node.rule, node.principal)
    else:
        premises = apply_rule(node.rule, node.principal, seq)
        assert premises is not None, (node.rule, str(seq))
        kids = []
        for child, prem in zip(node.children, premises):
            kids.append(weaken_to(_rebuild(child, memo), prem))
        tree = ProofTree(seq, node.rule, node.principal, tuple(kids))
    memo[node.key] = tree
    return tree


def decide(s: Sequent, logic: LogicId, budget: int | None = None, *,
           use_cache: bool = True, check_closure: bool = False) -> Verdict:
    """Decide provability of ``s`` in the cut-free calculus of ``logic``.

    ``budget`` caps the number of expanded search nodes. ``use_cache=False``
    turns off the proved/failed tables (for differential testing).
    ``check_closure`` asserts that every visited formula lies in the closure
    of the root sequent.
    """
    universe = closure(list(s.formulas())) if check_closure else None
    search = _Search(logic, budget, use_cache, universe)
    key = _set_key(s)
    try:
        node, _ = search.prove(key, frozenset(), 0)
    except BudgetExhausted:
        return BudgetExceeded(search.stats)
    if node is None:
        return NotProvable(search.stats)
    tree = weaken_to(_rebuild(node, {}), s)
    return Proved(tree, search.stats)


def decide_formula(f: Formula, logic: LogicId, budget: int | None = None, **kw) -> Verdict:
    return decide(Sequent((), f), logic, budget, **kw)


def is_provable(s: Sequent | Formula, logic: LogicId, budget: int | None = None) -> bool:
    """True/False for Proved/NotProvable; raises if the budget runs out."""
    if isinstance(s, Formula):
        s = Sequent((), s)
    v = decide(s, logic, budget)
    if isinstance(v, BudgetExceeded):
        raise BudgetExhausted(str(s))
    return isinstance(v, Proved)


# --------------------------------------------------------------------------
# reference searches for differential testing
# --------------------------------------------------------------------------

def naive_decide(s: Sequent, logic: LogicId, budget: int | None = None) -> bool | None:
    """Exhaustive search over all regular derivations, no saturation, no caches.

    Returns None if ``budget`` nodes were not enough.
    """
    count = [0]

    def go(key: SetSeq, history: frozenset) -> bool:
        count[0] += 1
        if budget is not None and count[0] > budget:
            raise BudgetExhausted
        ant, succ = key
        seq = Sequent(tuple(ant), succ)
        inner = history | {key}
        for rule, _g, premises in backward_instances(seq, logic):
            pk = [_set_key(p) for p in premises]
            if any(p in inner for p in pk):
                continue
            if all(go(p, inner) for p in pk):
                return True
        return False

    try:
        return go(_set_key(s), frozenset())
    except BudgetExhausted:
        return None


def provable_within(s: Sequent, logic: LogicId, height: int) -> bool:
    """Is there a multiset proof of ``s`` of height at most ``height``?"""

    @lru_cache(maxsize=None)
    def go(seq: Sequent, h: int) -> bool:
        for rule, _g, premises in backward_instances(seq, logic):
            if rule.is_axiom:
                return True
            if h > 0 and all(go(p, h - 1) for p in premises):
                return True
        return False

    return go(s, height)


def minimal_height(s: Sequent, logic: LogicId, limit: int = 12) -> int | None:
    for h in range(limit + 1):
        if provable_within(s, logic, h):
            return h
    return None


# --------------------------------------------------------------------------
# harnesses for the meta-theorems
# --------------------------------------------------------------------------

def cut(left: ProofTree, right: ProofTree, cut_formula: Formula | None = None) -> ProofTree:
    """Join ``G => A`` and ``A, D => B`` into a cut-bearing proof of ``G, D => B``."""
    a = cut_formula if cut_formula is not None else left.sequent.succedent
    rest = right.sequent.remove(a)
    conclusion = Sequent(left.sequent.antecedent + rest.antecedent, right.sequent.succedent)
    return ProofTree(conclusion, RuleId.CUT, a, (left, right))


@dataclass
class CutReport:
    total: int = 0
    reproved: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.total == self.reproved and not self.failures


def cut_admissibility_harness(corpus: Iterable[tuple[ProofTree, LogicId]],
                              budget: int | None = None) -> CutReport:
    """Re-prove the conclusion of every cut-bearing proof without cut."""
    report = CutReport()
    for tree, logic in corpus:
        report.total += 1
        ok = check_proof(tree, logic, allow_cut=True)
        if not ok:
            report.failures.append((str(tree.sequent), logic.value, "input: " + ok.describe()))
            continue
        v = decide(tree.sequent, logic, budget)
        if isinstance(v, Proved) and check_proof(v.tree, logic):
            report.reproved += 1
        else:
            report.failures.append((str(tree.sequent), logic.value, v.kind))
    return report


def mp_by_cut(major: ProofTree, minor: ProofTree, logic: LogicId) -> ProofTree:
    """Simulate modus ponens: from ``=> A -> B`` and ``=> A`` build a cut proof of ``=> B``."""
    imp = major.sequent.succedent
    if major.sequent.antecedent or minor.sequent.antecedent or not isinstance(imp, Impl):
        raise ValueError("mp_by_cut needs proofs of => A -> B and => A")
    if minor.sequent.succedent != imp.l:
        raise ValueError("minor premise does not prove the antecedent")
    if major.rule is RuleId.IMP_R:
        body = major.children[0]
    else:
        v = decide(Sequent((imp.l,), imp.r), logic)
        if not isinstance(v, Proved):
            raise ValueError("A => B unexpectedly unprovable")
        body = v.tree
    return cut(minor, body, imp.l)


@dataclass(frozen=True)
class PropertyResult:
    formula: Formula
    provable_parts: tuple[str, ...]

    @property
    def violation(self) -> bool:
        return not self.provable_parts


def disjunction_property_check(f: Formula, logic: LogicId, budget: int | None = None) -> PropertyResult:
    """For a provable ``A | B``, which of ``A`` and ``B`` are provable."""
    if not isinstance(f, Or):
        raise ValueError("expected a disjunction")
    parts = tuple(side for side, g in (("left", f.l), ("right", f.r))
                  if is_provable(g, logic, budget))
    return PropertyResult(f, parts)


def constructive_falsity_check(f: Formula, logic: LogicId, budget: int | None = None) -> PropertyResult:
    """For a provable ``~(A & B)``, which of ``~A`` and ``~B`` are provable."""
    if not (isinstance(f, Neg) and isinstance(f.sub, And)):
        raise ValueError("expected a negated conjunction")
    parts = tuple(side for side, g in (("left", Neg(f.sub.l)), ("right", Neg(f.sub.r)))
                  if is_provable(g, logic, budget))
    return PropertyResult(f, parts)


def random_cut_corpus(formulas: Sequence[Formula], logic: LogicId, count: int, seed: int = 0,
                      budget: int = 20000) -> list[ProofTree]:
    """Cut-bearing proofs spliced from prover output at shared cut formulas.

    Left proofs conclude ``G => A`` for a random cut formula ``A``; right
    proofs use ``A`` in the antecedent. Only pairs where both sides are
    provable are kept.
    """
    rng = random.Random(seed)
    out: list[ProofTree] = []
    attempts = 0
    while len(out) < count and attempts < count * 200:
        attempts += 1
        a, b, c = (rng.choice(formulas) for _ in range(3))
        lefts = [Sequent((), a), Sequent((And(a, c),), a), Sequent((c, Impl(c, a)), a),
                 Sequent((Neg(Neg(a)),), a)]
        rights = [Sequent((a,), Or(b, a)), Sequent((a, Impl(a, b)), b), Sequent((a,), Impl(b, a)),
                  Sequent((a,), b), Sequent((a, c), And(a, c)), Sequent((a,), Neg(Neg(a)))]
        left_s, right_s = rng.choice(lefts), rng.choice(rights)
        lv = decide(left_s, logic, budget)
        if not isinstance(lv, Proved):
            continue
        rv = decide(right_s, logic, budget)
        if not isinstance(rv, Proved):
            continue
        out.append(cut(lv.tree, rv.tree, a))
    return out
