"""Hilbert calculi: axiom schemes, derivation checking, derived rules.

Derivation file format::

    logic: cn4k
    hyps: p, p -> q
    1. p ; hyp
    2. p -> q ; hyp
    3. q ; mp 1 2

Justifications: ``hyp``, ``ax <scheme>`` (or bare ``ax``), ``mp i j`` (line
``j`` must be ``line_i -> this``), and the modal rules ``r_box i``,
``r_dia i``, ``rn_box i``, ``rn_dia i``. Modal rules only accept lines that
do not depend on hypotheses.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .formula import And, Box, Dia, Formula, Impl, Neg, Or, ParseError, Var, parse, render
from .logics import LogicId


class HilbertFormatError(ValueError):
    pass


# metavariables cannot clash with object variables: '?' is not an identifier character
PHI, CHI, PSI = Var("?phi"), Var("?chi"), Var("?psi")


def _iff(a, b):
    return And(Impl(a, b), Impl(b, a))


_BASE = {
    "A1": Impl(PHI, Impl(CHI, PHI)),
    "A2": Impl(Impl(PHI, Impl(CHI, PSI)), Impl(Impl(PHI, CHI), Impl(PHI, PSI))),
    "A3": Impl(And(PHI, CHI), PHI),
    "A4": Impl(And(PHI, CHI), CHI),
    "A5": Impl(PHI, Impl(CHI, And(PHI, CHI))),
    "A6": Impl(PHI, Or(PHI, CHI)),
    "A7": Impl(CHI, Or(PHI, CHI)),
    "A8": Impl(Impl(PHI, PSI), Impl(Impl(CHI, PSI), Impl(Or(PHI, CHI), PSI))),
}

# biconditional schemes as (left, right) pairs; the scheme is left <-> right
_BICONDITIONALS = {
    "negneg": (Neg(Neg(PHI)), PHI),
    "dem_and": (Neg(And(PHI, CHI)), Or(Neg(PHI), Neg(CHI))),
    "dem_or": (Neg(Or(PHI, CHI)), And(Neg(PHI), Neg(CHI))),
    "dem_imp": (Neg(Impl(PHI, CHI)), And(PHI, Neg(CHI))),
    "join_box": (Box(PHI), Neg(Dia(Neg(PHI)))),
    "join_dia": (Dia(PHI), Neg(Box(Neg(PHI)))),
}

_MODAL = {
    "top_box": Box(Impl(PHI, PHI)),
    "top_dia": Neg(Dia(Neg(Impl(PHI, PHI)))),
    "and_box": Impl(And(Box(PHI), Box(CHI)), Box(And(PHI, CHI))),
    "and_dia": Impl(And(Neg(Dia(PHI)), Neg(Dia(CHI))), Neg(Dia(Or(PHI, CHI)))),
    "pm_box": Impl(Box(Impl(PHI, CHI)), Impl(Dia(PHI), Dia(CHI))),
    "pm_dia": Impl(Neg(Dia(Neg(Impl(Neg(PHI), Neg(CHI))))), Impl(Neg(Box(PHI)), Neg(Box(CHI)))),
    "yv_box": Impl(Box(Impl(PHI, CHI)), Impl(Neg(Box(Neg(PHI))), Neg(Box(Neg(CHI))))),
    "yv_dia": Impl(Neg(Dia(Neg(Impl(PHI, CHI)))), Impl(Dia(PHI), Dia(CHI))),
}


def _build_schemes() -> dict[str, Formula]:
    out: dict[str, Formula] = dict(_BASE)
    for name in ("negneg", "dem_and", "dem_or", "dem_imp"):
        out[name] = _iff(*_BICONDITIONALS[name])
    for name in ("top_box", "top_dia", "and_box", "and_dia", "pm_box", "pm_dia", "yv_box", "yv_dia"):
        out[name] = _MODAL[name]
    for name in ("join_box", "join_dia"):
        out[name] = _iff(*_BICONDITIONALS[name])
    # single directions of every biconditional, tried after the full schemes
    for name, (a, b) in _BICONDITIONALS.items():
        out[name + "_lr"] = Impl(a, b)
        out[name + "_rl"] = Impl(b, a)
    return out


SCHEMES: dict[str, Formula] = _build_schemes()
SCHEME_ORDER: tuple[str, ...] = tuple(SCHEMES)

_COMMON = frozenset(
    list(_BASE) + ["negneg", "dem_and", "dem_or", "dem_imp",
                   "top_box", "top_dia", "and_box", "and_dia"]
    + [f"{n}_{d}" for n in ("negneg", "dem_and", "dem_or", "dem_imp") for d in ("lr", "rl")]
)
_EXTRA = {
    "pm": {"pm_box", "pm_dia"},
    "yv": {"yv_box", "yv_dia"},
    "join": {"join_box", "join_dia", "join_box_lr", "join_box_rl", "join_dia_lr", "join_dia_rl"},
}
SCHEMES_OF: dict[LogicId, frozenset[str]] = {
    LogicId.CN4K: _COMMON,
    LogicId.CN4K_PM: _COMMON | _EXTRA["pm"],
    LogicId.CN4K_YV: _COMMON | _EXTRA["yv"],
    LogicId.CN4K_JOIN: _COMMON | _EXTRA["join"],
    LogicId.CN4K_ONE: _COMMON | _EXTRA["pm"] | _EXTRA["yv"] | _EXTRA["join"],
}

MODAL_RULES = ("r_box", "r_dia", "rn_box", "rn_dia")


def _is_meta(f: Formula) -> bool:
    return isinstance(f, Var) and f.name.startswith("?")


def match(pattern: Formula, f: Formula, subst: dict[str, Formula] | None = None) -> dict[str, Formula] | None:
    """First-order matching of a scheme against a formula."""
    subst = dict(subst or {})
    stack = [(pattern, f)]
    while stack:
        p, g = stack.pop()
        if _is_meta(p):
            bound = subst.get(p.name)
            if bound is None:
                subst[p.name] = g
            elif bound != g:
                return None
            continue
        if type(p) is not type(g):
            return None
        if isinstance(p, Var):
            if p.name != g.name:
                return None
        elif isinstance(p, (Neg, Box, Dia)):
            stack.append((p.sub, g.sub))
        else:
            stack.append((p.l, g.l))
            stack.append((p.r, g.r))
    return subst


def instantiate(pattern: Formula, subst: Mapping[str, Formula]) -> Formula:
    if _is_meta(pattern):
        return subst[pattern.name]
    if isinstance(pattern, Var):
        return pattern
    if isinstance(pattern, (Neg, Box, Dia)):
        return type(pattern)(instantiate(pattern.sub, subst))
    return type(pattern)(instantiate(pattern.l, subst), instantiate(pattern.r, subst))


def instance(scheme: str, phi: Formula, chi: Formula | None = None, psi: Formula | None = None) -> Formula:
    subst = {"?phi": phi, "?chi": chi if chi is not None else phi, "?psi": psi if psi is not None else phi}
    return instantiate(SCHEMES[scheme], subst)


def _pretty_subst(subst: Mapping[str, Formula]) -> dict[str, Formula]:
    return {k.lstrip("?"): v for k, v in subst.items()}


def match_axiom(f: Formula, logic: LogicId) -> tuple[str, dict[str, Formula]] | None:
    """First scheme of ``logic`` (in ``SCHEME_ORDER``) that ``f`` instantiates."""
    allowed = SCHEMES_OF[logic]
    for name in SCHEME_ORDER:
        if name in allowed:
            s = match(SCHEMES[name], f)
            if s is not None:
                return name, _pretty_subst(s)
    return None


# --------------------------------------------------------------------------
# derivations
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Justification:
    kind: str                 # "hyp", "ax", "mp" or a modal rule name
    refs: tuple[int, ...] = ()
    scheme: str | None = None

    def __str__(self) -> str:
        if self.kind == "ax":
            return f"ax {self.scheme}" if self.scheme else "ax"
        return " ".join([self.kind, *map(str, self.refs)])


@dataclass(frozen=True)
class HilbertStep:
    formula: Formula
    justification: Justification


@dataclass
class HilbertDerivation:
    logic: LogicId
    hypotheses: tuple[Formula, ...] = ()
    steps: list[HilbertStep] = field(default_factory=list)

    @property
    def conclusion(self) -> Formula | None:
        return self.steps[-1].formula if self.steps else None


@dataclass(frozen=True)
class HilbertVerdict:
    ok: bool
    line: int | None = None
    category: str = ""        # "structural" or "logical"
    reason: str = ""
    depends: tuple[bool, ...] = ()
    schemes: tuple[tuple[int, str, dict], ...] = ()

    def __bool__(self) -> bool:
        return self.ok

    def describe(self) -> str:
        if self.ok:
            return "ok"
        return f"line {self.line}: {self.category} error: {self.reason}"


def _modal_conclusion(rule: str, premise: Formula) -> Formula | None:
    if not isinstance(premise, Impl):
        return None
    a, b = premise.l, premise.r
    if rule == "r_box":
        return Impl(Box(a), Box(b))
    if rule == "r_dia":
        return Impl(Dia(a), Dia(b))
    if not (isinstance(a, Neg) and isinstance(b, Neg)):
        return None
    if rule == "rn_box":
        return Impl(Neg(Box(a.sub)), Neg(Box(b.sub)))
    if rule == "rn_dia":
        return Impl(Neg(Dia(a.sub)), Neg(Dia(b.sub)))
    return None


_PREMISE_SHAPE = {"r_box": "A -> B", "r_dia": "A -> B", "rn_box": "~A -> ~B", "rn_dia": "~A -> ~B"}


def check_derivation(d: HilbertDerivation) -> HilbertVerdict:
    """Verify every line; the first failing line is reported."""
    depends: list[bool] = []
    used: list[tuple[int, str, dict]] = []
    allowed = SCHEMES_OF[d.logic]

    def fail(line, category, reason):
        return HilbertVerdict(False, line, category, reason, tuple(depends))

    if not d.steps:
        return fail(None, "structural", "empty derivation")
    for n, step in enumerate(d.steps, start=1):
        j, f = step.justification, step.formula
        for r in j.refs:
            if not 1 <= r < n:
                return fail(n, "structural", f"reference to line {r} does not precede line {n}")
        if j.kind == "hyp":
            if j.refs:
                return fail(n, "structural", "hyp takes no line references")
            if f not in d.hypotheses:
                return fail(n, "logical", f"{render(f)} is not a declared hypothesis")
            depends.append(True)
        elif j.kind == "ax":
            if j.refs:
                return fail(n, "structural", "ax takes no line references")
            if j.scheme is None:
                m = match_axiom(f, d.logic)
                if m is None:
                    return fail(n, "logical", f"{render(f)} is not an axiom of {d.logic.value}")
                used.append((n, m[0], m[1]))
            else:
                if j.scheme not in SCHEMES:
                    return fail(n, "structural", f"unknown axiom scheme {j.scheme!r}")
                if j.scheme not in allowed:
                    return fail(n, "logical", f"scheme {j.scheme} is not in logic {d.logic.value}")
                s = match(SCHEMES[j.scheme], f)
                if s is None:
                    return fail(n, "logical", f"{render(f)} is not an instance of {j.scheme}")
                used.append((n, j.scheme, _pretty_subst(s)))
            depends.append(False)
        elif j.kind == "mp":
            if len(j.refs) != 2:
                return fail(n, "structural", "mp needs two line references")
            i, k = j.refs
            minor, major = d.steps[i - 1].formula, d.steps[k - 1].formula
            if major != Impl(minor, f):
                return fail(n, "logical",
                            f"line {k} is not '{render(minor)} -> {render(f)}' (found {render(major)})")
            depends.append(depends[i - 1] or depends[k - 1])
        elif j.kind in MODAL_RULES:
            if len(j.refs) != 1:
                return fail(n, "structural", f"{j.kind} needs one line reference")
            i = j.refs[0]
            premise = d.steps[i - 1].formula
            expect = _modal_conclusion(j.kind, premise)
            if expect is None:
                return fail(n, "logical",
                            f"{j.kind} needs a premise of the form {_PREMISE_SHAPE[j.kind]}, "
                            f"line {i} is {render(premise)}")
            if expect != f:
                return fail(n, "logical", f"{j.kind} on line {i} yields {render(expect)}, not {render(f)}")
            if depends[i - 1]:
                return fail(n, "logical", f"{j.kind} applied to line {i}, which depends on hypotheses")
            depends.append(False)
        else:
            return fail(n, "structural", f"unknown justification {j.kind!r}")
    return HilbertVerdict(True, depends=tuple(depends), schemes=tuple(used))


# --------------------------------------------------------------------------
# construction helpers
# --------------------------------------------------------------------------

class DerivationBuilder:
    """Appends justified lines and returns their 1-based numbers."""

    def __init__(self, logic: LogicId, hypotheses: Iterable[Formula] = (),
                 derivation: HilbertDerivation | None = None):
        self.d = derivation if derivation is not None else HilbertDerivation(logic, tuple(hypotheses))

    def _add(self, f: Formula, j: Justification) -> int:
        self.d.steps.append(HilbertStep(f, j))
        return len(self.d.steps)

    def formula(self, n: int) -> Formula:
        return self.d.steps[n - 1].formula

    def hyp(self, f: Formula) -> int:
        return self._add(f, Justification("hyp"))

    def ax(self, scheme: str, phi: Formula, chi: Formula | None = None, psi: Formula | None = None) -> int:
        return self._add(instance(scheme, phi, chi, psi), Justification("ax", (), scheme))

    def mp(self, i: int, k: int) -> int:
        major = self.formula(k)
        if not (isinstance(major, Impl) and major.l == self.formula(i)):
            raise ValueError(f"mp {i} {k}: shapes do not fit")
        return self._add(major.r, Justification("mp", (i, k)))

    def rule(self, name: str, i: int) -> int:
        concl = _modal_conclusion(name, self.formula(i))
        if concl is None:
            raise ValueError(f"{name} does not apply to line {i}")
        return self._add(concl, Justification(name, (i,)))

    def identity(self, a: Formula) -> int:
        """``a -> a`` in five lines."""
        l1 = self.ax("A1", a, Impl(a, a))                   # a -> ((a -> a) -> a)
        l2 = self.ax("A2", a, Impl(a, a), a)                # (a -> ((a->a) -> a)) -> ((a -> (a->a)) -> (a -> a))
        l3 = self.mp(l1, l2)
        l4 = self.ax("A1", a, a)                            # a -> (a -> a)
        return self.mp(l4, l3)

    def syllogism(self, i: int, k: int) -> int:
        """From ``A -> B`` (line i) and ``B -> C`` (line k) derive ``A -> C``."""
        ab, bc = self.formula(i), self.formula(k)
        a = ab.l
        l1 = self.ax("A1", bc, a)
        l2 = self.mp(k, l1)                                 # A -> (B -> C)
        l3 = self.ax("A2", a, ab.r, bc.r)
        l4 = self.mp(l2, l3)                                # (A -> B) -> (A -> C)
        return self.mp(i, l4)

    def conj_intro(self, i: int, k: int) -> int:
        a, b = self.formula(i), self.formula(k)
        l1 = self.ax("A5", a, b)
        l2 = self.mp(i, l1)
        return self.mp(k, l2)

    def imp_conj(self, i: int, k: int) -> int:
        """From ``A -> B`` and ``A -> C`` derive ``A -> B & C``."""
        ab, ac = self.formula(i), self.formula(k)
        a, b, c = ab.l, ab.r, ac.r
        l1 = self.ax("A5", b, c)                            # B -> (C -> B & C)
        l2 = self.syllogism(i, l1)                          # A -> (C -> B & C)
        l3 = self.ax("A2", a, c, And(b, c))
        l4 = self.mp(l2, l3)
        return self.mp(k, l4)


def derived_rule_nec(d: HilbertDerivation) -> HilbertDerivation:
    """Extend a derivation of a theorem ``A`` to one of ``[]A``."""
    v = check_derivation(d)
    if not v:
        raise ValueError(f"input derivation does not check: {v.describe()}")
    if v.depends[-1]:
        raise ValueError("the last line depends on hypotheses; necessitation needs a theorem")
    out = HilbertDerivation(d.logic, d.hypotheses, list(d.steps))
    b = DerivationBuilder(d.logic, derivation=out)
    n = len(out.steps)
    a = b.formula(n)
    top = Impl(a, a)
    l1 = b.ax("A1", a, top)                                 # A -> ((A -> A) -> A)
    l2 = b.mp(n, l1)                                        # (A -> A) -> A
    l3 = b.rule("r_box", l2)                                # [](A -> A) -> []A
    l4 = b.ax("top_box", a)
    b.mp(l4, l3)
    return out


def derived_rule_nec_dia(d: HilbertDerivation) -> HilbertDerivation:
    """Extend a derivation of a theorem ``A`` to one of ``~<>~A``."""
    v = check_derivation(d)
    if not v:
        raise ValueError(f"input derivation does not check: {v.describe()}")
    if v.depends[-1]:
        raise ValueError("the last line depends on hypotheses; necessitation needs a theorem")
    out = HilbertDerivation(d.logic, d.hypotheses, list(d.steps))
    b = DerivationBuilder(d.logic, derivation=out)
    n = len(out.steps)
    a = b.formula(n)
    top = Impl(a, a)
    l1 = b.ax("negneg_rl", a)                               # A -> ~~A
    l2 = b.mp(n, l1)                                        # ~~A
    l3 = b.ax("A1", Neg(Neg(a)), Neg(Neg(top)))
    l4 = b.mp(l2, l3)                                       # ~~(A -> A) -> ~~A
    l5 = b.rule("rn_dia", l4)                               # ~<>~(A -> A) -> ~<>~A
    l6 = b.ax("top_dia", a)
    b.mp(l6, l5)
    return out


def identity_derivation(a: Formula, logic: LogicId = LogicId.CN4K) -> HilbertDerivation:
    b = DerivationBuilder(logic)
    b.identity(a)
    return b.d


def box_conjunction_derivation(a: Formula, c: Formula, logic: LogicId = LogicId.CN4K) -> HilbertDerivation:
    """``([]a & []c) <-> [](a & c)``."""
    b = DerivationBuilder(logic)
    fwd = b.ax("and_box", a, c)
    l1 = b.rule("r_box", b.ax("A3", a, c))                  # [](a & c) -> []a
    l2 = b.rule("r_box", b.ax("A4", a, c))                  # [](a & c) -> []c
    back = b.imp_conj(l1, l2)
    b.conj_intro(fwd, back)
    return b.d


def dia_disjunction_derivation(a: Formula, c: Formula, logic: LogicId = LogicId.CN4K) -> HilbertDerivation:
    """``(~<>a & ~<>c) <-> ~<>(a | c)``."""
    b = DerivationBuilder(logic)
    fwd = b.ax("and_dia", a, c)
    dem = b.ax("dem_or_lr", a, c)                           # ~(a | c) -> ~a & ~c
    l1 = b.rule("rn_dia", b.syllogism(dem, b.ax("A3", Neg(a), Neg(c))))
    l2 = b.rule("rn_dia", b.syllogism(dem, b.ax("A4", Neg(a), Neg(c))))
    back = b.imp_conj(l1, l2)
    b.conj_intro(fwd, back)
    return b.d


def mp_chain_derivation(hyps: list[Formula], logic: LogicId = LogicId.CN4K) -> HilbertDerivation:
    """``A1, A1 -> A2, ..., -> An`` as hypotheses, ending in ``An``."""
    b = DerivationBuilder(logic, hyps)
    cur = b.hyp(hyps[0])
    for h in hyps[1:]:
        cur = b.mp(cur, b.hyp(h))
    return b.d


# --------------------------------------------------------------------------
# text format
# --------------------------------------------------------------------------

_LINE_RE = re.compile(r"^\s*(\d+)\s*[.:]\s*(.*?)\s*;\s*(.*?)\s*$")


def parse_justification(text: str) -> Justification:
    parts = text.split()
    if not parts:
        raise HilbertFormatError("empty justification")
    kind, args = parts[0].lower(), parts[1:]
    if kind == "ax":
        if len(args) > 1:
            raise HilbertFormatError(f"ax takes at most one scheme name: {text!r}")
        return Justification("ax", (), args[0] if args else None)
    try:
        refs = tuple(int(a) for a in args)
    except ValueError:
        raise HilbertFormatError(f"line references must be integers: {text!r}") from None
    if kind not in ("hyp", "mp") + MODAL_RULES:
        raise HilbertFormatError(f"unknown justification {kind!r}")
    return Justification(kind, refs)


def parse_derivation(text: str, logic: LogicId | None = None) -> HilbertDerivation:
    hyps: list[Formula] = []
    steps: list[HilbertStep] = []
    header_logic = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        low = line.lower()
        try:
            if low.startswith("logic:"):
                header_logic = LogicId.from_name(line.split(":", 1)[1])
                continue
            if low.startswith("hyps:"):
                body = line.split(":", 1)[1]
                hyps.extend(parse(h) for h in body.split(",") if h.strip())
                continue
            m = _LINE_RE.match(line)
            if not m:
                raise HilbertFormatError(f"file line {lineno}: expected 'n. formula ; justification'")
            number = int(m.group(1))
            if number != len(steps) + 1:
                raise HilbertFormatError(f"file line {lineno}: step numbered {number}, expected {len(steps) + 1}")
            steps.append(HilbertStep(parse(m.group(2)), parse_justification(m.group(3))))
        except ParseError as e:
            raise HilbertFormatError(f"file line {lineno}: {e}") from None
        except HilbertFormatError as e:
            if str(e).startswith("file line"):
                raise
            raise HilbertFormatError(f"file line {lineno}: {e}") from None
        except ValueError as e:
            raise HilbertFormatError(f"file line {lineno}: {e}") from None
    chosen = logic or header_logic
    if chosen is None:
        raise HilbertFormatError("no logic given (add a 'logic:' header)")
    return HilbertDerivation(chosen, tuple(hyps), steps)


def load_derivation(path: str | Path, logic: LogicId | None = None) -> HilbertDerivation:
    return parse_derivation(Path(path).read_text(encoding="utf-8"), logic)


def format_derivation(d: HilbertDerivation) -> str:
    lines = [f"logic: {d.logic.value}"]
    if d.hypotheses:
        lines.append("hyps: " + ", ".join(render(h) for h in d.hypotheses))
    for n, s in enumerate(d.steps, start=1):
        lines.append(f"{n}. {render(s.formula)} ; {s.justification}")
    return "\n".join(lines) + "\n"
