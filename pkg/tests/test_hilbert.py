import itertools
import random

import pytest
from hypothesis import given, strategies as st

from cn4k.formula import And, Box, Dia, Impl, Neg, Or, Polarity, Var, iff, parse, render
from cn4k.hilbert import (
    MODAL_RULES, PHI, SCHEME_ORDER, SCHEMES, SCHEMES_OF,
    DerivationBuilder, HilbertDerivation, HilbertFormatError, HilbertStep, Justification,
    box_conjunction_derivation, check_derivation, derived_rule_nec, derived_rule_nec_dia,
    dia_disjunction_derivation, format_derivation, identity_derivation, instance, load_derivation,
    match_axiom, mp_chain_derivation, parse_derivation,
)
from cn4k.logics import ALL_LOGICS, LogicId
from cn4k.oracle import random_model
from cn4k.prover import is_provable
from cn4k.semantics import supports

from conftest import DATA, formulas

p, q, r = Var("p"), Var("q"), Var("r")
CN4K, PM, YV, JOIN, ONE = (LogicId.CN4K, LogicId.CN4K_PM, LogicId.CN4K_YV,
                           LogicId.CN4K_JOIN, LogicId.CN4K_ONE)


def test_scheme_catalogue():
    assert SCHEME_ORDER[:8] == ("A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8")
    assert SCHEMES["top_box"] == Box(Impl(PHI, PHI))
    assert SCHEMES["join_dia"] == iff(Dia(PHI), Neg(Box(Neg(PHI))))
    assert SCHEMES_OF[CN4K] < SCHEMES_OF[PM] < SCHEMES_OF[ONE]
    assert "join_box_lr" in SCHEMES_OF[JOIN] and "join_box_lr" not in SCHEMES_OF[YV]


@pytest.mark.parametrize("text, logic, name, subst", [
    ("p -> q -> p", CN4K, "A1", {"phi": p, "chi": q}),
    ("[](p -> p)", CN4K, "top_box", {"phi": p}),
    ("~~(p & q) -> p & q", CN4K, "negneg_lr", {"phi": And(p, q)}),
    ("[](p -> q) -> <>p -> <>q", PM, "pm_box", {"phi": p, "chi": q}),
    ("[]~p -> ~<>~~p", JOIN, "join_box_lr", {"phi": Neg(p)}),
])
def test_match_axiom(text, logic, name, subst):
    assert match_axiom(parse(text), logic) == (name, subst)


def test_match_axiom_respects_logic():
    f = parse("[](p -> q) -> <>p -> <>q")
    assert match_axiom(f, CN4K) is None
    assert match_axiom(f, YV) is None
    assert match_axiom(parse("p -> q"), ONE) is None


def test_metavariables_bind_consistently():
    assert match_axiom(parse("p -> q -> q"), CN4K) is None
    assert match_axiom(parse("(p -> q) -> r -> p -> q"), CN4K)[0] == "A1"


def test_identity_file_checks():
    v = check_derivation(load_derivation(DATA / "identity.hil"))
    assert v.ok
    assert [s[1] for s in v.schemes] == ["A1", "A2", "A1"]


def test_dangling_reference_is_structural():
    v = check_derivation(load_derivation(DATA / "dangling.hil"))
    assert not v.ok and v.line == 2 and v.category == "structural"


def test_necessitation_on_hypothesis_is_logical():
    v = check_derivation(load_derivation(DATA / "nec_on_hypothesis.hil"))
    assert not v.ok and v.line == 2 and v.category == "logical"
    assert v.describe() == "line 2: logical error: r_box needs a premise of the form A -> B, line 1 is p"


def test_modal_rule_on_hypothesis_dependent_line():
    d = parse_derivation("hyps: p -> q\n1. p -> q ; hyp\n2. []p -> []q ; r_box 1\n", CN4K)
    v = check_derivation(d)
    assert not v.ok and v.category == "logical" and "depends on hypotheses" in v.reason


def test_scheme_outside_logic():
    d = load_derivation(DATA / "join_in_pm.hil")
    v = check_derivation(d)
    assert not v.ok and v.category == "logical" and "not in logic pm" in v.reason
    d.logic = JOIN
    assert check_derivation(d).ok


@pytest.mark.parametrize("text, category", [
    ("1. p -> q -> p ; ax A9", "structural"),
    ("1. p -> q -> q ; ax A1", "logical"),
    ("1. p -> q -> p ; ax\n2. q ; mp 1", "structural"),
    ("1. p -> q -> p ; ax\n2. q ; mp 1 1", "logical"),
    ("1. p ; hyp", "logical"),
])
def test_error_categories(text, category):
    v = check_derivation(parse_derivation(text, CN4K))
    assert not v.ok and v.category == category


@pytest.mark.parametrize("text", ["1 p ; ax", "1. p", "1. p -> ; ax", "3. p -> q -> p ; ax", "logic: nope\n1. p ; hyp",
                                  "1. p ; frob", "1. p -> p ; ax A1 2"])
def test_format_errors(text):
    with pytest.raises(HilbertFormatError):
        parse_derivation(text, CN4K)


def test_format_round_trip():
    d = box_conjunction_derivation(p, q)
    again = parse_derivation(format_derivation(d))
    assert again.logic is d.logic and again.steps == d.steps


def test_box_conjunction_lemma():
    d = box_conjunction_derivation(p, Box(q))
    v = check_derivation(d)
    assert v.ok and len(d.steps) == 17
    assert d.conclusion == iff(And(Box(p), Box(Box(q))), Box(And(p, Box(q))))


def test_dia_disjunction_lemma():
    d = dia_disjunction_derivation(p, q)
    assert check_derivation(d).ok and len(d.steps) == 28
    assert d.conclusion == iff(And(Neg(Dia(p)), Neg(Dia(q))), Neg(Dia(Or(p, q))))


def test_derived_necessitation_on_built_theorem():
    b = DerivationBuilder(CN4K)
    a3 = b.ax("A4", p, q)                                   # p & q -> q
    a4 = b.ax("A3", p, q)                                   # p & q -> p
    b.imp_conj(a3, a4)
    assert b.d.conclusion == parse("p & q -> q & p")
    boxed = derived_rule_nec(b.d)
    assert check_derivation(boxed).ok
    assert boxed.conclusion == parse("[](p & q -> q & p)")
    dia = derived_rule_nec_dia(b.d)
    assert check_derivation(dia).ok
    assert dia.conclusion == parse("~<>~(p & q -> q & p)")


def test_derived_necessitation_rejects_hypotheses():
    d = mp_chain_derivation([p, Impl(p, q)])
    assert check_derivation(d).ok and d.conclusion == q
    with pytest.raises(ValueError):
        derived_rule_nec(d)


@given(formulas(max_leaves=4))
def test_derived_necessitation_on_identities(a):
    d = derived_rule_nec(identity_derivation(a))
    assert check_derivation(d).ok and d.conclusion == Box(Impl(a, a))


def _grid():
    return [p, q, Impl(p, q), Neg(p)]


def test_scheme_instances_are_provable():
    for name in SCHEME_ORDER:
        for phi, chi in itertools.product(_grid()[:2], repeat=2):
            f = instance(name, phi, chi, r)
            for logic in ALL_LOGICS:
                if name in SCHEMES_OF[logic]:
                    assert is_provable(f, logic), (name, render(f), logic)


def test_schemes_outside_logic_are_not_provable():
    for name in ("pm_box", "pm_dia", "yv_box", "yv_dia", "join_box", "join_dia"):
        f = instance(name, p, q)
        assert not is_provable(f, CN4K)


def _random_derivation(rng, logic, length=25):
    """Random axiom instances closed under mp and the modal rules."""
    b = DerivationBuilder(logic)
    names = sorted(SCHEMES_OF[logic])
    pool = [p, q, Neg(p), Box(p), Dia(q), Impl(p, q)]
    for _ in range(length):
        choice = rng.random()
        lines = len(b.d.steps)
        if choice < 0.5 or lines < 2:
            name = rng.choice(names)
            b.ax(name, rng.choice(pool), rng.choice(pool), rng.choice(pool))
            continue
        if choice < 0.8:
            pairs = [(i, k) for i in range(1, lines + 1) for k in range(1, lines + 1)
                     if isinstance(b.formula(k), Impl) and b.formula(k).l == b.formula(i)]
            if pairs:
                b.mp(*rng.choice(pairs))
                continue
        rule = rng.choice(MODAL_RULES)
        lines_ok = [i for i in range(1, lines + 1) if _applies(rule, b.formula(i))]
        if lines_ok:
            b.rule(rule, rng.choice(lines_ok))
    return b.d


def _applies(rule, f):
    if not isinstance(f, Impl):
        return False
    return rule in ("r_box", "r_dia") or (isinstance(f.l, Neg) and isinstance(f.r, Neg))


@pytest.mark.parametrize("logic", ALL_LOGICS, ids=lambda lg: lg.value)
def test_hilbert_theorems_are_sequent_provable_and_valid(logic):
    rng = random.Random(11)
    seen = set()
    for _ in range(12):
        d = _random_derivation(rng, logic)
        assert check_derivation(d).ok
        seen.update(s.formula for s in d.steps)
    for f in sorted(seen, key=render)[:150]:
        assert is_provable(f, logic, budget=50_000), render(f)
        for _ in range(3):
            m = random_model(rng, logic.frame_class, 3)
            assert all(supports(m, w, Polarity.POS, f) for w in range(m.frame.size))


@given(st.integers(0, 10_000), st.sampled_from(ALL_LOGICS))
def test_derivations_survive_moving_to_a_stronger_logic(seed, logic):
    d = _random_derivation(random.Random(seed), logic, 12)
    stronger = [lg for lg in ALL_LOGICS if SCHEMES_OF[logic] <= SCHEMES_OF[lg]]
    assert ONE in stronger
    for lg in stronger:
        assert check_derivation(HilbertDerivation(lg, d.hypotheses, list(d.steps))).ok


def test_dependency_tracking_through_mp():
    d = HilbertDerivation(CN4K, (p,), [
        HilbertStep(p, Justification("hyp")),
        HilbertStep(parse("p -> q -> p"), Justification("ax", (), "A1")),
        HilbertStep(parse("q -> p"), Justification("mp", (1, 2))),
    ])
    assert check_derivation(d).depends == (True, False, True)
