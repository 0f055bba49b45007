import json
from collections import Counter

import pytest
from hypothesis import assume, given, strategies as st

from cn4k.formula import And, Box, Dia, Impl, Neg, Var, iter_formulas, parse
from cn4k.logics import ALL_LOGICS, LogicId
from cn4k.prover import Proved, decide, minimal_height
from cn4k.sequent import (
    INVERTIBLE_LEFT, MODAL_SHAPES, RULES_OF, WEAKER,
    OccurrenceRole, ProofError, ProofTree, RuleId, Sequent,
    apply_rule, backward_instances, box_projection, certificate, check_proof, contract,
    derive_general_axiom, dia_neg_projection, dump_certificate, formula_interpretation, invert,
    left_components, load_certificate, occurrence_roles, parse_sequent, read_certificate,
    rule_order_weaker, weaken, weaken_to,
)

from conftest import DATA, formulas

p, q = Var("p"), Var("q")
logics = st.sampled_from(ALL_LOGICS)


def test_parse_and_print_sequent():
    s = parse_sequent("[]p, ~<>q, p => q")
    assert s.succedent == q
    assert Counter(s.antecedent) == Counter([Box(p), Neg(Dia(q)), p])
    assert parse_sequent(str(s)) == s
    assert str(parse_sequent(" => p")) == "=> p"


def test_antecedent_is_a_multiset():
    assert parse_sequent("p, q => p") == parse_sequent("q, p => p")
    assert parse_sequent("p, p => p") != parse_sequent("p => p")


def test_formula_interpretation():
    assert formula_interpretation(parse_sequent("=> p")) == p
    assert formula_interpretation(parse_sequent("p, q => p")) == Impl(And(p, q), p)


def test_projections():
    gamma = [Box(p), Neg(Dia(q)), p, Neg(Box(p)), Dia(q), Box(Box(q))]
    assert box_projection(gamma) == [p, Box(q)]
    assert dia_neg_projection(gamma) == [Neg(q)]


def test_backward_instances_of_dia_sequent():
    s = parse_sequent("[]p, <>q, ~<>r => <>p")
    by_logic = {lg: {(r, str(prem[0])) for r, _, prem in backward_instances(s, lg)} for lg in ALL_LOGICS}
    assert by_logic[LogicId.CN4K] == {(RuleId.DIA, "q => p")}
    assert by_logic[LogicId.CN4K_PM] == {(RuleId.DIA_PM, "p, q => p")}
    assert by_logic[LogicId.CN4K_YV] == {(RuleId.DIA_YV, "q, ~r => p")}
    assert (RuleId.DIA_1, "p, q, ~r => p") in by_logic[LogicId.CN4K_ONE]


def test_backward_instances_axiom_and_left_rules():
    s = parse_sequent("p & q, p => p")
    inst = {(r, f) for r, f, _ in backward_instances(s, LogicId.CN4K)}
    assert (RuleId.AX, p) in inst
    assert (RuleId.AND_L, And(p, q)) in inst


def test_apply_rule_rejects_mismatches():
    s = parse_sequent("p => q")
    assert apply_rule(RuleId.AX, p, s) is None
    assert apply_rule(RuleId.AND_L, p, s) is None
    assert apply_rule(RuleId.BOX, None, s) is None


def test_imp_l_keeps_its_principal_on_the_left_premise():
    s = parse_sequent("p -> q, p => q")
    left, right = apply_rule(RuleId.IMP_L, parse("p -> q"), s)
    assert left == parse_sequent("p -> q, p => p")
    assert right == parse_sequent("q, p => q")


def test_join_certificate_checks():
    t, logic = load_certificate(DATA / "join_box.cert.json")
    assert logic is LogicId.CN4K_JOIN
    assert check_proof(t, logic).ok
    assert t.sequent == parse_sequent("=> ([]p -> ~<>~p) & (~<>~p -> []p)")


def test_yv_certificate_checks():
    t, logic = load_certificate(DATA / "yv_dia.cert.json")
    assert logic is LogicId.CN4K_YV
    assert check_proof(t, logic).ok
    assert t.height == 5


def test_certificates_need_their_rules():
    t, _ = load_certificate(DATA / "join_box.cert.json")
    res = check_proof(t, LogicId.CN4K_PM)
    assert not res.ok and "not in the calculus" in res.reason
    t, _ = load_certificate(DATA / "yv_dia.cert.json")
    assert not check_proof(t, LogicId.CN4K).ok
    assert check_proof(t, LogicId.CN4K_ONE).ok is False  # one uses dia_1, not dia_yv


def test_dia_pm_rejected_under_base_logic():
    s = parse_sequent("[]p, <>q => <>(p & q)")
    prem = apply_rule(RuleId.DIA_PM, Dia(q), s)
    assert prem == [parse_sequent("p, q => p & q")]
    leaf = derive_general_axiom(p, [q])
    inner = ProofTree(prem[0], RuleId.AND_R, None, (leaf, derive_general_axiom(q, [p])))
    t = ProofTree(s, RuleId.DIA_PM, Dia(q), (inner,))
    assert check_proof(t, LogicId.CN4K_PM).ok
    res = check_proof(t, LogicId.CN4K)
    assert not res.ok and res.path == () and res.rule is RuleId.DIA_PM


def test_checker_reports_wrong_premise_with_location():
    s = parse_sequent("=> p -> p")
    bad = ProofTree(s, RuleId.IMP_R, None, (ProofTree(parse_sequent("p, p => p"), RuleId.AX, p),))
    res = check_proof(bad, LogicId.CN4K)
    assert not res.ok and res.path == ()
    assert res.expected == ("p => p",) and res.found == ("p, p => p",)
    assert "root" in res.describe()


def test_checker_has_no_implicit_contraction():
    # left premise must keep both copies; dropping one is a different sequent
    s = parse_sequent("p & q, p & q => p")
    one = parse_sequent("p, q, p & q => p")
    t = ProofTree(s, RuleId.AND_L, And(p, q), (derive_general_axiom(p, [q, And(p, q)]),))
    assert t.children[0].sequent == one
    assert check_proof(t, LogicId.CN4K).ok
    wrong = ProofTree(s, RuleId.AND_L, And(p, q), (derive_general_axiom(p, [q]),))
    assert not check_proof(wrong, LogicId.CN4K).ok


def test_cut_checked_only_when_allowed():
    left = derive_general_axiom(p)
    t = ProofTree(parse_sequent("p => p"), RuleId.CUT, p, (left, derive_general_axiom(p)))
    assert not check_proof(t, LogicId.CN4K).ok
    assert check_proof(t, LogicId.CN4K, allow_cut=True).ok


@given(formulas(("p", "q", "r")), logics)
def test_general_axiom_checks(f, logic):
    t = derive_general_axiom(f, [q], logic)
    assert t.sequent == Sequent.of([q, f], f)
    assert check_proof(t, logic).ok
    assert not t.uses(RuleId.CUT)


def _proofs(logic, limit=120):
    out = []
    for f in iter_formulas(["p", "q"], 5):
        v = decide(Sequent.of([], f), logic)
        if isinstance(v, Proved):
            out.append(v.tree)
        if len(out) == limit:
            break
    return out


@pytest.mark.parametrize("logic", ALL_LOGICS, ids=lambda lg: lg.value)
def test_weaken_and_contract_on_found_proofs(logic):
    extra = [p, Box(q), Neg(Dia(p)), Impl(p, q)]
    for i, t in enumerate(_proofs(logic, 60)):
        g = extra[i % len(extra)]
        w = weaken(weaken(t, g), g)
        assert check_proof(w, logic).ok and w.height == t.height
        c = contract(w, g)
        assert check_proof(c, logic).ok and c.height <= w.height
        assert c.sequent == t.sequent.add(g)


@given(formulas(max_leaves=4), logics)
def test_contract_principal_copies(f, logic):
    # duplicate the formula the proof actually uses, then contract it away again
    base = derive_general_axiom(f, logic=logic)
    doubled = weaken(base, f)
    c = contract(doubled, f)
    assert c.sequent == base.sequent
    assert check_proof(c, logic).ok and c.height <= doubled.height


def test_weaken_to_refuses_to_drop():
    t = derive_general_axiom(p, [q])
    with pytest.raises(ProofError):
        weaken_to(t, parse_sequent("p => p"))
    assert weaken_to(t, parse_sequent("q, q, r, p => p")).height == t.height


def test_contract_needs_two_copies():
    with pytest.raises(ProofError):
        contract(derive_general_axiom(p), p)


@given(formulas(max_leaves=5), logics)
def test_invert_left_rules_is_height_preserving(f, logic):
    assume(not isinstance(f, Var))
    t = derive_general_axiom(f, [q], logic)
    for rule in sorted(INVERTIBLE_LEFT | {RuleId.IMP_L}, key=lambda r: r.value):
        comps = left_components(rule, f)
        if comps is None:
            continue
        for i in range(len(comps)):
            if rule is RuleId.IMP_L and i == 0:
                with pytest.raises(ProofError):
                    invert(t, f, rule, i)
                continue
            inv = invert(t, f, rule, i)
            assert check_proof(inv, logic).ok
            assert inv.height <= t.height
            assert inv.sequent == t.sequent.remove(f).add(*comps[i])


@pytest.mark.parametrize("text, rule, index", [
    ("p & q => q & p", RuleId.AND_L, 0),
    ("~(p | q) => ~q", RuleId.NEG_OR_L, 0),
    ("~~[]p => []p", RuleId.NEGNEG_L, 0),
    ("p -> q, p => q", RuleId.IMP_L, 1),
])
def test_inversion_does_not_raise_minimal_height(text, rule, index):
    s = parse_sequent(text)
    f = next(g for g in s.antecedent if left_components(rule, g) is not None)
    prem = s.remove(f).add(*left_components(rule, f)[index])
    for logic in ALL_LOGICS:
        h = minimal_height(s, logic)
        assert h is not None
        assert minimal_height(prem, logic) <= h


def test_weaker_order_examples():
    assert rule_order_weaker(RuleId.DIA, RuleId.DIA_1)
    assert rule_order_weaker(RuleId.BOX, RuleId.BOX_JOIN)
    assert not rule_order_weaker(RuleId.DIA_PM, RuleId.DIA_YV)
    assert not rule_order_weaker(RuleId.DIA_1, RuleId.DIA)


_MODAL_SEQUENTS = [
    "[]p, ~<>q, <>r, ~[]r => <>p",
    "[]p, ~<>q, <>r, ~[]r => ~[]q",
    "[]p, ~<>q, <>r => []q",
    "[]p, ~<>q, ~[]p => ~<>r",
    "[]p, []p, ~<>q, <>r, ~[]q => <>p",
]


@pytest.mark.parametrize("text", _MODAL_SEQUENTS)
def test_weaker_rule_premise_is_a_sub_multiset(text):
    s = parse_sequent(text)
    checked = 0
    for a, b in WEAKER:
        for principal in [None, *dict.fromkeys(s.antecedent)]:
            pa, pb = apply_rule(a, principal, s), apply_rule(b, principal, s)
            if pa is None or pb is None:
                continue
            assert pa[0].succedent == pb[0].succedent
            assert not (pa[0].counter() - pb[0].counter())
            checked += 1
    assert checked > 0


def test_weaker_rule_proof_simulates_stronger():
    # a dia proof in the base logic is turned into a dia_1 proof by weakening the premise
    t, _ = load_certificate(DATA / "yv_dia.cert.json")
    node = t.children[0].children[0]
    prem1 = apply_rule(RuleId.DIA_1, node.principal, node.sequent)[0]
    sim = ProofTree(node.sequent, RuleId.DIA_1, node.principal, (weaken_to(node.children[0], prem1),))
    assert check_proof(sim, LogicId.CN4K_ONE).ok


def test_modal_rules_have_no_side_occurrences():
    for rule, shape in MODAL_SHAPES.items():
        for text in _MODAL_SEQUENTS:
            s = parse_sequent(text)
            for principal in [None, *s.antecedent]:
                prem = apply_rule(rule, principal, s)
                if prem is None:
                    continue
                t = ProofTree(s, rule, principal, (ProofTree(prem[0], RuleId.AX, None),))
                roles, succ = occurrence_roles(t)
                assert succ is OccurrenceRole.PRINCIPAL
                assert all(r is not OccurrenceRole.SIDE for _, r in roles)


def test_occurrence_roles_for_propositional_rules():
    t = derive_general_axiom(And(p, q), [q])
    roles, succ = occurrence_roles(t)
    assert succ is OccurrenceRole.SIDE
    assert sorted(r.value for _, r in roles) == ["principal", "side"]


def test_every_logic_has_four_modal_rule_slots():
    for logic in ALL_LOGICS:
        modal = [r for r in RULES_OF[logic] if r.is_modal]
        assert 4 <= len(modal) <= 6


@given(formulas(max_leaves=5), logics)
def test_certificate_round_trip(f, logic):
    t = derive_general_axiom(f, [p], logic)
    text = dump_certificate(t, logic)
    again, lg = read_certificate(json.loads(text))
    assert again == t and lg is logic
    assert certificate(again, logic) == json.loads(text)


def test_malformed_certificate():
    with pytest.raises(ProofError):
        read_certificate({"format": "other", "proof": {}})
    with pytest.raises(ProofError):
        read_certificate({"format": "cn4k-proof/1", "logic": "cn4k",
                          "proof": {"sequent": {"antecedent": [], "succedent": "p"}, "rule": "nope",
                                    "principal": None, "children": []}})


def test_general_axiom_shapes():
    leaf = derive_general_axiom(p, [q])
    assert leaf.rule is RuleId.AX and leaf.height == 0
    t = derive_general_axiom(Impl(p, q))
    assert (t.rule, t.children[0].rule) == (RuleId.IMP_R, RuleId.IMP_L)
    assert all(c.rule is RuleId.AX for c in t.children[0].children)
    b = derive_general_axiom(Box(p))
    assert b.rule is RuleId.BOX and b.children[0].sequent == parse_sequent("p => p")


def test_weaken_examples():
    assert weaken(derive_general_axiom(p), q).sequent == parse_sequent("q, p => p")
    t = decide(parse_sequent("=> [](p -> p)"), LogicId.CN4K).tree
    w = weaken(t, parse("<>r"))
    assert w.sequent == parse_sequent("<>r => [](p -> p)")
    assert check_proof(w, LogicId.CN4K).ok and w.height == t.height
    yv, _ = load_certificate(DATA / "yv_dia.cert.json")
    w = weaken(yv, parse("[]s"))
    assert check_proof(w, LogicId.CN4K_YV).ok and w.height == yv.height


@pytest.mark.parametrize("text, f", [("p, p, q => p", "p"), ("p & q, p & q => p & q", "p & q"),
                                     ("[]p, []p => []p", "[]p")])
def test_contract_examples(text, f):
    s = parse_sequent(text)
    t = decide(s, LogicId.CN4K).tree
    assert t.sequent == s
    c = contract(t, parse(f))
    assert c.sequent == s.remove(parse(f))
    assert check_proof(c, LogicId.CN4K).ok and c.height <= t.height
