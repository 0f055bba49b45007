import random

import pytest
from hypothesis import given, strategies as st

from cn4k.formula import Polarity, iter_formulas, parse, render, size, variables
from cn4k.logics import ALL_LOGICS, FrameClass, LogicId
from cn4k.oracle import (
    CorpusProfile, SearchBounds,
    canonical_preorders, corpus_generate, enumerate_frames, find_countermodel, random_formula,
    random_model, reference_supports, relevant_relations, search_countermodel,
)
from cn4k.prover import NotProvable, Proved, decide_formula
from cn4k.semantics import check_frame, check_model, frame_validates, supports

from conftest import formulas

POS, NEG = Polarity.POS, Polarity.NEG
JOIN_BOX = parse("([]p -> ~<>~p) & (~<>~p -> []p)")


def _refutes(cm, f):
    return not reference_supports(cm.model, cm.world, POS, f)


def test_preorder_counts():
    assert [len(canonical_preorders(n)) for n in (1, 2, 3)] == [1, 3, 9]


def test_frame_counts_without_reduction():
    assert sum(1 for _ in enumerate_frames(FrameClass.GENERAL, 1)) == 16
    assert sum(1 for _ in enumerate_frames(FrameClass.MONO, 1)) == 2
    # 2 worlds, mono: discrete (16 masks / swap symmetry -> 10), chain (16), cluster (10)
    assert sum(1 for f in enumerate_frames(FrameClass.MONO, 2) if f.size == 2) == 36


@pytest.mark.parametrize("text, expected", [
    ("p", set()),
    ("[]p", {"r_box_pos"}),
    ("~[]p", {"r_box_neg"}),
    ("<>p -> q", {"r_dia_pos"}),
    ("~(<>p -> q)", {"r_dia_pos"}),
    ("~(q -> <>p)", {"r_dia_neg"}),
    ("[]~<>p", {"r_box_pos", "r_dia_neg"}),
])
def test_relevant_relations(text, expected):
    assert relevant_relations(parse(text)) == expected


def test_enumerated_frames_are_in_class():
    for cls in FrameClass:
        for frame in enumerate_frames(cls, 2):
            assert check_frame(frame, cls).ok


@pytest.mark.parametrize("text", ["p & ~p -> q", "p & ~p -> q & ~q"])
def test_paraconsistency_witnesses_have_one_world(text):
    f = parse(text)
    for logic in ALL_LOGICS:
        cm = find_countermodel(f, logic.frame_class, SearchBounds(max_worlds=1))
        assert cm is not None and cm.model.frame.size == 1
        assert check_model(cm.model).ok and _refutes(cm, f)


def test_join_box_countermodel_in_general_class():
    cm = find_countermodel(JOIN_BOX, FrameClass.GENERAL, SearchBounds(max_worlds=2))
    assert cm is not None and _refutes(cm, JOIN_BOX)
    assert check_frame(cm.model.frame, FrameClass.GENERAL).ok and check_model(cm.model).ok


def test_no_countermodel_for_theorem_of_join():
    out = search_countermodel(JOIN_BOX, FrameClass.JOIN)
    assert out.countermodel is None and out.complete and out.frames_checked > 0


def test_candidate_cap_marks_search_incomplete():
    out = search_countermodel(parse("[]p -> p"), FrameClass.GENERAL, SearchBounds(max_candidates=1))
    assert out.frames_checked == 1
    assert out.countermodel is not None or not out.complete
    with pytest.raises(ValueError):
        SearchBounds(max_worlds=0)


def test_extra_variables_are_declared():
    cm = find_countermodel(parse("p -> q"), FrameClass.MONO, SearchBounds(variables=frozenset({"r"})))
    assert cm.model.declared == {"p", "q", "r"}


_SMALL_CLASSES = [FrameClass.PM, FrameClass.YV, FrameClass.JOIN, FrameClass.MONO]


@pytest.mark.parametrize("cls", _SMALL_CLASSES, ids=lambda c: c.value)
def test_relevance_reduction_loses_no_countermodels(cls):
    # brute force over every 2-world frame of the class, no reduction
    frames = list(enumerate_frames(cls, 2))
    for f in list(iter_formulas(["p"], 4))[::4]:
        brute = any(not frame_validates(fr, f).valid for fr in frames)
        assert (find_countermodel(f, cls, SearchBounds(max_worlds=2)) is not None) == brute, render(f)


def test_relevance_reduction_general_one_world():
    frames = list(enumerate_frames(FrameClass.GENERAL, 1))
    for f in list(iter_formulas(["p", "q"], 4))[::5]:
        brute = any(not frame_validates(fr, f).valid for fr in frames)
        assert (find_countermodel(f, FrameClass.GENERAL, SearchBounds(max_worlds=1)) is not None) == brute


@given(formulas(), st.integers(0, 10_000), st.sampled_from(list(FrameClass)))
def test_reference_evaluator_agrees(f, seed, cls):
    m = random_model(random.Random(seed), cls, 3)
    for w in range(m.frame.size):
        for pol in (POS, NEG):
            assert reference_supports(m, w, pol, f) == supports(m, w, pol, f)


def test_reference_evaluator_on_named_worlds(box_split):
    assert reference_supports(box_split, "w0", POS, parse("~<>~p"))
    assert not reference_supports(box_split, "w0", POS, parse("[]p"))


@given(formulas(max_leaves=4), st.sampled_from(ALL_LOGICS))
def test_countermodels_refute_only_unprovable(f, logic):
    cm = find_countermodel(f, logic.frame_class, SearchBounds(max_worlds=2))
    if cm is not None:
        assert _refutes(cm, f)
        assert check_frame(cm.model.frame, logic.frame_class).ok and check_model(cm.model).ok
        assert isinstance(decide_formula(f, logic), NotProvable)


@pytest.mark.parametrize("logic, text", [(LogicId.CN4K_PM, JOIN_BOX), (LogicId.CN4K_YV, JOIN_BOX),
                                         (LogicId.CN4K_PM, parse("(<>p -> ~[]~p) & (~[]~p -> <>p)")),
                                         (LogicId.CN4K_YV, parse("(<>p -> ~[]~p) & (~[]~p -> <>p)"))])
def test_join_axioms_independent(logic, text):
    assert isinstance(decide_formula(text, logic), NotProvable)
    cm = find_countermodel(text, logic.frame_class)
    assert cm is not None and _refutes(cm, text)
    assert isinstance(decide_formula(text, LogicId.CN4K_JOIN), Proved)


def test_corpus_is_deterministic():
    a = corpus_generate(7, CorpusProfile(max_size=6, variables=2, count=40))
    b = corpus_generate(7, {"max_size": 6, "variables": 2, "count": 40})
    assert a == b and len(a) == 40
    assert a != corpus_generate(8, CorpusProfile(max_size=6, variables=2, count=40))


def test_corpus_respects_profile():
    corpus = corpus_generate(1, CorpusProfile(max_size=5, variables=3, count=200))
    assert all(1 <= size(f) <= 5 for f in corpus)
    assert set().union(*(variables(f) for f in corpus)) <= {"p", "q", "r"}
    assert all(parse(render(f)) == f for f in corpus)


def test_random_formula_size():
    rng = random.Random(0)
    for n in range(1, 10):
        assert size(random_formula(rng, n, ["p"])) == n
