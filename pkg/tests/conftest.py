from pathlib import Path

import pytest
from hypothesis import settings, strategies as st

from cn4k.formula import And, Box, Dia, Impl, Neg, Or, Var, size
from cn4k.semantics import load_model

DATA = Path(__file__).parent / "data"

settings.register_profile("default", max_examples=150, deadline=None)
settings.load_profile("default")


def formulas(atoms=("p", "q"), max_leaves=6):
    leaves = st.sampled_from([Var(a) for a in atoms])

    def extend(children):
        unary = st.tuples(st.sampled_from([Neg, Box, Dia]), children).map(lambda t: t[0](t[1]))
        binary = st.tuples(st.sampled_from([And, Or, Impl]), children, children).map(
            lambda t: t[0](t[1], t[2]))
        return unary | binary

    return st.recursive(leaves, extend, max_leaves=max_leaves)


def small_formulas(limit=8, atoms=("p", "q")):
    return formulas(atoms, max_leaves=4).filter(lambda f: size(f) <= limit)


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def box_split():
    return load_model(DATA / "box_split.yaml")


@pytest.fixture
def dia_split():
    return load_model(DATA / "dia_split.yaml")


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
