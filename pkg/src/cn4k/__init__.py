"""Decision kit for the paraconsistent constructive modal logics CN4K, pm, yv, join and one."""

from .formula import (
    And, Box, Dia, Formula, Impl, Neg, Or, ParseError, Polarity, Var,
    closure, complexity, parse, render,
)
from .logics import FrameClass, LogicId
from .prover import BudgetExceeded, NotProvable, Proved, decide, decide_formula
from .semantics import Frame, Model, check_frame, check_model, frame_validates, supports
from .sequent import ProofTree, RuleId, Sequent, check_proof, parse_sequent

__all__ = [
    "And", "Box", "Dia", "Formula", "Impl", "Neg", "Or", "ParseError", "Polarity", "Var",
    "closure", "complexity", "parse", "render",
    "FrameClass", "LogicId",
    "BudgetExceeded", "NotProvable", "Proved", "decide", "decide_formula",
    "Frame", "Model", "check_frame", "check_model", "frame_validates", "supports",
    "ProofTree", "RuleId", "Sequent", "check_proof", "parse_sequent",
]
