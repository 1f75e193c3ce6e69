"""hypermon: HyperLTL model checking and monitoring over finite trace logs."""

from __future__ import annotations

__version__ = "0.1.0"

from .evaluate import (
    EvalCache,
    EvalError,
    EmptyTraceSet,
    UnsupportedFragment,
    Verdict,
    brute_force_check,
    check,
    ltl_eval,
)
from .formula import (
    FormulaError,
    FormulaSyntaxError,
    FragmentClass,
    HyperFormula,
    Quant,
    classify,
    dualize,
    format_formula,
    parse_formula,
)
from .kripke import (
    FiniteTrace,
    FrameClass,
    KripkeStructure,
    LogMode,
    TraceLog,
    build_tree,
    classify_frame,
    enumerate_traces,
    minimize_to_dag,
    self_composition,
)
from .monitor import Batch, Session, current_verdict, ingest, session_new
from .parallel import check_parallel
from .reductions import Qbf, qbf_solve, random_qbf, reduce_qbf_acyclic, reduce_qbf_tree
from .selfcomp import check_selfcomp

__all__ = [
    "Batch", "EmptyTraceSet", "EvalCache", "EvalError", "FiniteTrace", "FormulaError",
    "FormulaSyntaxError", "FragmentClass", "FrameClass", "HyperFormula", "KripkeStructure",
    "LogMode", "Qbf", "Quant", "Session", "TraceLog", "UnsupportedFragment", "Verdict",
    "brute_force_check", "build_tree", "check", "check_parallel", "check_selfcomp", "classify",
    "classify_frame", "current_verdict", "dualize", "enumerate_traces", "format_formula",
    "ingest", "ltl_eval", "minimize_to_dag", "parse_formula", "qbf_solve", "random_qbf",
    "reduce_qbf_acyclic", "reduce_qbf_tree", "self_composition", "session_new",
]
