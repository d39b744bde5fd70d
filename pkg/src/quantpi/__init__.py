"""Quantitative testing semantics for the finite pi-calculus with internal mobility."""

from .algebra import affine_expand, exhaustive_pretraces, is_simple
from .equivalence import Verdict, check_equiv, enumerate_contexts, may_equiv, must_equiv
from .lts import ContractError, Internal, Visible, independent_positions, reduct, transitions
from .runs import PreTrace, causal_order, homotopic, independent, outcome, pretraces, runs, state
from .semiring import CarrierError, get_semiring, sr_add, sr_mul, sr_one, sr_zero
from .syntax import ParseError, elaborate, fresh_session, parse_term, print_term
from .traces import (
    LinearCombination,
    Trace,
    canonicalize,
    decompose,
    dual,
    extract_trace,
    implement_trace,
    sync_count,
    total_orderings,
    trace_par_compose,
)

__all__ = [
    "affine_expand",
    "exhaustive_pretraces",
    "is_simple",
    "Verdict",
    "check_equiv",
    "enumerate_contexts",
    "may_equiv",
    "must_equiv",
    "ContractError",
    "Internal",
    "Visible",
    "independent_positions",
    "reduct",
    "transitions",
    "PreTrace",
    "causal_order",
    "homotopic",
    "independent",
    "outcome",
    "pretraces",
    "runs",
    "state",
    "CarrierError",
    "get_semiring",
    "sr_add",
    "sr_mul",
    "sr_one",
    "sr_zero",
    "ParseError",
    "elaborate",
    "fresh_session",
    "parse_term",
    "print_term",
    "LinearCombination",
    "Trace",
    "canonicalize",
    "decompose",
    "dual",
    "extract_trace",
    "implement_trace",
    "sync_count",
    "total_orderings",
    "trace_par_compose",
]

__version__ = "0.1.0"
