"""Responsibility analysis for safety violations via Shapley values of safety games."""

from .actors import (
    action_separate, action_signature, module_signature, parse_manual_signature, value_signature,
    with_scheduler,
)
from .benchgen import BenchSpec, gen_linear, gen_random, gen_tree
from .errors import CapExceeded, ParseError, RespoError, ValidationError
from .games import SafetyGame, extract_strategy, solve, value
from .responsibility import (
    CoalitionOracle, ResponsibilityReport, ResponsibilitySignature, positivity, shapley_exact,
    shapley_sampled, switching_pairs, threshold,
)
from .rml import Program, format_program, parse_bool, parse_program
from .semantics import TransitionSystem, build_ts, find_counterexample
from .tsio import export_ts, import_ts

__version__ = "0.1.0"

__all__ = [
    "BenchSpec", "CapExceeded", "CoalitionOracle", "ParseError", "Program", "RespoError",
    "ResponsibilityReport", "ResponsibilitySignature", "SafetyGame", "TransitionSystem",
    "ValidationError", "action_separate", "action_signature", "build_ts", "export_ts",
    "extract_strategy", "find_counterexample", "format_program", "gen_linear", "gen_random",
    "gen_tree", "import_ts", "module_signature", "parse_bool", "parse_manual_signature",
    "parse_program", "positivity", "shapley_exact", "shapley_sampled", "solve",
    "switching_pairs", "threshold", "value", "value_signature", "with_scheduler",
]
