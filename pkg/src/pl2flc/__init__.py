"""Source-to-source translation of Prolog programs into functional logic
programs, with SLD and narrowing interpreters to check the results."""

from .analysis import analyze, build_def_tree, explain, infer_respos, minimal_indseq_sets
from .codegen import emit_program, mangle_program, render_program
from .prolog import ParseError, parse_goal, parse_program
from .transform import (
    TransformError,
    TransformMode,
    transform_conservative,
    transform_demand,
    transform_functional,
    transform_program,
)

__all__ = [
    "ParseError",
    "TransformError",
    "TransformMode",
    "analyze",
    "build_def_tree",
    "emit_program",
    "explain",
    "infer_respos",
    "mangle_program",
    "minimal_indseq_sets",
    "parse_goal",
    "parse_program",
    "render_program",
    "transform_conservative",
    "transform_demand",
    "transform_functional",
    "transform_program",
]

__version__ = "0.1.0"
