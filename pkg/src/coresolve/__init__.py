"""coresolve: a structural-resolution logic-programming engine with
coinductive (restricted) loop detection, rational-tree answers, and the
static checks that keep loop-detected answers honest."""

from .terms import (
    Distance,
    FreshVars,
    Struct,
    Substitution,
    Symbol,
    Term,
    Var,
    apply,
    compose,
    distance,
    is_instance,
    is_variant,
    truncate,
)
from .program import Clause, Program, check_universal, parse_program, parse_query
from .unify import UnifyKind, UnifyOutcome, mgm, mgu, occurs_in, rational_unify
from .derivation import Limits, Status, refute
from .coengine import co_refute
from .productivity import check_productive
from .models import gfp_local_check, lfp_enumerate

__all__ = [
    "Clause",
    "Distance",
    "FreshVars",
    "Limits",
    "Program",
    "Status",
    "Struct",
    "Substitution",
    "Symbol",
    "Term",
    "UnifyKind",
    "UnifyOutcome",
    "Var",
    "apply",
    "check_productive",
    "check_universal",
    "co_refute",
    "compose",
    "distance",
    "gfp_local_check",
    "is_instance",
    "is_variant",
    "lfp_enumerate",
    "mgm",
    "mgu",
    "occurs_in",
    "parse_program",
    "parse_query",
    "rational_unify",
    "refute",
    "truncate",
]

__version__ = "0.1.0"
