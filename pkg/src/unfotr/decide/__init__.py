from .certificate import Certificate, verify_certificate
from .core import (
    DecideConfig,
    DecideResult,
    Sat,
    Unknown,
    Unsat,
    decide_fin_sat,
    decide_nf,
    expand_state,
    root_states,
)
from .expand import ExpansionBudget, Expander, Move
from .game import Arena, attractor, solve_andor, solve_muller
from .states import SearchState, normalize_triple, reduce_obligations

__all__ = [
    "Arena",
    "Certificate",
    "DecideConfig",
    "DecideResult",
    "ExpansionBudget",
    "Expander",
    "Move",
    "Sat",
    "SearchState",
    "Unknown",
    "Unsat",
    "attractor",
    "decide_fin_sat",
    "decide_nf",
    "expand_state",
    "normalize_triple",
    "reduce_obligations",
    "root_states",
    "solve_andor",
    "solve_muller",
    "verify_certificate",
]
