from .ast import (
    EQUIV,
    FALSE,
    ORDER,
    PLAIN,
    TRUE,
    And,
    Atom,
    Eq,
    Exists,
    Formula,
    Not,
    Or,
    Signature,
    TransPair,
    free_vars,
    size,
)
from .normal_form import (
    DNF_CAP,
    Conjunct,
    Disjunct,
    DNFBlowup,
    Lit,
    NormalFormError,
    NormalFormFormula,
    dnf_formula,
    dnf_matrix,
    to_normal_form,
)
from .parser import ParseError, parse_formula, parse_signature
from .render import render, render_formula, render_signature
from .validate import apply_sugar, validate_unfo
