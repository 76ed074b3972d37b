from .evaluate import Matcher, WitnessChecker, check_hom_conditions, check_normal_form, compile_qf, eval_formula, phi0_violations
from .io import format_model, parse_model
from .structure import FiniteStructure, check_constraints, disjoint_union, transitive_close
from .types import OneType, TwoType, atomic_type, class_of, one_type, two_type

eval = eval_formula
