"""Systems of named-set definitions: forms, agreement, selection algorithms, encodings."""
from .dictionary import (Dictionary, Hierarchy, Section, dictionary_op, difference, flatten, hierarchy, intersection,
                         product, render_sections, union)
from .encode import (ConstraintSystem, HornClause, horn_export, horn_greatest, horn_least_model, render_horn,
                     to_boolean_constraints)
from .semantics import (VOID, AgreedReport, CapExceeded, Family, Instance, SelectedReport, Universe,
                        agreed_families, apply_delta, brute_force_variants, check_agreed, check_selected,
                        eval_formula, gamma_closure, holds, is_agreed, load_instance, name_groups, parse_instance, show_family,
                        show_set, sorted_elems)
from .solvers import KINDS, Solve130, classify, oracle_sets, solve_120, solve_130, solve_pair, supporter_removal
from .syntax import (ALPHA, BETA, DELTA, GAMMA, Form, FormSystem, SetDefError, parse_form, parse_formula,
                     parse_system)

__all__ = [n for n in dir() if not n.startswith("_")]
