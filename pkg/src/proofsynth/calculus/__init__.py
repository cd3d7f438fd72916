"""Simply typed lambda calculus with products, sums and holes."""

from .errors import (BadPathError, CalculusError, HoleAtPathError,
                     IllTypedError, NoSuchHoleError, UnboundVariableError,
                     UnifyError)
from .likelihood import phi
from .paths import (bound_vars_at, fill, hole_ids, holes, is_complete,
                    rule_at, scope_at, size, subterm_at, typed_at)
from .reduction import (alpha_eq, alpha_key, beta_step, eta_step, free_vars,
                        has_forced_redex, is_normal, normalize, substitute,
                        substitute_many)
from .syntax import (ARITY, CONTEXTS, RULES, App, CasePair, CaseSum, Context,
                     Hole, Imp, Lam, Left, Pair, ParseError, Path, PVar, Prod,
                     Prop, Right, Rule, Sum, Term, Var, canonicalize_prop,
                     children, context_of, parse_prop, parse_term, prop_size,
                     prop_to_sexpr, prop_vars, rename_prop, rule_of,
                     term_to_sexpr)
from .typing import (HoleState, TypedTerm, annotate, annotate_principal,
                     hole_obligations, infer_principal, is_typable,
                     principal_prop, typecheck)
