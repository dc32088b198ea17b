"""Algebraic term representation: vectors, scalars, Dirac chains, expressions."""
from .vectors import Context, MomentumVector, vec, sym_key
from .scalars import (ScalarExpr, ONE, ZERO, I, M, lam, radial, metric, dot, comp,
                      b_atom, opaque)
from .terms import (INF, gamma, slash, num, prop, MASS, UNIT, DiracChain,
                    DenominatorFactor, LambdaMarker, DeltaMarker, RadialMarker, Term,
                    Expr, zero, canonicalize, serialize, equal)
from .calculus import (differentiate, d_lambda, substitute_vector, shift, set_lambda,
                       contract_index, rename_index, substitute_polar, degree_in,
                       expr_degree_in, rho)
from .rules import (expand_propagators, cancel_denominators, dirac_simplify,
                    clifford_normal_order, together, discharge_endpoints,
                    discharge_total_derivative, poly_divide, propagator_denominator)
from .dirac import trace_reduce

__all__ = [name for name in dir() if not name.startswith("_")]
