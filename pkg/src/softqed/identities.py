"""Ward-type identities and decomposition checks on a generalized propagator.

Each check returns a Verdict from randomized exact evaluation (or a plain
boolean verdict for symbolic zero tests).
"""
from __future__ import annotations

from .expr import I, Context, Expr, MomentumVector, canonicalize, \
    contract_index, shift, substitute_vector
from .expr.rules import discharge_total_derivative
from .insertion import (Insertion, InsertionOperator, apply_C_tilde, apply_D, apply_Q_tilde,
                        build_generalized_propagator, kvec)
from .oracle.check import Verdict, check_identity
from .poles import pole_decompose, sum_terms


def propagator_from_sequence(seq, extra=1, base=None, side=1):
    """Propagator with gamma insertions (photon, sign) and ``extra`` free photon labels."""
    n = max([j for j, _ in seq], default=0) + extra
    ctx = Context(n)
    ins = [Insertion(j, "gamma", f"s{u}", sg) for u, (j, sg) in enumerate(seq)]
    base = base or MomentumVector({"p": 1})
    return build_generalized_propagator(ctx, base, ins, side=side, allow_repeat=True)


def two_propagator_ward(trials=100, seed=0) -> Verdict:
    """(p/-m)^-1 k/ (p/+k/-m)^-1 = (p/-m)^-1 - (p/+k/-m)^-1."""
    ctx = Context(1)
    p, k = MomentumVector({"p": 1}), kvec(1)
    lhs = Expr.chain(ctx, [("P", p), ("s", k), ("P", p + k)])
    rhs = Expr.chain(ctx, [("P", p)]) - Expr.chain(ctx, [("P", p + k)])
    return check_identity(lhs, rhs, trials=trials, seed=seed)


def inserted_ward(P, j=None, trials=100, seed=0) -> Verdict:
    """k_j contracted into every D insertion telescopes to i[P(p) - P(p+k_j)]."""
    j = j or P.ctx.n
    d = apply_D(InsertionOperator("D", j, "wmu"), P)
    lhs = contract_index(d, "wmu", kvec(j))
    moved = substitute_vector(P.expr, "p", MomentumVector({"p": 1}) + kvec(j))
    rhs = (P.expr - moved).scale(I)
    return check_identity(lhs, rhs, trials=trials, seed=seed)


def fixed_classical_ward(P, j=None, trials=100, seed=0) -> Verdict:
    """k^rho of the fixed-position classical insertion integrates back to P(p)."""
    j = j or P.ctx.n
    x = apply_C_tilde(InsertionOperator("Ct", j, "wrho"), P)
    xk = contract_index(x, "wrho", kvec(j))
    anti = shift(P.expr, "p", kvec(j), f"l{j}")
    check = lambda a, b: check_identity(canonicalize(a), canonicalize(b), trials=trials, seed=seed)
    try:
        out = discharge_total_derivative(xk, f"l{j}", anti, check=check)
    except Exception as exc:  # the integrand is not the claimed total derivative
        return Verdict(False, 0, witness={"error": str(exc)})
    return check_identity(out, P.expr, trials=trials, seed=seed)


def quantum_gauge_zero(P, j=None) -> Verdict:
    """k_j contracted into the quantum vertex factor vanishes identically, per insertion."""
    j = j or P.ctx.n
    if not P.insertions:
        return Verdict(True, 0, notes=["no insertion to dress"])
    for ins in P.insertions:
        q = apply_Q_tilde(InsertionOperator("Qt", j, "wmu"), P, ins.idx())
        if not canonicalize(contract_index(q, "wmu", kvec(j))).is_zero():
            return Verdict(False, 1, witness={"insertion": ins.idx()})
    return Verdict(True, len(P.insertions))


def pole_reconstruction(P, trials=100, seed=0, ordering=None) -> Verdict:
    """Sum of the pole terms equals the propagator product."""
    return check_identity(sum_terms(pole_decompose(P, ordering)), P.expr, trials=trials,
                          seed=seed)


def identity_suite(P, trials=100, seed=0):
    """Named verdicts for one propagator."""
    return {
        "inserted-ward": inserted_ward(P, trials=trials, seed=seed),
        "fixed-classical-ward": fixed_classical_ward(P, trials=trials, seed=seed),
        "quantum-gauge-zero": quantum_gauge_zero(P),
        "pole-reconstruction": pole_reconstruction(P, trials=trials, seed=seed),
    }
