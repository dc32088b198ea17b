"""Pole-residue decomposition of generalized propagators.

A propagator chain with n insertions has segment momenta p_0 ... p_n.  Each
pole term keeps the full numerator and replaces the other denominators by
differences D_ij = sigma_ij * ((p_j^2 - m^2) - (p_i^2 - m^2)), with sigma_ij
chosen so the dominant i-epsilon of the factor is positive.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from .errors import ShapeError, StructuralError
from .expr import (ONE, I, M, Context, DenominatorFactor, DiracChain, Expr,
                   MomentumVector, ScalarExpr, Term, canonicalize, comp, dot, metric,
                   opaque, substitute_vector)
from .expr.rules import (clifford_normal_order, expand_propagators, together,
                         cancel_denominators)
from .insertion import GeneralizedPropagator, kvec


# ---------------------------------------------------------------- signs

def _photons_between(P, i, j):
    lo, hi = min(i, j), max(i, j)
    return [P.insertions[s].photon for s in range(lo, hi)]


def dominant_photon(photons, ordering=None):
    """Photon whose epsilon dominates: the smallest rank in ``ordering``."""
    if not photons:
        raise StructuralError("empty momentum difference: self-energy-like configuration",
                              invariant="no-self-energy")
    if ordering is None:
        return min(photons)
    return min(photons, key=lambda j: list(ordering).index(j))


def assign_signs(i, P: GeneralizedPropagator, ordering=None):
    """sigma_ij for every j != i; each entry is (sigma, dominant photon)."""
    n = len(P.insertions)
    moms = P.momenta()
    out = {}
    for j in range(n + 1):
        if j == i:
            continue
        delta = moms[j] - moms[i]
        if delta.is_zero():
            raise StructuralError("empty momentum difference: self-energy-like configuration",
                                  invariant="no-self-energy", i=i, j=j)
        live = [ph for ph in _photons_between(P, i, j) if delta.coeff(f"k{ph}") != 0]
        dom = dominant_photon(live, ordering)
        # Im(2 p_i.delta) is carried by eps_dom with the sign of k_dom in delta
        sgn = 1 if delta.coeff(f"k{dom}") > 0 else -1
        out[j] = (sgn, dom)
    return out


# ---------------------------------------------------------------- pole terms

@dataclass
class PoleTerm:
    i: int
    left: Expr
    pole: Expr
    right: Expr
    sigma: dict
    momentum: MomentumVector
    qfactor: Expr = None
    dropped: Expr = None
    notes: list = field(default_factory=list)

    def expr(self) -> Expr:
        e = self.left * self.pole * self.right
        if self.qfactor is not None:
            e = self.qfactor * e
        return e

    def sign(self):
        s = 1
        for v, _ in self.sigma.values():
            s *= v
        return s

    def d_count(self):
        """(number of D1 factors, number of D2 factors)."""
        return (sum(1 for t in self.left.terms for _ in t.dens) // max(len(self.left.terms), 1),
                sum(1 for t in self.right.terms for _ in t.dens) // max(len(self.right.terms), 1))


def d_factor(P, i, j, sigma):
    moms = P.momenta()
    delta = moms[j] - moms[i]
    s, dom = sigma[j]
    body = (dot(moms[i], delta) * 2 + dot(delta, delta)) * s
    return DenominatorFactor(body, ("e", dom, 1))


def pole_decompose(P: GeneralizedPropagator, ordering=None):
    """n+1 pole terms whose sum equals the propagator product (at a = 0)."""
    if not P.shift.is_zero():
        raise ShapeError("pole decomposition is taken at a = 0")
    ctx = P.ctx
    n = len(P.insertions)
    moms = P.momenta()
    idx = [x.idx() for x in P.insertions]
    out = []
    for i in range(n + 1):
        sigma = assign_signs(i, P, ordering)
        sgn = 1
        for v, _ in sigma.values():
            sgn *= v
        left_els = []
        for s in range(i):
            left_els += [("n", moms[s]), ("g", idx[s])]
        right_els = []
        for s in range(i + 1, n + 1):
            right_els += [("g", idx[s - 1]), ("n", moms[s])]
        d1 = [d_factor(P, i, j, sigma) for j in range(i)]
        d2 = [d_factor(P, i, j, sigma) for j in range(i + 1, n + 1)]
        left = Expr(ctx, [Term(I ** i * sgn, DiracChain(tuple(left_els)), tuple(d1))])
        right = Expr(ctx, [Term(I ** (n - i), DiracChain(tuple(right_els)), tuple(d2))])
        pole = Expr(ctx, [Term(I, DiracChain((("n", moms[i]),)),
                               (DenominatorFactor(dot(moms[i], moms[i]) - M * M, "+"),))])
        out.append(PoleTerm(i, left, pole, right, sigma, moms[i]))
    return out


def sum_terms(terms) -> Expr:
    out = None
    for t in terms:
        e = t.expr() if isinstance(t, PoleTerm) else t
        out = e if out is None else out + e
    return out


# ---------------------------------------------------------------- quantum vertex factor

def q_vertex(ctx, pi: MomentumVector, j, sigma_idx, mu_idx):
    """(delta^sigma_mu k^rho - delta^rho_mu k^sigma) p_rho / (p.k) at momentum pi."""
    k = kvec(j)
    num = metric(sigma_idx, mu_idx) * dot(pi, k) - comp(pi, mu_idx) * comp(k, sigma_idx)
    return Expr(ctx, [Term(num, DiracChain(), (DenominatorFactor(dot(pi, k), ("e", j, 1)),))])


def attach_q_factors(pt: PoleTerm, P: GeneralizedPropagator, free=None):
    """Attach the antisymmetric quantum factor for every inserted photon."""
    q = Expr.scalar(P.ctx, ONE)
    for ins in P.insertions:
        mu = free(ins) if free else f"mu{ins.photon}"
        q = q * q_vertex(P.ctx, pt.momentum, ins.photon, ins.idx(), mu)
    return PoleTerm(pt.i, pt.left, pt.pole, pt.right, pt.sigma, pt.momentum, q,
                    pt.dropped, list(pt.notes))


# ---------------------------------------------------------------- residue reduction

def _replace_tail(e: Expr, new_last, coeff_factor=ONE):
    out = []
    for t in e.terms:
        els = t.chain.elements
        if not els or els[-2][0] != "n":
            raise ShapeError("left residue does not end in a numerator factor")
        els = els[:-2] + new_last
        out.append(Term(t.coeff * coeff_factor, DiracChain(els), t.dens, t.markers))
    return Expr(e.ctx, out)


def _replace_head(e: Expr, new_first, coeff_factor=ONE):
    out = []
    for t in e.terms:
        els = t.chain.elements
        if not els or els[1][0] != "n":
            raise ShapeError("right residue does not start with a vertex and numerator")
        els = new_first + els[2:]
        out.append(Term(t.coeff * coeff_factor, DiracChain(els), t.dens, t.markers))
    return Expr(e.ctx, out)


def reduce_residue(pt: PoleTerm, P: GeneralizedPropagator, keep_dropped=True) -> PoleTerm:
    """Keep only the first-order residue factors adjacent to the pole.

    The neighbouring numerators become -k_i/ gamma_a (left) and gamma_b k_{i+1}/
    (right).  Everything removed is returned in ``dropped``; with the quantum
    factors attached it carries an explicit (p_i^2 - m^2) factor.
    """
    if pt.qfactor is None:
        raise ShapeError("residue reduction needs the quantum factors attached")
    n = len(P.insertions)
    moms = P.momenta()
    i = pt.i
    left, right = pt.left, pt.right
    notes = list(pt.notes)
    if i > 0:
        kap = moms[i] - moms[i - 1]
        a = P.insertions[i - 1].idx()
        left = _replace_tail(left, (("s", kap), ("g", a)), -ONE)
    else:
        notes.append("no left k-factor at the first propagator")
    if i < n:
        kap2 = moms[i + 1] - moms[i]
        b = P.insertions[i].idx()
        right = _replace_head(right, (("g", b), ("s", kap2)))
    else:
        notes.append("no right k-factor at the last propagator")
    kept = PoleTerm(i, left, pt.pole, right, pt.sigma, pt.momentum, pt.qfactor, None, notes)
    if keep_dropped:
        # left unexpanded: full canonicalization of the pile is costly and only
        # numeric evaluation ever consumes it
        kept.dropped = (pt.expr() - kept.expr()).with_provenance(("non-residue", i))
    return kept


def pole_terms_q(P: GeneralizedPropagator, ordering=None, reduce=True):
    """Pole terms of a propagator whose insertions are all quantum vertices."""
    out = []
    for pt in pole_decompose(P, ordering):
        pt = attach_q_factors(pt, P)
        out.append(reduce_residue(pt, P) if reduce else pt)
    return out


# ---------------------------------------------------------------- single photon

@dataclass
class MeroNonmeroSplit:
    mero: Expr
    nonmero: Expr
    residual: Expr

    def total(self):
        return self.mero + self.nonmero + self.residual


def _k(j=1):
    return kvec(j)


def single_q_mero_closed(ctx, mu="mu", j=1):
    """Hand transcription of the zeroth-order meromorphic form (golden route)."""
    p = MomentumVector({"p": 1})
    k = _k(j)
    pk, kk = dot(p, k), dot(k, k)
    tag = ("e", j, 1)
    d0 = DenominatorFactor(pk * 2 + kk, tag)
    # (p/-m)^-1 (2 p_mu k^2 / 2pk - gamma_mu k/)
    a1 = Expr(ctx, [Term(comp(p, mu) * kk * 2, DiracChain((("P", p),)),
                         (d0, DenominatorFactor(pk * 2, tag)))])
    a2 = Expr(ctx, [Term(-ONE, DiracChain((("P", p), ("g", mu), ("s", k))), (d0,))])
    b1 = Expr(ctx, [Term((comp(p, mu) + comp(k, mu)) * kk * 2, DiracChain((("P", p + k),)),
                         (d0, DenominatorFactor(pk * 2 + kk * 2, tag)))])
    b2 = Expr(ctx, [Term(-ONE, DiracChain((("s", k), ("g", mu), ("P", p + k))), (d0,))])
    return a1 + a2 + b1 + b2


def single_q_mero_from_poles(ctx, mu="mu", j=1):
    """Sum of the reduced pole terms for one quantum photon (derived route)."""
    from .insertion import build_generalized_propagator, Insertion

    P = build_generalized_propagator(ctx, MomentumVector({"p": 1}), [Insertion(j, index="sg")])
    terms = pole_terms_q(P, reduce=True)
    return sum_terms(PoleTerm(t.i, t.left, t.pole, t.right, t.sigma, t.momentum,
                              q_vertex(ctx, t.momentum, j, "sg", mu)) for t in terms)


def single_q_nonmero(ctx, mu="mu", j=1):
    """Log part with opaque sqrt/log atoms; d = 4k^2(p^2-m^2) - (2pk)^2."""
    p = MomentumVector({"p": 1})
    k = _k(j)
    pk, kk = dot(p, k), dot(k, k)
    t = dot(p, p) - M * M
    minus_d = pk * pk * 4 - kk * t * 4
    s = opaque("sqrt", minus_d)
    tag = ("e", j, 1)
    u1, u2 = pk * 2 + kk * 2, pk * 2
    inv_md = DenominatorFactor(minus_d, None)
    # numerator bracket over -d
    num = (Expr(ctx, [Term(kk * -2, DiracChain((("n", p), ("g", mu), ("n", p))), (inv_md,))])
           + Expr(ctx, [Term(pk * 2, DiracChain((("s", k), ("g", mu), ("n", p))), (inv_md,))])
           + Expr(ctx, [Term(pk * 2, DiracChain((("n", p), ("g", mu), ("s", k))), (inv_md,))])
           + Expr(ctx, [Term(t * -2, DiracChain((("s", k), ("g", mu), ("s", k))), (inv_md,))]))
    inv_s = DenominatorFactor(s, None)
    bracket = (Expr(ctx, [Term(opaque("logratio", u1, s), DiracChain(), (inv_s,))])
               - Expr(ctx, [Term(opaque("logratio", u2, s), DiracChain(), (inv_s,))])
               + Expr(ctx, [Term(ScalarExpr.const(2), DiracChain(), (DenominatorFactor(u1, tag),))])
               - Expr(ctx, [Term(ScalarExpr.const(2), DiracChain(), (DenominatorFactor(u2, tag),))]))
    return num * bracket


def single_q_residual(ctx, mu="mu", j=1):
    """The lambda-free remainder 4(k_mu k/ - k^2 gamma_mu)/(2pk (2pk + 2k^2))."""
    p = MomentumVector({"p": 1})
    k = _k(j)
    pk, kk = dot(p, k), dot(k, k)
    tag = ("e", j, 1)
    dens = (DenominatorFactor(pk * 2, tag), DenominatorFactor(pk * 2 + kk * 2, tag))
    return (Expr(ctx, [Term(comp(k, mu) * 4, DiracChain((("s", k),)), dens)])
            - Expr(ctx, [Term(kk * 4, DiracChain((("g", mu),)), dens)]))


def split_single_Q(P: GeneralizedPropagator = None, mu="mu") -> MeroNonmeroSplit:
    """Meromorphic / nonmeromorphic / residual parts of one quantum insertion on i(p/-m)^-1."""
    if P is not None and (P.insertions or P.ctx.n < 1):
        raise ShapeError("split_single_Q expects the bare propagator in a context with a photon")
    ctx = P.ctx if P is not None else Context(1)
    return MeroNonmeroSplit(canonicalize(single_q_mero_from_poles(ctx, mu)),
                            canonicalize(single_q_nonmero(ctx, mu)),
                            canonicalize(single_q_residual(ctx, mu)))


def normal_form(e: Expr) -> Expr:
    """Propagators expanded, common denominator, Clifford-ordered, cancelled."""
    e = expand_propagators(canonicalize(e))
    e = clifford_normal_order(e)
    e = together(e)
    e = clifford_normal_order(e)
    return cancel_denominators(canonicalize(e))


def symbolic_equal(a: Expr, b: Expr) -> bool:
    return normal_form(a - b).is_zero()


# ---------------------------------------------------------------- classical photons

@dataclass
class ClassicalExpansionTerm:
    theta: tuple
    sign: int
    i: int
    momentum: MomentumVector
    factor: Expr
    expr: Expr


def classical_all_orders(P: GeneralizedPropagator, classical, ordering=None, reduce=True,
                         terms=None):
    """2^N theta terms per pole for N classical photons inserted in all orders.

    ``classical`` lists (photon, free index) pairs.  With no classical photons the
    pole terms are returned unchanged.
    """
    base = terms if terms is not None else pole_terms_q(P, ordering, reduce)
    if not classical:
        return base
    ctx = P.ctx
    out = []
    for pt in base:
        e = pt.expr()
        for theta in product((0, 1), repeat=len(classical)):
            shift = MomentumVector()
            for (j, _), th in zip(classical, theta):
                if th:
                    shift = shift + kvec(j)
            pth = pt.momentum + shift
            fac = Expr.scalar(ctx, ONE)
            for j, mu in classical:
                fac = fac * Expr(ctx, [Term(I * comp(pth, mu), DiracChain(),
                                            (DenominatorFactor(dot(pth, kvec(j)), ("e", j, 1)),))])
            sign = -1 if sum(theta) % 2 else 1
            shifted = substitute_vector(e, "p", MomentumVector({"p": 1}) + shift) if sum(theta) else e
            out.append(ClassicalExpansionTerm(theta, sign, pt.i, pth, fac,
                                              (fac * shifted).scale(sign)))
    return out
