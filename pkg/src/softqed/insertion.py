"""Photon-insertion operators acting on generalized propagators.

Conventions: every propagator factor i(v/ - m)^-1 is stored as the chain element
('P', v) with its factor i absorbed into the term coefficient.  Photon j carries
momentum k_j; an insertion with sign +1 absorbs it (downstream momenta grow by
k_j), sign -1 emits it.  The lambda parameter belonging to photon j is ``l<j>``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ContextError, ConventionError, DiracIndexError, ShapeError
from .expr import (INF, ONE, I, Context, DeltaMarker, DenominatorFactor, DiracChain,
                   Expr, LambdaMarker, MomentumVector, Term, canonicalize,
                   comp, contract_index, differentiate, dot, M, rename_index, shift,
                   discharge_endpoints)
from .expr.terms import expr_indices

COUPLINGS = ("gamma", "Q-mero-reduced", "C-endpoint")


def kvec(j):
    return MomentumVector({f"k{j}": 1})


def lam_name(j):
    return f"l{j}"


@dataclass(frozen=True)
class Insertion:
    photon: int
    coupling: str = "gamma"
    index: str = None
    sign: int = 1

    def idx(self):
        return self.index or f"s{self.photon}"


@dataclass(frozen=True)
class GeneralizedPropagator:
    ctx: Context
    base: MomentumVector
    insertions: tuple
    expr: Expr
    side: int = 1
    shift: MomentumVector = field(default_factory=MomentumVector)

    def momenta(self):
        """Segment momenta p_0 ... p_n (including the lambda shift a)."""
        out = [self.base + self.shift]
        for ins in self.insertions:
            out.append(out[-1] + kvec(ins.photon).scale(ins.sign))
        return out

    def outflow(self):
        return self.momenta()[-1]


def build_generalized_propagator(ctx, base, insertions=(), side=1, shift=None,
                                 allow_repeat=False):
    """i(p/+a/-m)^-1 gamma_s1 i(p/+a/+k/1-m)^-1 ... for the given insertion order.

    ``allow_repeat`` admits both ends of one photon on the same line (distinct
    indices still required).
    """
    ins = tuple(x if isinstance(x, Insertion) else Insertion(*x) if isinstance(x, tuple)
                else Insertion(x) for x in insertions)
    seen_idx, seen_ph = set(), set()
    for x in ins:
        ctx.check_photon(x.photon)
        if x.idx() in seen_idx:
            raise DiracIndexError(f"duplicate free index {x.idx()}", index=x.idx())
        if x.photon in seen_ph and not allow_repeat:
            raise ContextError(f"photon {x.photon} inserted twice", photon=x.photon)
        if x.coupling not in COUPLINGS:
            raise ShapeError(f"unknown coupling {x.coupling}")
        seen_idx.add(x.idx())
        seen_ph.add(x.photon)
    a = shift if shift is not None else MomentumVector()
    P = GeneralizedPropagator(ctx, base, ins, Expr(ctx), side, a)
    moms = P.momenta()
    els = [("P", moms[0])]
    for x, v in zip(ins, moms[1:]):
        els += [("g", x.idx()), ("P", v)]
    coeff = I ** (len(ins) + 1)
    expr = Expr.chain(ctx, els, coeff).with_provenance(("build", str(base), len(ins)))
    return GeneralizedPropagator(ctx, base, ins, expr, side, a)


@dataclass(frozen=True)
class InsertionOperator:
    """kind in D, C, Q, Ct, Qt, CM, CN, CR."""

    kind: str
    photon: int
    index: str = None

    def idx(self):
        return self.index or f"mu{self.photon}"


def _expr(P):
    return P.expr if isinstance(P, GeneralizedPropagator) else P


def _check_fresh(e, j):
    name = lam_name(j)
    k = f"k{j}"
    for t in e.terms:
        for m in t.markers:
            if getattr(m, "name", None) == name:
                raise ContextError(f"photon {j} already inserted", photon=j)
        for el in t.chain.elements:
            if el[0] in "snP" and k in el[1].symbols():
                raise ContextError(f"photon {j} already inserted", photon=j)


# ---------------------------------------------------------------- D-hat

def apply_D(op, P) -> Expr:
    """Insert gamma_mu at every propagator, shifting downstream momenta by k_j."""
    e = _expr(P)
    j, mu = op.photon, op.idx()
    e.ctx.check_photon(j)
    _check_fresh(e, j)
    if mu in expr_indices(e):
        raise DiracIndexError(f"index {mu} already used", index=mu)
    k = kvec(j)
    out = []
    for t in e.terms:
        els = t.chain.elements
        for pos, el in enumerate(els):
            if el[0] != "P":
                continue
            down = tuple((x[0], x[1] + k) if x[0] in "Pn" else x for x in els[pos + 1:])
            new = els[:pos] + (el, ("g", mu), ("P", el[1] + k)) + down
            out.append(Term(t.coeff * I, DiracChain(new, t.chain.traced), t.dens, t.markers))
    return Expr(e.ctx, out, e.provenance + (("D", j, mu),))


# ---------------------------------------------------------------- C-hat family

def _shifted(e, j):
    return shift(e, "p", kvec(j), lam_name(j))


def apply_C_hat(op, P) -> Expr:
    """Reserved int_0^1 dl_j of (-i d/dp^mu) applied to P(p + l_j k_j)."""
    e = _expr(P)
    j, mu = op.photon, op.idx()
    e.ctx.check_photon(j)
    _check_fresh(e, j)
    d = differentiate(_shifted(e, j), ("p", mu)).scale(-I)
    mk = LambdaMarker(lam_name(j), Fraction(0), Fraction(1))
    out = Expr(e.ctx, [Term(t.coeff, t.chain, t.dens, t.markers | {mk}) for t in d.terms],
               e.provenance + (("C", j, mu),))
    return out


def apply_Q_hat(op, P) -> Expr:
    """Q-hat = D-hat - C-hat, term by term."""
    e = _expr(P)
    res = apply_D(InsertionOperator("D", op.photon, op.idx()), e) - apply_C_hat(
        InsertionOperator("C", op.photon, op.idx()), e)
    return Expr(res.ctx, res.terms, e.provenance + (("Q", op.photon, op.idx()),))


def apply_C_tilde(op, P, convention=None) -> Expr:
    """Reserved int_0^inf dl_j of (-d/dp^rho) applied to P(p + l_j k_j)."""
    e = _expr(P)
    j, rho = op.photon, op.idx()
    e.ctx.check_photon(j)
    if j in e.ctx.onshell and convention != "lower":
        raise ConventionError("fixed-position insertion of a light-like photon needs the "
                              "lower-endpoint convention", photon=j)
    if lam_name(j) in {getattr(m, "name", None) for m in e.markers()}:
        raise ContextError(f"photon {j} already inserted", photon=j)
    d = -differentiate(_shifted(e, j), ("p", rho))
    mk = LambdaMarker(lam_name(j), Fraction(0), INF, convention)
    return Expr(e.ctx, [Term(t.coeff, t.chain, t.dens, t.markers | {mk}) for t in d.terms],
                e.provenance + (("Ct", j, rho),))


def apply_Q_tilde(op, P, sigma, convention=None) -> Expr:
    """(delta^sigma_mu k^rho - delta^rho_mu k^sigma) C~_rho P_sigma."""
    e = _expr(P)
    j, mu = op.photon, op.idx()
    rho = f"rho{j}"
    if sigma not in expr_indices(e):
        raise DiracIndexError(f"operand has no free index {sigma}", index=sigma)
    x = apply_C_tilde(InsertionOperator("Ct", j, rho), e, convention)
    k = kvec(j)
    first = rename_index(contract_index(x, rho, k), sigma, mu)
    second = rename_index(contract_index(x, sigma, k), rho, mu)
    res = first - second
    return Expr(res.ctx, res.terms, e.provenance + (("Qt", j, mu, sigma),))


# ---------------------------------------------------------------- Ward telescoping

def _ward_once(t):
    els = t.chain.elements
    for pos in range(len(els) - 2):
        a, s, b = els[pos:pos + 3]
        if a[0] == "P" and s[0] == "s" and b[0] == "P" and b[1] - a[1] == s[1]:
            left = els[:pos] + (a,) + els[pos + 3:]
            right = els[:pos] + (b,) + els[pos + 3:]
            return [Term(t.coeff, DiracChain(left, t.chain.traced), t.dens, t.markers),
                    Term(-t.coeff, DiracChain(right, t.chain.traced), t.dens, t.markers)]
    return None


def ward_rewrite(e: Expr) -> Expr:
    """(v/-m)^-1 k/ (v/+k/-m)^-1 -> (v/-m)^-1 - (v/+k/-m)^-1, repeatedly."""
    todo = list(e.terms)
    out = []
    while todo:
        t = todo.pop()
        r = _ward_once(t)
        if r is None:
            out.append(t)
        else:
            todo.extend(r)
    return Expr(e.ctx, out, e.provenance + (("ward_rewrite",),))


# ---------------------------------------------------------------- C-hat split

@dataclass
class CHatSplit:
    """Parts of C-hat on A*B; ``remainder`` collects derivatives of A.

    The remainder is -i int (d_mu A - (p_mu/pk) k.dA) B and vanishes for A
    independent of the loop momentum.
    """

    mero: Expr
    nonmero: Expr
    residual: Expr
    remainder: Expr

    def total(self):
        return self.mero + self.nonmero + self.residual + self.remainder


def _is_analytic(A: Expr):
    for t in A.terms:
        if t.dens or any(el[0] == "P" for el in t.chain.elements):
            return False
    return True


def split_C_hat(op, A: Expr, base: MomentumVector = None) -> CHatSplit:
    """Split C-hat_j acting on A * (v^2 - m^2)^-1 into M, N and R parts.

    v is ``base`` (default p) and must contain p with unit coefficient.
    """
    if not _is_analytic(A):
        raise ShapeError("operand A must be free of propagators and denominators")
    ctx = A.ctx
    j, mu = op.photon, op.idx()
    v = base if base is not None else MomentumVector({"p": 1})
    if v.coeff("p") != 1:
        raise ShapeError("B must carry the loop momentum p with unit coefficient")
    k = kvec(j)
    name = lam_name(j)
    vl = v + MomentumVector({}, {(name, s): c for s, c in k.coeffs})
    tag = ("e", j, 1)
    B = lambda w: DenominatorFactor(dot(w, w) - M * M, "+", 1)
    As = _shifted(A, j)
    ab = Expr(ctx, [Term(t.coeff, t.chain, t.dens + (B(vl),), t.markers) for t in As.terms])

    # meromorphic: endpoint difference of (v_mu / v.k) A B
    factor = Expr.scalar(ctx, comp(vl, mu)) * Expr(ctx, [Term(ONE, DiracChain(),
                                                             (DenominatorFactor(dot(vl, k), tag),))])
    dm = DeltaMarker(name)
    f = factor * ab
    f = Expr(ctx, [Term(t.coeff, t.chain, t.dens, t.markers | {dm}) for t in f.terms])
    mero = discharge_endpoints(f, name).scale(-I)

    # common prefactor 4(v_mu k^2 - k_mu v.k)/d with d = 4k^2(v^2-m^2) - (2v.k)^2
    kk, vk = dot(k, k), dot(v, k)
    d_body = kk * (dot(v, v) - M * M) * 4 - vk * vk * 4
    pref = (comp(v, mu) * kk - comp(k, mu) * vk) * 4
    dfac = DenominatorFactor(d_body, None)
    lm = LambdaMarker(name, Fraction(0), Fraction(1))

    def reserve(x, extra_coeff, extra_dens):
        return Expr(ctx, [Term(t.coeff * extra_coeff, t.chain, t.dens + extra_dens,
                               t.markers | {lm}) for t in x.terms])

    nonmero = reserve(ab, -pref, (dfac,)).scale(-I)
    vkl = dot(vl, k)
    resid = reserve(ab, pref * kk * (dot(vl, vl) - M * M),
                    (dfac, DenominatorFactor(vkl, tag, 2))).scale(-I)

    # remainder: -i int [d_mu A - (v_mu/(v.k)) k^nu d_nu A] B
    nu = f"nu{j}"
    dA_mu = differentiate(As, ("p", mu))
    dA_k = contract_index(differentiate(As, ("p", nu)), nu, k)
    rem = Expr(ctx, [Term(t.coeff, t.chain, t.dens + (B(vl),), t.markers | {lm})
                     for t in dA_mu.terms])
    rem2 = Expr(ctx, [Term(t.coeff, t.chain, t.dens + (B(vl), DenominatorFactor(vkl, tag)),
                           t.markers | {lm}) for t in (Expr.scalar(ctx, comp(vl, mu)) * dA_k).terms])
    remainder = (rem - rem2).scale(-I)
    return CHatSplit(mero, nonmero, resid, remainder)


def c_hat_on_AB(op, A: Expr, base: MomentumVector = None) -> Expr:
    """apply_C_hat on the product A * (v^2-m^2)^-1 (the operand of split_C_hat)."""
    v = base if base is not None else MomentumVector({"p": 1})
    ab = Expr(A.ctx, [Term(t.coeff, t.chain, t.dens + (DenominatorFactor(dot(v, v) - M * M, "+"),),
                           t.markers) for t in A.terms])
    return apply_C_hat(op, ab)


# ---------------------------------------------------------------- reserved partial operators

@dataclass(frozen=True)
class PendingFactor:
    """A partial-operator factor evaluated at the final shifted momentum."""

    kind: str
    photon: int
    index: str

    def key(self):
        return (3, self.kind, self.photon, self.index)

    def __str__(self):
        return f"(pending {self.kind} {self.photon} {self.index})"


def apply_partial(op, P) -> Expr:
    """C^M, C^N or C^R with lambda integrations reserved: shift plus a pending factor."""
    e = _expr(P)
    j = op.photon
    _check_fresh(e, j)
    s = _shifted(e, j)
    marks = {LambdaMarker(lam_name(j)), PendingFactor(op.kind, j, op.idx())}
    if op.kind == "CM":
        marks.add(DeltaMarker(lam_name(j)))
    return Expr(e.ctx, [Term(t.coeff, t.chain, t.dens, t.markers | marks) for t in s.terms],
                e.provenance + ((op.kind, j, op.idx()),))


def apply(op, P, **kw) -> Expr:
    kind = op.kind
    if kind == "D":
        return apply_D(op, P)
    if kind == "C":
        return apply_C_hat(op, P)
    if kind == "Q":
        return apply_Q_hat(op, P)
    if kind == "Ct":
        return apply_C_tilde(op, P, kw.get("convention"))
    if kind == "Qt":
        return apply_Q_tilde(op, P, kw["sigma"], kw.get("convention"))
    if kind in ("CM", "CN", "CR"):
        return apply_partial(op, P)
    raise ShapeError(f"unknown operator kind {kind}")


def commutator_check(a, b, P, checker=None) -> bool:
    """True iff a(b(P)) and b(a(P)) agree, canonically or by the numeric checker."""
    ab = apply(a, apply(b, P))
    ba = apply(b, apply(a, P))
    ca, cb = canonicalize(ab), canonicalize(ba)
    if ca.terms == cb.terms:
        return True
    if checker is not None:
        return bool(checker(ab, ba))
    return False
