"""Differentiation, substitution, index contraction and radial degrees."""
from __future__ import annotations

from fractions import Fraction

from ..errors import AssumptionError, ContextError, DiracIndexError, StateError
from .scalars import ONE, ScalarExpr, atom_symbols, comp, dot, metric, radial
from .terms import (DenominatorFactor, DiracChain, Expr, RadialMarker, Term,
                    canonicalize, expr_indices, term_indices)
from .vectors import MomentumVector, is_photon, photon_of


# ---------------------------------------------------------------- derivatives

def _d_atom(sym, mu):
    def d(a):
        kind = a[0]
        if kind == "B":
            x, y = a[1], a[2]
            out = None
            if x == sym:
                out = ScalarExpr.atom(("V", y, mu))
            if y == sym:
                extra = ScalarExpr.atom(("V", x, mu))
                out = extra if out is None else out + extra
            return out
        if kind == "V":
            return metric(a[2], mu) if a[1] == sym else None
        if kind == "F" and sym in atom_symbols(a):
            raise StateError("no derivative rule for an opaque transcendental atom", atom=str(a))
        return None
    return d


def differentiate(e: Expr, wrt) -> Expr:
    """Partial derivative d/d(sym^mu) of every term.

    Propagators follow d(v/-m)^-1 = -c (v/-m)^-1 gamma_mu (v/-m)^-1 where c is the
    coefficient of ``sym`` in v.
    """
    sym, mu = wrt
    e.ctx.check_symbol(sym)
    if mu in expr_indices(e):
        raise DiracIndexError(f"derivative index {mu} already used", index=mu)
    dfn = _d_atom(sym, mu)
    out = []
    for t in e.terms:
        dc = t.coeff.diff(dfn)
        if not dc.is_zero():
            out.append(Term(dc, t.chain, t.dens, t.markers))
        els = t.chain.elements
        for pos, el in enumerate(els):
            if el[0] in "snP":
                c = el[1].coeff(sym)
                if not c:
                    continue
                if el[0] == "P":
                    new = els[:pos] + (el, ("g", mu), el) + els[pos + 1:]
                    c = -c
                else:
                    new = els[:pos] + (("g", mu),) + els[pos + 1:]
                out.append(Term(t.coeff * c, DiracChain(new, t.chain.traced), t.dens, t.markers))
        for k, d in enumerate(t.dens):
            db = d.body.diff(dfn)
            if db.is_zero():
                continue
            dens = t.dens[:k] + (DenominatorFactor(d.body, d.tag, d.power + 1),) + t.dens[k + 1:]
            out.append(Term(t.coeff * db * (-d.power), t.chain, dens, t.markers))
    return Expr(e.ctx, out, e.provenance + (("differentiate", sym, mu),))


def d_lambda(e: Expr, name) -> Expr:
    """d/d(lambda) of every term (markers untouched)."""
    atom = ("L", name)
    out = []
    for t in e.terms:
        dc = t.coeff.diff_atom(atom)
        if not dc.is_zero():
            out.append(Term(dc, t.chain, t.dens, t.markers))
        els = t.chain.elements
        for pos, el in enumerate(els):
            if el[0] not in "snP":
                continue
            dv = el[1].d_lambda(name)
            if dv.is_zero():
                continue
            if el[0] == "P":
                new = els[:pos] + (el, ("s", dv), el) + els[pos + 1:]
                sign = -1
            else:
                new = els[:pos] + (("s", dv),) + els[pos + 1:]
                sign = 1
            out.append(Term(t.coeff * sign, DiracChain(new, t.chain.traced), t.dens, t.markers))
        for k, d in enumerate(t.dens):
            db = d.body.diff_atom(atom)
            if db.is_zero():
                continue
            dens = t.dens[:k] + (DenominatorFactor(d.body, d.tag, d.power + 1),) + t.dens[k + 1:]
            out.append(Term(t.coeff * db * (-d.power), t.chain, dens, t.markers))
    return Expr(e.ctx, out, e.provenance)


# ---------------------------------------------------------------- substitutions

def _map_vectors(e: Expr, vfn, afn, keep_markers=True):
    """Apply vfn to chain vectors and afn (atom substitution) to every scalar."""
    out = []
    for t in e.terms:
        coeff = t.coeff.subs(afn)
        if coeff.is_zero():
            continue
        els = tuple((el[0], vfn(el[1])) if el[0] in "snP" else el for el in t.chain.elements)
        dens = []
        for d in t.dens:
            body = d.body.subs(afn)
            if body.is_const():
                coeff = coeff * ScalarExpr.const(Fraction(1) / body.const_value() ** d.power)
            else:
                dens.append(DenominatorFactor(body, d.tag, d.power))
        out.append(Term(coeff, DiracChain(els, t.chain.traced), tuple(dens),
                        t.markers if keep_markers is True else keep_markers(t.markers)))
    return Expr(e.ctx, out, e.provenance)


def substitute_vector(e: Expr, sym, new: MomentumVector) -> Expr:
    """Replace the basis symbol ``sym`` by the vector ``new`` everywhere."""
    def vfn(v):
        c = v.coeff(sym)
        out = v - MomentumVector({sym: c}) + new.scale(c) if c else v
        lt = {k: x for k, x in out.lam if k[1] == sym}
        if not lt:
            return out
        if new.lam:
            raise StateError("substitution would nest lambda parameters", symbol=sym)
        out = out - MomentumVector(lam=lt)
        for (ln, _), x in lt.items():
            out = out + MomentumVector(lam={(ln, s): x * y for s, y in new.coeffs})
        return out

    def afn(a):
        if a[0] == "B" and sym in (a[1], a[2]):
            x = new if a[1] == sym else MomentumVector({a[1]: 1})
            y = new if a[2] == sym else MomentumVector({a[2]: 1})
            return dot(x, y)
        if a[0] == "V" and a[1] == sym:
            return comp(new, a[2])
        if a[0] == "F" and sym in atom_symbols(a):
            raise StateError("cannot substitute inside an opaque atom", atom=str(a))
        return None
    return _map_vectors(e, vfn, afn)


def shift(e: Expr, sym, delta: MomentumVector, lam_name=None) -> Expr:
    """sym -> sym + lam*delta, or sym + delta when no lambda is given."""
    if lam_name is None:
        new = MomentumVector({sym: 1}) + delta
    else:
        new = MomentumVector({sym: 1}, {(lam_name, s): c for s, c in delta.coeffs})
    return substitute_vector(e, sym, new)


def set_lambda(e: Expr, name, value, discharge=False) -> Expr:
    """Evaluate a lambda parameter.  Refuses to drop a marker unless discharging."""
    value = Fraction(value)
    for t in e.terms:
        for mk in t.markers:
            if getattr(mk, "name", None) == name and not discharge:
                raise StateError(f"lambda {name} is reserved by a marker", marker=str(mk))

    def afn(a):
        return ScalarExpr.const(value) if a == ("L", name) else None

    def mfn(ms):
        return frozenset(m for m in ms if getattr(m, "name", None) != name)

    return _map_vectors(e, lambda v: v.set_lambda(name, value), afn, keep_markers=mfn)


def contract_index(e: Expr, idx, v: MomentumVector) -> Expr:
    """Contract a free index with a vector: gamma_idx -> slash(v), x_idx -> x.v."""
    out = []
    for t in e.terms:
        if term_indices(t).get(idx, 0) > 1:
            raise DiracIndexError(f"index {idx} is already contracted", index=idx)

        def afn(a):
            if a[0] == "V" and a[2] == idx:
                return dot(MomentumVector({a[1]: 1}), v)
            if a[0] == "G" and idx in (a[1], a[2]):
                other = a[2] if a[1] == idx else a[1]
                return comp(v, other)
            return None
        coeff = t.coeff.subs(afn)
        els = tuple(("s", v) if el == ("g", idx) else el for el in t.chain.elements)
        dens = tuple(DenominatorFactor(d.body.subs(afn), d.tag, d.power) for d in t.dens)
        out.append(Term(coeff, DiracChain(els, t.chain.traced), dens, t.markers))
    return Expr(e.ctx, out, e.provenance + (("contract", idx, str(v)),))


def rename_index(e: Expr, old, new) -> Expr:
    def afn(a):
        if a[0] == "V" and a[2] == old:
            return ScalarExpr.atom(("V", a[1], new))
        if a[0] == "G" and old in (a[1], a[2]):
            other = a[2] if a[1] == old else a[1]
            return metric(other, new)
        return None
    out = []
    for t in e.terms:
        els = tuple(("g", new) if el == ("g", old) else el for el in t.chain.elements)
        out.append(Term(t.coeff.subs(afn), DiracChain(els, t.chain.traced),
                        tuple(DenominatorFactor(d.body.subs(afn), d.tag, d.power) for d in t.dens),
                        t.markers))
    return Expr(e.ctx, out, e.provenance)


# ---------------------------------------------------------------- polar form

def rho(ordering, label):
    """Product r_1...r_s for the photon of rank s (ordering lists labels by size)."""
    rank = list(ordering).index(label) + 1
    out = ONE
    for s in range(1, rank + 1):
        out = out * radial(s)
    return out


def substitute_polar(e: Expr, ordering=None) -> Expr:
    """k_j -> (r_1...r_s) w_j with s the rank of photon j in ``ordering``."""
    from .rules import expand_propagators

    n = e.ctx.n
    ordering = tuple(ordering) if ordering is not None else tuple(range(1, n + 1))
    if sorted(ordering) != list(range(1, n + 1)):
        raise ContextError("ordering must be a permutation of the photon labels", ordering=ordering)
    has_k_prop = any(el[0] == "P" and any(s[0] == "k" for s in el[1].symbols())
                     for t in e.terms for el in t.chain.elements)
    if has_k_prop:
        e = expand_propagators(e, only_with=lambda v: any(s[0] == "k" for s in v.symbols()))
    e = canonicalize(e)
    factors = {j: rho(ordering, j) for j in range(1, n + 1)}

    def part(s):
        if s[0] == "k":
            return factors[int(s[1:])], "w" + s[1:]
        return ONE, s

    def afn(a):
        if a[0] == "B" and (a[1][0] == "k" or a[2][0] == "k"):
            f1, x = part(a[1])
            f2, y = part(a[2])
            return f1 * f2 * dot(MomentumVector({x: 1}), MomentumVector({y: 1}))
        if a[0] == "V" and a[1][0] == "k":
            f, x = part(a[1])
            return f * ScalarExpr.atom(("V", x, a[2]))
        return None

    out = []
    for t in e.terms:
        coeff = t.coeff.subs(afn)
        els = []
        for el in t.chain.elements:
            if el[0] == "s":
                (s, c), = el[1].coeffs
                if s[0] == "k":
                    f, x = part(s)
                    coeff = coeff * f * c
                    els.append(("s", MomentumVector({x: 1})))
                    continue
            els.append(el)
        dens = tuple(DenominatorFactor(d.body.subs(afn), d.tag, d.power) for d in t.dens)
        out.append(Term(coeff, DiracChain(tuple(els), t.chain.traced), dens, t.markers))
    res = canonicalize(Expr(e.ctx, out, e.provenance + (("polar", ordering),)))
    return res


def _omega_only(poly):
    """True when every atom is an Omega.Omega product or radial (light-cone ambiguity)."""
    seen = False
    for a in poly.atoms():
        if a[0] == "B" and a[1][0] == "w" and a[2][0] == "w":
            seen = True
        elif a[0] != "r":
            return False
    return seen


def _check_polar(t: Term):
    syms = set()
    for a in t.coeff.atoms():
        syms |= atom_symbols(a)
    for d in t.dens:
        for a in d.body.atoms():
            syms |= atom_symbols(a)
    for el in t.chain.elements:
        if el[0] in "sn":
            syms |= el[1].symbols()
        elif el[0] == "P" and any(is_photon(s) for s in el[1].symbols()):
            raise StateError("propagator with photon momentum in polar term")
    if any(s[0] == "k" for s in syms):
        raise StateError("term is not in polar form", symbols=sorted(syms))


def degree_in(t: Term, j: int, assume_distortion=True) -> int:
    """Lowest total degree of a polar-form term in r_j (dr_j counts +1)."""
    if not assume_distortion:
        raise AssumptionError("radial degrees require the contour-distortion assumption")
    _check_polar(t)
    if t.coeff.is_zero():
        raise StateError("degree of a zero term")
    r = ("r", j)
    deg = t.coeff.min_degree(r)
    for d in t.dens:
        low, part = d.body.lowest_part(r)
        if _omega_only(part):
            raise AssumptionError("lowest radial coefficient vanishes on the Omega light cone",
                                  factor=str(d.body), j=j)
        deg -= low * d.power
    if RadialMarker(j) in t.markers:
        deg += 1
    return deg


def expr_degree_in(e: Expr, j: int, assume_distortion=True) -> int:
    return min(degree_in(t, j, assume_distortion) for t in e.terms)


__all__ = ["differentiate", "d_lambda", "substitute_vector", "shift", "set_lambda",
           "contract_index", "rename_index", "substitute_polar", "degree_in",
           "expr_degree_in", "rho", "photon_of"]
