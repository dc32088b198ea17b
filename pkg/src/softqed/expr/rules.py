"""Named rewrite rules.  None of these fire inside ``canonicalize``."""
from __future__ import annotations

from functools import lru_cache

from ..errors import StateError
from .scalars import DIM, ONE, M, ScalarExpr, _b_atom, atom_key, dot
from .terms import DenominatorFactor, DiracChain, Expr, Term, canonicalize, elem_key


def propagator_denominator(v):
    return DenominatorFactor(dot(v, v) - M * M, "+", 1)


def expand_propagators(e: Expr, only_with=None) -> Expr:
    """(v/ - m)^-1 -> (v/ + m) / (v^2 - m^2 + i0)."""
    def fn(t):
        els, dens = [], list(t.dens)
        for el in t.chain.elements:
            if el[0] == "P" and (only_with is None or only_with(el[1])):
                els.append(("n", el[1]))
                dens.append(propagator_denominator(el[1]))
            else:
                els.append(el)
        return Term(t.coeff, DiracChain(tuple(els), t.chain.traced), tuple(dens), t.markers)
    return e.map_terms(fn).with_provenance(("expand_propagators",))


# ---------------------------------------------------------------- exact division

def _split_imag(p):
    re, im = {}, {}
    for m, c in p.terms.items():
        if m and m[0][0] == ("I",):
            im[m[1:]] = c
        else:
            re[m] = c
    return ScalarExpr(re), ScalarExpr(im)


def _lex_vec(m, order):
    d = dict(m)
    return tuple(d.get(a, 0) for a in order)


def poly_divide(num, den):
    """Exact multivariate division num/den, or None when den does not divide num."""
    if den.is_zero():
        raise ZeroDivisionError
    if any(a == ("I",) for a in den.atoms()):
        return None
    order = sorted(num.atoms() | den.atoms(), key=atom_key)
    lead = lambda p: max(p.terms.items(), key=lambda mc: _lex_vec(mc[0], order))
    dm, dc = lead(den)
    dv = _lex_vec(dm, order)
    q = ScalarExpr()
    r = num
    while not r.is_zero():
        rm, rc = lead(r)
        rv = _lex_vec(rm, order)
        if any(a < b for a, b in zip(rv, dv)):
            return None
        mono = tuple((a, x - y) for a, x, y in zip(order, rv, dv) if x - y)
        mono = tuple(sorted(mono, key=lambda ae: atom_key(ae[0])))
        step = ScalarExpr({mono: rc / dc})
        q = q + step
        r = r - step * den
    return q


def cancel_denominators(e: Expr) -> Expr:
    """Cancel denominator bodies that divide the coefficient exactly."""
    def fn(t):
        coeff = t.coeff
        dens = []
        for d in t.dens:
            power = d.power
            while power:
                re, im = _split_imag(coeff)
                qr = poly_divide(re, d.body)
                qi = poly_divide(im, d.body) if not im.is_zero() else ScalarExpr()
                if qr is None or qi is None:
                    break
                coeff = qr + ScalarExpr.atom(("I",)) * qi
                power -= 1
            if power:
                dens.append(DenominatorFactor(d.body, d.tag, power))
        return Term(coeff, t.chain, tuple(dens), t.markers)
    return canonicalize(e).map_terms(fn).with_provenance(("cancel_denominators",))


# ---------------------------------------------------------------- Dirac rules

def dirac_simplify(e: Expr) -> Expr:
    """Adjacent a/ a/ -> a.a and gamma_mu gamma_mu -> 4 (repeated until stable)."""
    e = canonicalize(e)
    while True:
        changed = False
        out = []
        for t in e.terms:
            els = list(t.chain.elements)
            coeff = t.coeff
            k = 0
            while k + 1 < len(els):
                a, b = els[k], els[k + 1]
                if a == b and a[0] == "s":
                    (s, c), = a[1].coeffs
                    coeff = coeff * ScalarExpr.atom(_b_atom(s, s)) * (c * c)
                    del els[k:k + 2]
                    changed = True
                    continue
                if a == b and a[0] == "g":
                    coeff = coeff * DIM
                    del els[k:k + 2]
                    changed = True
                    continue
                k += 1
            out.append(Term(coeff, DiracChain(tuple(els), t.chain.traced), t.dens, t.markers))
        e = canonicalize(Expr(e.ctx, out, e.provenance))
        if not changed:
            return e.with_provenance(("dirac_simplify",))


def _pair(a, b):
    """Scalar value of {a, b}/2 for gamma/slash slots."""
    if a[0] == "s" and b[0] == "s":
        (x, c1), = a[1].coeffs
        (y, c2), = b[1].coeffs
        return ScalarExpr.atom(_b_atom(x, y)) * (c1 * c2)
    if a[0] == "g" and b[0] == "g":
        if a[1] == b[1]:
            return ScalarExpr.atom(("G", a[1], a[1]))
        x, y = sorted((a[1], b[1]))
        return ScalarExpr.atom(("G", x, y))
    s, g = (a, b) if a[0] == "s" else (b, a)
    (x, c), = s[1].coeffs
    return ScalarExpr.atom(("V", x, g[1])) * c


@lru_cache(maxsize=None)
def _normal_order_run(run):
    """Sort a run of gamma/slash slots with ab = 2{a.b} - ba; returns ((coeff, run), ...)."""
    for k in range(len(run) - 1):
        if elem_key(run[k]) > elem_key(run[k + 1]):
            a, b = run[k], run[k + 1]
            swapped = run[:k] + (b, a) + run[k + 2:]
            rest = run[:k] + run[k + 2:]
            out = {}
            for c, r in _normal_order_run(swapped):
                out[r] = out.get(r, ScalarExpr()) - c
            two_ab = _pair(a, b) * 2
            for c, r in _normal_order_run(rest):
                out[r] = out.get(r, ScalarExpr()) + two_ab * c
            return tuple((c, r) for r, c in out.items() if not c.is_zero())
    return ((ONE, run),)


def clifford_normal_order(e: Expr) -> Expr:
    """Sort every maximal gamma/slash run between propagators (generic dimension)."""
    e = dirac_simplify(canonicalize(e))
    out = []
    for t in e.terms:
        els = t.chain.elements
        pieces = [[(ONE, ())]]
        run = []

        def flush():
            if run:
                opts = _normal_order_run(tuple(run))
                pieces.append(list(opts))
                run.clear()
        for el in els:
            if el[0] in "gs":
                run.append(el)
            else:
                flush()
                pieces.append([(ONE, (el,))])
        flush()
        combos = [(ONE, ())]
        for opts in pieces:
            combos = [(c1 * c2, r1 + r2) for c1, r1 in combos for c2, r2 in opts]
        for c, r in combos:
            out.append(Term(t.coeff * c, DiracChain(r, t.chain.traced), t.dens, t.markers))
    res = dirac_simplify(Expr(e.ctx, out, e.provenance))
    return res.with_provenance(("clifford_normal_order",))


# ---------------------------------------------------------------- denominators

def together(e: Expr) -> Expr:
    """Bring every term over the common denominator (union of all factors)."""
    e = canonicalize(e)
    common = {}
    for t in e.terms:
        for d in t.dens:
            k = (d.body, d.tag)
            common[k] = max(common.get(k, 0), d.power)
    dens = tuple(DenominatorFactor(b, tg, p) for (b, tg), p in common.items())
    out = []
    for t in e.terms:
        have = {(d.body, d.tag): d.power for d in t.dens}
        coeff = t.coeff
        for (b, tg), p in common.items():
            coeff = coeff * (b ** (p - have.get((b, tg), 0)))
        out.append(Term(coeff, t.chain, dens, t.markers))
    return canonicalize(Expr(e.ctx, out, e.provenance)).with_provenance(("together",))


# ---------------------------------------------------------------- markers

def discharge_endpoints(e: Expr, name) -> Expr:
    """Discharge a DeltaMarker: F(lambda=1) - F(lambda=0)."""
    from .calculus import set_lambda
    from .terms import DeltaMarker

    dm = DeltaMarker(name)
    carrying = Expr(e.ctx, [t for t in e.terms if dm in t.markers])
    rest = Expr(e.ctx, [t for t in e.terms if dm not in t.markers])
    hi = set_lambda(carrying, name, 1, discharge=True)
    lo = set_lambda(carrying, name, 0, discharge=True)
    return (rest + hi - lo).with_provenance(("discharge_endpoints", name))


def discharge_total_derivative(integrand: Expr, name, antiderivative: Expr, check=None) -> Expr:
    """Integral of -dF/dlambda over the marker's range: F(lower) - F(upper).

    ``antiderivative`` is F as a function of the lambda parameter.  The premise
    integrand == -dF/dlambda is verified by ``check`` (an identity checker) when
    given; F(inf) is taken to vanish, which the marker's convention must allow.
    """
    from .calculus import d_lambda, set_lambda

    mk = [m for t in integrand.terms for m in t.markers if getattr(m, "name", None) == name]
    if not mk:
        raise StateError(f"no reserved integral over {name}")
    mk = mk[0]
    if check is not None:
        stripped = Expr(integrand.ctx, [Term(t.coeff, t.chain, t.dens,
                                             frozenset(m for m in t.markers if m != mk))
                                        for t in integrand.terms])
        verdict = check(stripped, -d_lambda(antiderivative, name))
        if not verdict:
            raise StateError("integrand is not a total lambda-derivative of the given form",
                             witness=getattr(verdict, "witness", None))
    out = set_lambda(antiderivative, name, mk.lower, discharge=True)
    if mk.upper != "inf":
        out = out - set_lambda(antiderivative, name, mk.upper, discharge=True)
    return out.with_provenance(("discharge_total_derivative", name))


__all__ = ["expand_propagators", "cancel_denominators", "dirac_simplify",
           "clifford_normal_order", "together", "discharge_endpoints",
           "discharge_total_derivative", "poly_divide", "propagator_denominator"]
