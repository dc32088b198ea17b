"""Dirac chains, denominator factors, terms and expressions.

Chain elements are tuples:

    ('g', mu)   gamma matrix with a lower index
    ('s', v)    slash(v)
    ('n', v)    slash(v) + m, a propagator numerator
    ('P', v)    (slash(v) - m)^-1, kept opaque until ``expand_propagators``
    ('M',)      the mass scalar times the unit matrix
    ('u',)      the unit matrix
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from ..errors import ContextError, DiracIndexError, StateError
from .scalars import (DIM, ONE, ZERO, M, ScalarExpr, _b_atom, atom_indices, atom_key,
                      atom_symbols, lam, mono_key)
from .vectors import Context, MomentumVector

INF = "inf"


# ---------------------------------------------------------------- elements

def gamma(mu):
    return ("g", mu)


def slash(v):
    return ("s", v)


def num(v):
    return ("n", v)


def prop(v):
    return ("P", v)


MASS = ("M",)
UNIT = ("u",)


def elem_key(e):
    kind = e[0]
    if kind == "g":
        return (0, e[1])
    if kind == "s":
        return (1, e[1].key())
    if kind == "P":
        return (2, e[1].key())
    if kind == "n":
        return (3, e[1].key())
    return (4 if kind == "M" else 5,)


def fmt_elem(e):
    kind = e[0]
    if kind == "g":
        return f"(g {e[1]})"
    if kind in "snP":
        return f"({kind} {e[1]})"
    return "(M)" if kind == "M" else "(u)"


@dataclass(frozen=True)
class DiracChain:
    elements: tuple = ()
    traced: bool = False

    def key(self):
        return (self.traced, tuple(elem_key(e) for e in self.elements))

    def gamma_indices(self):
        return [e[1] for e in self.elements if e[0] == "g"]

    def __str__(self):
        head = "tr" if self.traced else "chain"
        return f"({head}" + "".join(" " + fmt_elem(e) for e in self.elements) + ")"


# ---------------------------------------------------------------- denominators

def tag_key(tag):
    if tag is None:
        return (0,)
    if tag in ("+", "-"):
        return (1, tag)
    return (2, tag[1], tag[2])


def fmt_tag(tag):
    if tag is None:
        return "none"
    if tag in ("+", "-"):
        return tag + "i0"
    return ("+" if tag[2] > 0 else "-") + f"ie{tag[1]}"


def flip_tag(tag):
    if tag is None:
        return None
    if tag == "+":
        return "-"
    if tag == "-":
        return "+"
    return (tag[0], tag[1], -tag[2])


@dataclass(frozen=True)
class DenominatorFactor:
    """1/(body + i0-tag)^power."""

    body: ScalarExpr
    tag: object = None
    power: int = 1

    def __post_init__(self):
        if self.body.is_zero():
            raise StateError("denominator body is identically zero")
        if self.power < 1:
            raise StateError("denominator power must be positive")

    def key(self):
        return (str(self.body), tag_key(self.tag), self.power)

    def __str__(self):
        return f'(den "{self.body}" {fmt_tag(self.tag)} {self.power})'


# ---------------------------------------------------------------- markers

@dataclass(frozen=True)
class LambdaMarker:
    """Reserved integral over lambda from lower to upper (upper may be INF).

    ``convention='lower'`` records that only the lower endpoint survives a
    total-derivative discharge (the light-like photon case).
    """

    name: str
    lower: object = Fraction(0)
    upper: object = Fraction(1)
    convention: object = None

    def key(self):
        return (0, int(self.name[1:]), str(self.lower), str(self.upper), str(self.convention))

    def __str__(self):
        extra = f" {self.convention}" if self.convention else ""
        return f"(int {self.name} {self.lower} {self.upper}{extra})"


@dataclass(frozen=True)
class DeltaMarker:
    """Reserved endpoint difference delta(lambda-1) - delta(lambda)."""

    name: str

    def key(self):
        return (1, int(self.name[1:]))

    def __str__(self):
        return f"(delta {self.name})"


@dataclass(frozen=True)
class RadialMarker:
    """The differential dr_j attached to a polar-form term."""

    j: int

    def key(self):
        return (2, self.j)

    def __str__(self):
        return f"(dr {self.j})"


def marker_lambda(mk):
    return getattr(mk, "name", None)


# ---------------------------------------------------------------- terms

@dataclass(frozen=True)
class Term:
    coeff: ScalarExpr
    chain: DiracChain = DiracChain()
    dens: tuple = ()
    markers: frozenset = frozenset()

    def key(self):
        return (self.chain.key(), tuple(d.key() for d in self.dens),
                tuple(sorted(m.key() for m in self.markers)))

    def __str__(self):
        parts = [f'(term (coeff "{self.coeff}") {self.chain}']
        parts += [str(d) for d in self.dens]
        parts += [str(m) for m in sorted(self.markers, key=lambda m: m.key())]
        return " ".join(parts) + ")"

    def mul(self, other):
        if self.chain.traced and other.chain.elements or other.chain.traced and self.chain.elements:
            raise StateError("cannot multiply a traced chain by an open chain")
        names = [marker_lambda(m) for m in self.markers if marker_lambda(m)]
        for m in other.markers:
            if marker_lambda(m) and marker_lambda(m) in names:
                raise ContextError(f"lambda {marker_lambda(m)} reserved twice")
        chain = DiracChain(self.chain.elements + other.chain.elements,
                           self.chain.traced or other.chain.traced)
        return Term(self.coeff * other.coeff, chain, self.dens + other.dens,
                    self.markers | other.markers)


class Expr:
    """A finite sum of Terms over one symbol context."""

    __slots__ = ("ctx", "terms", "provenance")

    def __init__(self, ctx: Context, terms=(), provenance=()):
        self.ctx = ctx
        self.terms = tuple(terms)
        self.provenance = tuple(provenance)

    # constructors
    @classmethod
    def scalar(cls, ctx, s):
        if not isinstance(s, ScalarExpr):
            s = ScalarExpr.const(s)
        return cls(ctx, (Term(s),) if not s.is_zero() else ())

    @classmethod
    def chain(cls, ctx, elements, coeff=ONE, dens=(), markers=(), traced=False):
        if not isinstance(coeff, ScalarExpr):
            coeff = ScalarExpr.const(coeff)
        return cls(ctx, (Term(coeff, DiracChain(tuple(elements), traced), tuple(dens),
                              frozenset(markers)),))

    def _check(self, other):
        if self.ctx != other.ctx:
            raise ContextError("expressions from different contexts",
                               left=self.ctx.n, right=other.ctx.n)

    def __add__(self, other):
        self._check(other)
        return Expr(self.ctx, self.terms + other.terms, self.provenance)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        if not isinstance(c, ScalarExpr):
            c = ScalarExpr.const(c)
        return Expr(self.ctx, [Term(c * t.coeff, t.chain, t.dens, t.markers) for t in self.terms],
                    self.provenance)

    def __mul__(self, other):
        if isinstance(other, Expr):
            self._check(other)
            return Expr(self.ctx, [a.mul(b) for a in self.terms for b in other.terms],
                        self.provenance + other.provenance)
        return self.scale(other)

    def __rmul__(self, c):
        return self.scale(c)

    def map_terms(self, fn):
        out = []
        for t in self.terms:
            r = fn(t)
            if isinstance(r, Term):
                out.append(r)
            else:
                out.extend(r)
        return Expr(self.ctx, out, self.provenance)

    def with_provenance(self, *records):
        return Expr(self.ctx, self.terms, self.provenance + tuple(records))

    def is_zero(self):
        return not canonicalize(self).terms

    def markers(self):
        out = set()
        for t in self.terms:
            out |= t.markers
        return out

    def serialize(self):
        return serialize(self)

    def __str__(self):
        return serialize(self)

    __repr__ = __str__


def zero(ctx):
    return Expr(ctx, ())


# ---------------------------------------------------------------- canonicalization

def _basis(s):
    return MomentumVector({s: 1})


def _expand_element(e):
    """Linear expansion of one chain element: list of (ScalarExpr, element|None)."""
    kind = e[0]
    if kind in ("s", "n"):
        v = e[1]
        out = [(ScalarExpr.const(c), ("s", _basis(s))) for s, c in v.coeffs]
        out += [(lam(ln) * c, ("s", _basis(s))) for (ln, s), c in v.lam]
        if kind == "n":
            out.append((M, None))
        return out
    if kind == "M":
        return [(M, None)]
    if kind == "u":
        return [(ONE, None)]
    return [(ONE, e)]


def _validate(ctx, t):
    syms = set()
    for a in t.coeff.atoms():
        syms |= atom_symbols(a)
        if a[0] == "L":
            ctx.check_lambda(a[1])
        if a[0] == "r" and not 1 <= a[1] <= ctx.n:
            raise ContextError(f"radial variable r{a[1]} outside context", atom=str(a))
    for e in t.chain.elements:
        if e[0] in "snP":
            syms |= e[1].symbols()
            for ln in e[1].lambdas():
                ctx.check_lambda(ln)
    for d in t.dens:
        for a in d.body.atoms():
            syms |= atom_symbols(a)
    for s in syms:
        ctx.check_symbol(s)
    gi = t.chain.gamma_indices()
    over = sorted({i for i in gi if gi.count(i) > 2})
    if over:
        raise DiracIndexError(f"index {over[0]} appears more than twice in a term", index=over[0])


def _contract(flat, chain):
    """Contract repeated indices between V/G atoms and chain gammas.

    ``flat`` is a list of atoms (with repetition); returns (factor, flat, chain).
    """
    factor = Fraction(1)
    flat = list(flat)
    chain = list(chain)
    while True:
        counts = {}
        for a in flat:
            for i in atom_indices(a):
                counts[i] = counts.get(i, 0) + 1
        for e in chain:
            if e[0] == "g":
                counts[e[1]] = counts.get(e[1], 0) + 1
        bad = [i for i, c in counts.items() if c > 2]
        if bad:
            raise DiracIndexError(f"index {bad[0]} appears more than twice in a term", index=bad[0])
        done = True
        for pos, a in enumerate(flat):
            if a[0] == "G":
                mu, nu = a[1], a[2]
                if mu == nu:
                    factor *= DIM
                    del flat[pos]
                    done = False
                    break
                for src, dst in ((mu, nu), (nu, mu)):
                    if counts.get(src) == 2:
                        del flat[pos]
                        _rename_one(flat, chain, src, dst)
                        done = False
                        break
                if not done:
                    break
            elif a[0] == "V":
                mu = a[2]
                if counts.get(mu) != 2:
                    continue
                gpos = [k for k, e in enumerate(chain) if e == ("g", mu)]
                if gpos:
                    chain[gpos[0]] = ("s", _basis(a[1]))
                    del flat[pos]
                    done = False
                    break
                for pos2, b in enumerate(flat):
                    if pos2 != pos and b[0] == "V" and b[2] == mu:
                        x, y = a[1], b[1]
                        for k in sorted((pos, pos2), reverse=True):
                            del flat[k]
                        flat.append(_b_atom(x, y))
                        done = False
                        break
                if not done:
                    break
        if done:
            return factor, flat, chain


def _rename_one(flat, chain, src, dst):
    for k, a in enumerate(flat):
        if a[0] == "V" and a[2] == src:
            flat[k] = ("V", a[1], dst)
            return
        if a[0] == "G" and src in (a[1], a[2]):
            other = a[2] if a[1] == src else a[1]
            x, y = sorted((other, dst))
            flat[k] = ("G", x, y)
            return
    for k, e in enumerate(chain):
        if e == ("g", src):
            chain[k] = ("g", dst)
            return


def _needs_contraction(mono, chain):
    idx = []
    for a, e in mono:
        if a[0] in "VG":
            idx += atom_indices(a) * e
    if not idx:
        return False
    if len(idx) != len(set(idx)):
        return True
    gi = {e[1] for e in chain if e[0] == "g"}
    return any(i in gi for i in idx)


def _normalize_dens(dens):
    """Monic bodies, merged powers; returns (ScalarExpr factor, tuple of factors)."""
    factor = ONE
    merged = {}
    for d in dens:
        c = d.body.leading()[1]
        body, tag = d.body, d.tag
        if body.is_const():
            factor = factor * ScalarExpr.const(Fraction(1) / (body.const_value() ** d.power))
            continue
        if c != 1:
            body = body * (Fraction(1) / c)
            factor = factor * ScalarExpr.const(Fraction(1) / c ** d.power)
            if c < 0:
                tag = flip_tag(tag)
        k = (body, tag)
        merged[k] = merged.get(k, 0) + d.power
    out = [DenominatorFactor(b, t, p) for (b, t), p in merged.items()]
    out.sort(key=lambda d: d.key())
    return factor, tuple(out)


def canonicalize(e: Expr) -> Expr:
    """Unique normal form: expanded chains, contracted indices, monic denominators."""
    acc = {}
    for t in e.terms:
        _validate(e.ctx, t)
        dfac, dens = _normalize_dens(t.dens)
        base = t.coeff * dfac
        if base.is_zero():
            continue
        options = [_expand_element(el) for el in t.chain.elements]
        for choice in product(*options):
            coeff = base
            chain = []
            for c, el in choice:
                if not c.is_const() or c.const_value() != 1:
                    coeff = coeff * c
                if el is not None:
                    chain.append(el)
            if coeff.is_zero():
                continue
            for mono, c in coeff.terms.items():
                ch = chain
                if _needs_contraction(mono, chain):
                    flat = [a for a, ex in mono for _ in range(ex)]
                    f, flat, ch = _contract(flat, chain)
                    piece = ScalarExpr.const(c * f)
                    for a in flat:
                        piece = piece * ScalarExpr.atom(a)
                else:
                    piece = ScalarExpr({mono: c})
                if _chain_zero(ch):
                    continue
                key_chain = DiracChain(tuple(ch), t.chain.traced)
                k = (key_chain, dens, t.markers)
                acc[k] = acc[k] + piece if k in acc else piece
    terms = [Term(c, ch, dn, mk) for (ch, dn, mk), c in acc.items() if not c.is_zero()]
    terms.sort(key=lambda t: t.key())
    return Expr(e.ctx, terms, e.provenance)


def _chain_zero(ch):
    return any(el[0] == "s" and el[1].is_zero() for el in ch)


def serialize(e: Expr) -> str:
    lines = [f"(expr n={e.ctx.n}"]
    lines += ["  " + str(t) for t in e.terms]
    return "\n".join(lines) + ")"


def equal(a: Expr, b: Expr) -> bool:
    """Canonical equality."""
    return canonicalize(a - b).terms == ()


def term_indices(t: Term):
    """Index -> occurrence count over coefficient atoms (max over monomials) and chain."""
    counts = {}
    for i in t.chain.gamma_indices():
        counts[i] = counts.get(i, 0) + 1
    best = {}
    for mono in t.coeff.terms:
        local = {}
        for a, ex in mono:
            for i in atom_indices(a):
                local[i] = local.get(i, 0) + ex
        for i, c in local.items():
            best[i] = max(best.get(i, 0), c)
    for i, c in best.items():
        counts[i] = counts.get(i, 0) + c
    return counts


def expr_indices(e: Expr):
    out = set()
    for t in e.terms:
        out |= set(term_indices(t))
        for d in t.dens:
            for a in d.body.atoms():
                out |= set(atom_indices(a))
    return out


def sorted_atoms(atoms):
    return sorted(atoms, key=atom_key)


__all__ = [
    "INF", "gamma", "slash", "num", "prop", "MASS", "UNIT", "DiracChain",
    "DenominatorFactor", "LambdaMarker", "DeltaMarker", "RadialMarker", "Term",
    "Expr", "zero", "canonicalize", "serialize", "equal", "mono_key", "ZERO", "ONE",
]
