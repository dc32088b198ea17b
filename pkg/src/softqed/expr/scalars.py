"""Polynomials over scalar atoms with exact rational coefficients.

Atoms are plain tuples:

    ('I',)            imaginary unit, reduced by I*I = -1
    ('m',)            the charged-particle mass
    ('L', 'l3')       a lambda parameter
    ('r', 2)          a radial variable
    ('B', s, t)       Minkowski product of two basis symbols (s <= t)
    ('V', s, mu)      lower component s_mu carrying a free index
    ('G', mu, nu)     metric tensor g_{mu nu} (mu <= nu)
    ('F', kind, args) opaque transcendental; args is a tuple of ScalarExpr
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .vectors import MomentumVector, sym_key

_KIND = {"I": 0, "m": 1, "L": 2, "r": 3, "B": 4, "V": 5, "G": 6, "F": 7}

DIM = 4  # trace normalization and g^mu_mu


@lru_cache(maxsize=None)
def atom_key(a):
    kind = a[0]
    if kind in ("I", "m"):
        return (_KIND[kind],)
    if kind == "L":
        return (2, int(a[1][1:]))
    if kind == "r":
        return (3, a[1])
    if kind == "B":
        return (4, sym_key(a[1]), sym_key(a[2]))
    if kind == "V":
        return (5, sym_key(a[1]), a[2])
    if kind == "G":
        return (6, a[1], a[2])
    if kind == "F":
        return (7, a[1], tuple(str(x) for x in a[2]))
    raise ValueError(f"unknown atom {a!r}")


def mono_key(mono):
    return tuple((atom_key(a), e) for a, e in mono)


def _mono_mul(m1, m2):
    """Multiply monomials; returns (sign, monomial)."""
    if not m1:
        return 1, m2
    if not m2:
        return 1, m1
    d = dict(m1)
    for a, e in m2:
        d[a] = d.get(a, 0) + e
    sign = 1
    ie = d.get(("I",), 0)
    if ie >= 2:
        if (ie // 2) % 2:
            sign = -1
        if ie % 2:
            d[("I",)] = 1
        else:
            del d[("I",)]
    return sign, tuple(sorted(d.items(), key=lambda ae: atom_key(ae[0])))


class ScalarExpr:
    """Immutable polynomial: mapping monomial -> Fraction."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms=None):
        self.terms = terms or {}
        self._hash = None

    # constructors
    @staticmethod
    def const(c):
        c = Fraction(c)
        return ScalarExpr({(): c} if c else {})

    @staticmethod
    def atom(a, power=1):
        atom_key(a)
        if a == ("I",) and power >= 2:
            return ScalarExpr.atom(a, 1) ** power
        return ScalarExpr({((a, power),): Fraction(1)}) if power else ONE

    # algebra
    def __add__(self, other):
        if not isinstance(other, ScalarExpr):
            other = ScalarExpr.const(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        d = dict(self.terms)
        for m, c in other.terms.items():
            v = d.get(m, 0) + c
            if v:
                d[m] = v
            else:
                d.pop(m, None)
        return ScalarExpr(d)

    __radd__ = __add__

    def __neg__(self):
        return ScalarExpr({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, ScalarExpr):
            other = ScalarExpr.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return ScalarExpr.const(other) - self

    def __mul__(self, other):
        if not isinstance(other, ScalarExpr):
            c = Fraction(other)
            if not c:
                return ZERO
            return ScalarExpr({m: c * v for m, v in self.terms.items()})
        d = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                s, m = _mono_mul(m1, m2)
                v = d.get(m, 0) + s * c1 * c2
                if v:
                    d[m] = v
                else:
                    d.pop(m, None)
        return ScalarExpr(d)

    __rmul__ = __mul__

    def __pow__(self, n):
        out = ONE
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, ScalarExpr):
            try:
                other = ScalarExpr.const(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    # inspection
    def is_zero(self):
        return not self.terms

    def is_const(self):
        return all(not m for m in self.terms)

    def const_value(self):
        if not self.is_const():
            raise ValueError("not a constant")
        return self.terms.get((), Fraction(0))

    def atoms(self):
        out = set()
        for m in self.terms:
            out.update(a for a, _ in m)
        return out

    def sorted_items(self):
        return sorted(self.terms.items(), key=lambda mc: mono_key(mc[0]))

    def leading(self):
        return self.sorted_items()[0]

    def min_degree(self, atom):
        return min(dict(m).get(atom, 0) for m in self.terms)

    def max_degree(self, atom):
        return max(dict(m).get(atom, 0) for m in self.terms)

    def lowest_part(self, atom):
        """(degree, coefficient polynomial) of the lowest power of ``atom``."""
        d = self.min_degree(atom)
        part = {}
        for m, c in self.terms.items():
            md = dict(m)
            if md.get(atom, 0) == d:
                md.pop(atom, None)
                part[tuple(sorted(md.items(), key=lambda ae: atom_key(ae[0])))] = c
        return d, ScalarExpr(part)

    # transformation
    def subs(self, fn):
        """Replace atoms: fn(atom) returns a ScalarExpr or None to keep it."""
        out = ZERO
        cache = {}
        for m, c in self.terms.items():
            term = ScalarExpr({(): c})
            keep = []
            for a, e in m:
                if a not in cache:
                    cache[a] = fn(a)
                r = cache[a]
                if r is None:
                    keep.append((a, e))
                else:
                    term = term * (r ** e)
            if keep:
                term = term * ScalarExpr({tuple(keep): Fraction(1)})
            out = out + term
        return out

    def diff_atom(self, atom):
        d = {}
        for m, c in self.terms.items():
            md = dict(m)
            e = md.get(atom, 0)
            if not e:
                continue
            if e == 1:
                del md[atom]
            else:
                md[atom] = e - 1
            mono = tuple(sorted(md.items(), key=lambda ae: atom_key(ae[0])))
            d[mono] = d.get(mono, 0) + c * e
        return ScalarExpr({m: c for m, c in d.items() if c})

    def diff(self, fn):
        """Derivation: fn(atom) gives d(atom) as a ScalarExpr or None for zero."""
        out = ZERO
        for a in self.atoms():
            da = fn(a)
            if da is not None and not da.is_zero():
                out = out + self.diff_atom(a) * da
        return out

    def content(self):
        return self.leading()[1] if self.terms else Fraction(0)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_items():
            parts.append(_fmt_term(m, c))
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out

    __repr__ = __str__


def fmt_atom(a):
    kind = a[0]
    if kind == "I":
        return "i"
    if kind == "m":
        return "m"
    if kind == "L":
        return a[1]
    if kind == "r":
        return f"r{a[1]}"
    if kind == "B":
        return f"({a[1]}.{a[2]})"
    if kind == "V":
        return f"{a[1]}_{a[2]}"
    if kind == "G":
        return f"g_{a[1]},{a[2]}"
    return f"{a[1]}[" + ";".join(str(x) for x in a[2]) + "]"


def _fmt_term(m, c):
    body = "*".join(fmt_atom(a) + (f"^{e}" if e != 1 else "") for a, e in m)
    if not body:
        return str(c)
    if c == 1:
        return body
    if c == -1:
        return "-" + body
    return f"{c}*{body}"


ZERO = ScalarExpr({})
ONE = ScalarExpr({(): Fraction(1)})
I = ScalarExpr({((("I",), 1),): Fraction(1)})
M = ScalarExpr.atom(("m",))


def lam(name):
    return ScalarExpr.atom(("L", name))


def radial(j):
    return ScalarExpr.atom(("r", j))


def metric(mu, nu):
    a, b = sorted((mu, nu))
    return ScalarExpr.atom(("G", a, b))


def _pieces(v):
    """(coefficient, lambda-atom or None, symbol) triples of a vector."""
    out = [(c, None, s) for s, c in v.coeffs]
    out += [(c, ln, s) for (ln, s), c in v.lam]
    return out


def _b_atom(s, t):
    if sym_key(s) > sym_key(t):
        s, t = t, s
    return ("B", s, t)


def dot(u: MomentumVector, v: MomentumVector) -> ScalarExpr:
    """Fully expanded Minkowski product u.v."""
    out = ZERO
    for c1, l1, s1 in _pieces(u):
        for c2, l2, s2 in _pieces(v):
            term = ScalarExpr.atom(_b_atom(s1, s2)) * (c1 * c2)
            if l1:
                term = term * lam(l1)
            if l2:
                term = term * lam(l2)
            out = out + term
    return out


def comp(u: MomentumVector, idx) -> ScalarExpr:
    """Lower component u_idx as a polynomial in V atoms."""
    out = ZERO
    for c, ln, s in _pieces(u):
        term = ScalarExpr.atom(("V", s, idx)) * c
        if ln:
            term = term * lam(ln)
        out = out + term
    return out


def b_atom(s, t):
    return ScalarExpr.atom(_b_atom(s, t))


def opaque(kind, *args):
    return ScalarExpr.atom(("F", kind, tuple(args)))


def atom_symbols(a):
    if a[0] == "B":
        return {a[1], a[2]}
    if a[0] == "V":
        return {a[1]}
    if a[0] == "F":
        out = set()
        for x in a[2]:
            for b in x.atoms():
                out |= atom_symbols(b)
        return out
    return set()


def atom_indices(a):
    if a[0] == "V":
        return [a[2]]
    if a[0] == "G":
        return [a[1], a[2]]
    return []
