"""Pointwise evaluation of expressions, exact or in complex floating point."""
from __future__ import annotations

import cmath
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from ..errors import PoleHit, StateError
from ..expr.terms import Expr
from .exact import GAMMA_EXACT, GAMMA_FLOAT, METRIC, CMat, GQ

EPS_RATIO = 1e3


@dataclass
class EvaluationPoint:
    """Vector-level assignment: contravariant 4-vectors for every basis symbol.

    B atoms are derived from the vectors, so Gram consistency is automatic.
    ``eps`` is None for exact evaluation; otherwise i0 tags become i*eps with
    photon-ranked tags scaled down by EPS_RATIO per rank.
    """

    vectors: dict
    m: object
    lams: dict = field(default_factory=dict)
    radii: dict = field(default_factory=dict)
    indices: dict = field(default_factory=dict)
    eps: object = None
    eps_order: tuple = ()

    @property
    def exact(self):
        return self.eps is None

    def with_(self, **kw):
        d = dict(vectors=self.vectors, m=self.m, lams=self.lams, radii=self.radii,
                 indices=self.indices, eps=self.eps, eps_order=self.eps_order)
        d.update(kw)
        return EvaluationPoint(**d)

    def as_float(self, eps=1e-9):
        cv = lambda x: complex(x) if not isinstance(x, GQ) else complex(x)
        return EvaluationPoint(
            {s: tuple(cv(float(c) if isinstance(c, Fraction) else c) for c in v)
             for s, v in self.vectors.items()},
            complex(float(self.m)) if isinstance(self.m, Fraction) else complex(self.m),
            {k: float(v) for k, v in self.lams.items()},
            {k: float(v) for k, v in self.radii.items()},
            dict(self.indices), eps, self.eps_order)


def random_rational(rng, lo=-9, hi=9, den=7, nonzero=False):
    while True:
        v = Fraction(rng.randint(lo, hi), rng.randint(1, den))
        if v or not nonzero:
            return v


def random_point(ctx, rng=None, seed=None, lams=(), radii=(), indices=(), exact=True, eps=1e-9):
    """Random rational point for every symbol of the context."""
    rng = rng or random.Random(seed)
    vectors = {s: tuple(random_rational(rng) for _ in range(4)) for s in ctx.symbols()}
    for j in ctx.onshell:
        v = list(vectors[f"k{j}"])
        # light-like with rational entries: Pythagorean spatial part
        a, b = rng.randint(1, 6), rng.randint(1, 6)
        v = [Fraction(a * a + b * b), Fraction(a * a - b * b), Fraction(2 * a * b), Fraction(0)]
        vectors[f"k{j}"] = tuple(v)
    m = Fraction(rng.randint(1, 9), rng.randint(1, 4))
    pt = EvaluationPoint(
        vectors, m,
        {name: Fraction(rng.randint(1, 97), 98) for name in lams},
        {j: Fraction(rng.randint(1, 97), 98) for j in radii},
        {i: rng.randint(0, 3) for i in indices})
    return pt if exact else pt.as_float(eps)


# ---------------------------------------------------------------- evaluation

class _Evaluator:
    def __init__(self, pt: EvaluationPoint):
        self.pt = pt
        self.exact = pt.exact
        self._elem = {}
        self._atom = {}
        self._vec = {}
        self._scal = {}
        self._chain = {}

    # scalars
    def one(self):
        return GQ(1) if self.exact else 1.0 + 0j

    def num(self, c):
        return GQ(c) if self.exact else complex(float(c))

    def vec(self, v):
        """Contravariant components of a MomentumVector."""
        if v in self._vec:
            return self._vec[v]
        pt = self.pt
        out = [self.num(0)] * 4
        for s, c in v.coeffs:
            x = pt.vectors[s]
            out = [o + self.num(c) * self._n(xi) for o, xi in zip(out, x)]
        for (ln, s), c in v.lam:
            x = pt.vectors[s]
            lv = self._n(pt.lams[ln])
            out = [o + self.num(c) * lv * self._n(xi) for o, xi in zip(out, x)]
        self._vec[v] = out
        return out

    def _n(self, x):
        if self.exact:
            return x if isinstance(x, GQ) else GQ(x)
        return complex(x) if not isinstance(x, complex) else x

    def mdot(self, a, b):
        return a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]

    def atom(self, a, idx):
        kind = a[0]
        if kind == "I":
            return GQ(0, 1) if self.exact else 1j
        if kind == "m":
            return self._n(self.pt.m)
        if kind == "L":
            return self._n(self.pt.lams[a[1]])
        if kind == "r":
            return self._n(self.pt.radii[a[1]])
        if kind == "B":
            key = a
            if key not in self._atom:
                x = [self._n(c) for c in self.pt.vectors[a[1]]]
                y = [self._n(c) for c in self.pt.vectors[a[2]]]
                self._atom[key] = self.mdot(x, y)
            return self._atom[key]
        if kind == "V":
            mu = idx[a[2]]
            return self._n(self.pt.vectors[a[1]][mu]) * METRIC[mu]
        if kind == "G":
            mu, nu = idx[a[1]], idx[a[2]]
            return self.num(METRIC[mu] if mu == nu else 0)
        if kind == "F":
            if self.exact:
                raise StateError("opaque transcendental atom needs floating evaluation",
                                 atom=a[1])
            args = [self.scalar(x, idx) for x in a[2]]
            return _transcendental(a[1], args)
        raise StateError(f"cannot evaluate atom {a!r}")

    def scalar(self, s, idx):
        if s in self._scal:
            return self._scal[s]
        free = not any(a[0] in "VGF" for a in s.atoms())
        val = self._scalar(s, idx)
        if free:
            self._scal[s] = val
        return val

    def _scalar(self, s, idx):
        total = self.num(0)
        for mono, c in s.terms.items():
            v = self.num(c)
            for a, e in mono:
                av = self.atom(a, idx)
                for _ in range(e):
                    v = v * av
            total = total + v
        return total

    # matrices
    def gamma_upper(self, mu):
        return GAMMA_EXACT[mu] if self.exact else GAMMA_FLOAT[mu]

    def identity(self, c=None):
        if self.exact:
            return CMat.identity(c if c is not None else 1)
        return np.eye(4, dtype=complex) * (c if c is not None else 1)

    def scale(self, mat, c):
        return mat.scale(c) if self.exact else mat * c

    def matmul(self, a, b):
        return a @ b

    def slash_mat(self, comps):
        out = None
        for mu in range(4):
            c = comps[mu] * METRIC[mu]
            term = self.scale(self.gamma_upper(mu), c)
            out = term if out is None else out + term
        return out

    def element(self, el, idx):
        kind = el[0]
        if kind == "g":
            mu = idx[el[1]]
            return self.scale(self.gamma_upper(mu), METRIC[mu])
        key = el
        if key in self._elem:
            return self._elem[key]
        if kind == "s":
            val = self.slash_mat(self.vec(el[1]))
        elif kind == "n":
            val = self.slash_mat(self.vec(el[1])) + self.identity(self._n(self.pt.m))
        elif kind == "P":
            v = self.vec(el[1])
            m = self._n(self.pt.m)
            den = self.mdot(v, v) - m * m
            if self.exact:
                if den.is_zero():
                    raise PoleHit("propagator on shell", vector=str(el[1]))
                inv = GQ(1) / den
            else:
                den = den + 1j * (self.pt.eps or 0.0)
                if den == 0:
                    raise PoleHit("propagator on shell", vector=str(el[1]))
                inv = 1 / den
            val = self.scale(self.slash_mat(v) + self.identity(m), inv)
        elif kind == "M":
            val = self.identity(self._n(self.pt.m))
        else:
            val = self.identity()
        self._elem[key] = val
        return val

    def chain(self, els, idx):
        # prefix products are shared between terms
        out = None
        key = ()
        for el in els:
            key = key + ((el, idx[el[1]]) if el[0] == "g" else (el,),)
            hit = self._chain.get(key)
            if hit is None:
                mat = self.element(el, idx)
                hit = mat if out is None else self.matmul(out, mat)
                self._chain[key] = hit
            out = hit
        return out

    def tag_eps(self, tag):
        if tag is None or self.exact:
            return 0.0
        eps = self.pt.eps
        if tag == "+":
            return eps
        if tag == "-":
            return -eps
        order = self.pt.eps_order or ()
        j = tag[1]
        rank = order.index(j) if j in order else j - 1
        return tag[2] * eps / EPS_RATIO ** rank

    def denominators(self, dens, idx):
        val = self.one()
        for d in dens:
            b = self.scalar(d.body, idx)
            if self.exact:
                if b.is_zero():
                    raise PoleHit("denominator vanishes", body=str(d.body))
                val = val / (b ** d.power)
            else:
                b = b + 1j * self.tag_eps(d.tag)
                if b == 0:
                    raise PoleHit("denominator vanishes", body=str(d.body))
                val = val / b ** d.power
        return val


def _transcendental(kind, args):
    if kind == "sqrt":
        return cmath.sqrt(args[0])
    if kind == "log":
        return cmath.log(args[0])
    if kind == "logratio":
        u, s = args
        return cmath.log((u - s) / (u + s))
    raise StateError(f"unknown transcendental {kind}")


def _term_value(ev: _Evaluator, t, free_values):
    """Value of one term: scalar (None chain) or matrix."""
    dens = ev.denominators(t.dens, free_values)
    els = t.chain.elements
    open_chain = bool(els) and not t.chain.traced
    total = None
    for mono, c in t.coeff.terms.items():
        local = {}
        for a, e in mono:
            if a[0] in "VG":
                for i in ([a[2]] if a[0] == "V" else [a[1], a[2]]):
                    local[i] = local.get(i, 0) + e
        for i in t.chain.gamma_indices():
            local[i] = local.get(i, 0) + 1
        summed = sorted(i for i, k in local.items() if k == 2)
        for i, k in local.items():
            if k == 1 and i not in free_values:
                raise StateError(f"free index {i} has no assigned value", index=i)
            if k > 2:
                raise StateError(f"index {i} repeated {k} times")
        mono_poly = type(t.coeff)({mono: c})
        for vals in product(range(4), repeat=len(summed)):
            idx = dict(free_values)
            sign = 1
            for i, v in zip(summed, vals):
                idx[i] = v
                sign *= METRIC[v]
            coef = ev.scalar(mono_poly, idx) * sign
            if els:
                mat = ev.chain(els, idx)
                val = mat.trace() * coef if t.chain.traced else ev.scale(mat, coef)
            else:
                val = coef
            total = val if total is None else total + val
    if total is None:
        return None, open_chain
    if open_chain:
        return ev.scale(total, dens), True
    return total * dens, False


def eval_expr(e: Expr, pt: EvaluationPoint):
    """Value of e at pt: a scalar, or a 4x4 matrix when open chains are present.

    Reserved lambda integrals are evaluated pointwise at pt.lams.
    """
    ev = _Evaluator(pt)
    scalar = ev.num(0)
    matrix = None
    for t in e.terms:
        val, is_mat = _term_value(ev, t, pt.indices)
        if val is None:
            continue
        if is_mat:
            matrix = val if matrix is None else matrix + val
        else:
            scalar = scalar + val
    if matrix is None:
        return scalar
    has_scalar = not (scalar.is_zero() if ev.exact else scalar == 0)
    return matrix + ev.identity(scalar) if has_scalar else matrix


def value_entries(v):
    """Flatten a scalar or matrix value to a list of complex numbers or GQs."""
    if isinstance(v, CMat):
        return v.entries()
    if isinstance(v, np.ndarray):
        return list(v.flatten())
    return [v]


def is_zero_value(v):
    return all((x.is_zero() if isinstance(x, GQ) else x == 0) for x in value_entries(v))
