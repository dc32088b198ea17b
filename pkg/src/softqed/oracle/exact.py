"""Exact Gaussian-rational scalars and 4x4 matrices."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

try:  # gmpy2 rationals are an order of magnitude faster than Fraction
    from gmpy2 import mpq as Q
except ImportError:  # pragma: no cover
    Q = Fraction


def q(x):
    if type(x) is int:
        return Q(x)
    if isinstance(x, Fraction):
        return Q(x.numerator, x.denominator)
    return Q(x)


_QT = type(Q(0))


def to_fraction(x):
    return Fraction(int(x.numerator), int(x.denominator))


class GQ:
    """Gaussian rational re + i*im."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if type(re) is _QT else q(re)
        self.im = im if type(im) is _QT else q(im)

    def __add__(self, o):
        if not isinstance(o, GQ):
            o = GQ(o)
        return GQ(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        if not isinstance(o, GQ):
            o = GQ(o)
        return GQ(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        return GQ(o) - self

    def __neg__(self):
        return GQ(-self.re, -self.im)

    def __mul__(self, o):
        if not isinstance(o, GQ):
            o = q(o)
            return GQ(self.re * o, self.im * o)
        return GQ(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if not isinstance(o, GQ):
            o = GQ(o)
        d = o.re * o.re + o.im * o.im
        if d == 0:
            raise ZeroDivisionError
        return GQ((self.re * o.re + self.im * o.im) / d, (self.im * o.re - self.re * o.im) / d)

    def __pow__(self, n):
        out = GQ(1)
        for _ in range(n):
            out = out * self
        return out

    def is_zero(self):
        return self.re == 0 and self.im == 0

    def __eq__(self, o):
        if not isinstance(o, GQ):
            o = GQ(o)
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if self.im == 0:
            return str(self.re)
        return f"({self.re}{'+' if self.im >= 0 else '-'}{abs(self.im)}i)"


def _obj(rows):
    out = np.empty((4, 4), dtype=object)
    for i in range(4):
        for j in range(4):
            out[i, j] = q(rows[i][j])
    return out


class CMat:
    """Exact complex 4x4 matrix as a pair of rational object arrays."""

    __slots__ = ("re", "im")

    def __init__(self, re, im=None):
        self.re = re
        self.im = im if im is not None else _obj([[0] * 4 for _ in range(4)])

    @staticmethod
    def identity(c=1):
        c = c if isinstance(c, GQ) else GQ(c)
        re = _obj([[c.re if i == j else 0 for j in range(4)] for i in range(4)])
        im = _obj([[c.im if i == j else 0 for j in range(4)] for i in range(4)])
        return CMat(re, im)

    @staticmethod
    def zero():
        return CMat(_obj([[0] * 4 for _ in range(4)]))

    def __matmul__(self, o):
        return CMat(self.re.dot(o.re) - self.im.dot(o.im), self.re.dot(o.im) + self.im.dot(o.re))

    def __add__(self, o):
        return CMat(self.re + o.re, self.im + o.im)

    def __sub__(self, o):
        return CMat(self.re - o.re, self.im - o.im)

    def scale(self, c):
        if not isinstance(c, GQ):
            c = GQ(c)
        if c.im == 0:
            return CMat(self.re * c.re, self.im * c.re)
        return CMat(self.re * c.re - self.im * c.im, self.re * c.im + self.im * c.re)

    def trace(self):
        return GQ(sum(self.re[i, i] for i in range(4)), sum(self.im[i, i] for i in range(4)))

    def __eq__(self, o):
        return bool(np.all(self.re == o.re) and np.all(self.im == o.im))

    def is_zero(self):
        return bool(np.all(self.re == 0) and np.all(self.im == 0))

    def to_complex(self):
        return (self.re.astype(float) + 1j * self.im.astype(float)).astype(complex)

    def entries(self):
        return [GQ(self.re[i, j], self.im[i, j]) for i in range(4) for j in range(4)]


# Dirac representation, upper index gamma^mu, as (re, im) integer rows.
_G0 = ([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, -1, 0], [0, 0, 0, -1]], None)
_G1 = ([[0, 0, 0, 1], [0, 0, 1, 0], [0, -1, 0, 0], [-1, 0, 0, 0]], None)
_G2 = (None, [[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]])
_G3 = ([[0, 0, 1, 0], [0, 0, 0, -1], [-1, 0, 0, 0], [0, 1, 0, 0]], None)

_Z = [[0] * 4 for _ in range(4)]
GAMMA_EXACT = [CMat(_obj(r or _Z), _obj(i or _Z)) for r, i in (_G0, _G1, _G2, _G3)]
GAMMA_FLOAT = [m.to_complex() for m in GAMMA_EXACT]
METRIC = (1, -1, -1, -1)
