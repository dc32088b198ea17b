"""Symbol context and formal momentum vectors."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import ContextError

_SYM = re.compile(r"^(p|q[123]|k[1-9][0-9]*|w[1-9][0-9]*)$")
_LAM = re.compile(r"^l[1-9][0-9]*$")


def sym_key(s):
    """Total order on basis symbols: p < q1 < q2 < q3 < k1 < ... < w1 < ..."""
    if s == "p":
        return (0, 0)
    head, idx = s[0], int(s[1:])
    return ({"q": 1, "k": 2, "w": 3}[head], idx)


def is_photon(s):
    return s[0] in "kw"


def photon_of(s):
    return int(s[1:])


@dataclass(frozen=True)
class Context:
    """Declared symbol set: p, q1..q3, k1..kn and their polar directions w1..wn.

    ``onshell`` lists photons with k_j^2 = 0.
    """

    n: int
    onshell: frozenset = field(default_factory=frozenset)

    def symbols(self):
        out = ["p", "q1", "q2", "q3"]
        out += [f"k{j}" for j in range(1, self.n + 1)]
        out += [f"w{j}" for j in range(1, self.n + 1)]
        return tuple(out)

    def check_symbol(self, s):
        if not _SYM.match(s):
            raise ContextError(f"malformed symbol {s!r}", symbol=s)
        if s[0] in "kw" and int(s[1:]) > self.n:
            raise ContextError(f"symbol {s} outside context with n={self.n}", symbol=s)

    def check_lambda(self, name):
        if not _LAM.match(name) or int(name[1:]) > self.n:
            raise ContextError(f"lambda {name!r} outside context n={self.n}", symbol=name)

    def check_photon(self, j):
        if not 1 <= j <= self.n:
            raise ContextError(f"photon {j} outside context n={self.n}", photon=j)


def _frac(x):
    return x if isinstance(x, Fraction) else Fraction(x)


class MomentumVector:
    """Rational combination of basis symbols plus lambda-scaled terms.

    ``coeffs`` is a sorted tuple of (symbol, Fraction); ``lam`` a sorted tuple of
    ((lambda_name, symbol), Fraction).  Zero entries never appear.
    """

    __slots__ = ("coeffs", "lam", "_hash")

    def __init__(self, coeffs=None, lam=None):
        c = {}
        for s, v in (coeffs or {}).items():
            v = _frac(v)
            if v:
                _SYM.match(s) or _bad(s)
                c[s] = v
        lt = {}
        for (ln, s), v in (lam or {}).items():
            v = _frac(v)
            if v:
                lt[(ln, s)] = v
        self.coeffs = tuple(sorted(c.items(), key=lambda kv: sym_key(kv[0])))
        self.lam = tuple(sorted(lt.items(), key=lambda kv: (int(kv[0][0][1:]), sym_key(kv[0][1]))))
        self._hash = hash((self.coeffs, self.lam))

    # construction helpers
    def as_dict(self):
        return dict(self.coeffs)

    def lam_dict(self):
        return dict(self.lam)

    def __eq__(self, other):
        return isinstance(other, MomentumVector) and self.coeffs == other.coeffs and self.lam == other.lam

    def __hash__(self):
        return self._hash

    def __add__(self, other):
        c = self.as_dict()
        for s, v in other.coeffs:
            c[s] = c.get(s, 0) + v
        lt = self.lam_dict()
        for k, v in other.lam:
            lt[k] = lt.get(k, 0) + v
        return MomentumVector(c, lt)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, a):
        return self.scale(a)

    def scale(self, a):
        a = _frac(a)
        return MomentumVector({s: a * v for s, v in self.coeffs}, {k: a * v for k, v in self.lam})

    def is_zero(self):
        return not self.coeffs and not self.lam

    def coeff(self, s):
        for t, v in self.coeffs:
            if t == s:
                return v
        return Fraction(0)

    def symbols(self):
        out = {s for s, _ in self.coeffs}
        out.update(s for (_, s), _ in self.lam)
        return out

    def lambdas(self):
        return {ln for (ln, _), _ in self.lam}

    def shift(self, s, delta, lam_name=None):
        """Substitute s -> s + lam*delta (or s + delta when lam_name is None)."""
        c = self.coeff(s)
        if not c:
            return self
        if lam_name is None:
            return self + delta.scale(c)
        if delta.lam:
            raise ContextError("lambda shift by a lambda-dependent vector")
        return self + MomentumVector({}, {(lam_name, t): c * v for t, v in delta.coeffs})

    def set_lambda(self, name, value):
        value = _frac(value)
        c = self.as_dict()
        lt = {}
        for (ln, s), v in self.lam:
            if ln == name:
                c[s] = c.get(s, 0) + value * v
            else:
                lt[(ln, s)] = v
        return MomentumVector(c, lt)

    def d_lambda(self, name):
        return MomentumVector({s: v for (ln, s), v in self.lam if ln == name})

    def key(self):
        return (tuple((sym_key(s), v) for s, v in self.coeffs),
                tuple(((int(ln[1:]), sym_key(s)), v) for (ln, s), v in self.lam))

    def __str__(self):
        parts = []
        for s, v in self.coeffs:
            parts.append(_fmt_coeff(v, s))
        for (ln, s), v in self.lam:
            parts.append(_fmt_coeff(v, f"{ln}*{s}"))
        if not parts:
            return "0"
        out = parts[0]
        for p in parts[1:]:
            out += p if p.startswith("-") else "+" + p
        return out

    __repr__ = __str__


def _fmt_coeff(v, s):
    if v == 1:
        return s
    if v == -1:
        return "-" + s
    return f"{v}*{s}"


def _bad(s):
    raise ContextError(f"malformed symbol {s!r}", symbol=s)


def vec(spec):
    """Parse a short vector literal like 'p+k1-2*k2' or a single symbol."""
    if isinstance(spec, MomentumVector):
        return spec
    text = spec.replace(" ", "")
    out = MomentumVector()
    for sign, coef, sym in re.findall(r"([+-]?)(?:([0-9/]+)\*)?([a-z][0-9]*)", text):
        c = Fraction(coef) if coef else Fraction(1)
        if sign == "-":
            c = -c
        out = out + MomentumVector({sym: c})
    return out
