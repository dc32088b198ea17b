"""Gamma-matrix traces by the recursive pairing formula."""
from __future__ import annotations

from functools import lru_cache

from ..errors import DiracIndexError, StateError
from .rules import _pair
from .scalars import DIM, ONE, ZERO, ScalarExpr
from .terms import DiracChain, _contract, _expand_element


@lru_cache(maxsize=None)
def _trace(slots):
    if len(slots) % 2:
        return ZERO
    if not slots:
        return ScalarExpr.const(DIM)
    a = slots[0]
    out = ZERO
    for k in range(1, len(slots)):
        rest = slots[1:k] + slots[k + 1:]
        sub = _trace(rest)
        if sub.is_zero():
            continue
        term = _pair(a, slots[k]) * sub
        out = out + term if k % 2 else out - term
    return out


def _contract_scalar(s):
    out = ZERO
    for mono, c in s.terms.items():
        flat = [a for a, e in mono for _ in range(e)]
        f, flat, _ = _contract(flat, [])
        piece = ScalarExpr.const(c * f)
        for a in flat:
            piece = piece * ScalarExpr.atom(a)
        out = out + piece
    return out


def trace_reduce(c: DiracChain) -> ScalarExpr:
    """Tr of a closed chain as a polynomial in B atoms and m."""
    if not c.traced:
        raise StateError("trace_reduce needs a traced chain")
    counts = {}
    for el in c.elements:
        if el[0] == "P":
            raise StateError("expand propagators before taking a trace")
        if el[0] == "g":
            counts[el[1]] = counts.get(el[1], 0) + 1
    free = sorted(i for i, n in counts.items() if n == 1)
    if free:
        raise DiracIndexError(f"free index {free[0]} inside a trace", index=free[0])
    if any(n > 2 for n in counts.values()):
        raise DiracIndexError("index repeated more than twice inside a trace")
    options = [_expand_element(el) for el in c.elements]
    total = ZERO

    def walk(k, coeff, slots):
        nonlocal total
        if k == len(options):
            total = total + coeff * _trace(tuple(slots))
            return
        for cf, el in options[k]:
            walk(k + 1, coeff * cf, slots + [el] if el is not None else slots)
    walk(0, ONE, [])
    return _contract_scalar(total)


__all__ = ["trace_reduce"]
