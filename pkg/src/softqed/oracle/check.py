"""Randomized identity testing."""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..errors import PoleHit
from ..expr.terms import Expr, expr_indices
from .evaluate import eval_expr, random_point, value_entries


@dataclass
class Verdict:
    passed: bool
    trials: int
    witness: object = None
    inconclusive: bool = False
    pole_hits: int = 0
    max_rel_error: float = 0.0
    notes: list = field(default_factory=list)

    def __bool__(self):
        return self.passed


def lambda_names(*exprs):
    out = set()
    for e in exprs:
        for t in e.terms:
            for a in t.coeff.atoms():
                if a[0] == "L":
                    out.add(a[1])
            for el in t.chain.elements:
                if el[0] in "snP":
                    out |= el[1].lambdas()
            for d in t.dens:
                out |= {a[1] for a in d.body.atoms() if a[0] == "L"}
            for mk in t.markers:
                if getattr(mk, "name", None):
                    out.add(mk.name)
    return sorted(out)


def radial_names(*exprs):
    out = set()
    for e in exprs:
        for t in e.terms:
            for a in t.coeff.atoms():
                if a[0] == "r":
                    out.add(a[1])
            for d in t.dens:
                out |= {a[1] for a in d.body.atoms() if a[0] == "r"}
    return sorted(out)


def _compare(a, b, exact, rtol):
    va, vb = value_entries(a), value_entries(b)
    if len(va) != len(vb):
        if len(va) == 1:
            va = [va[0] if i % 5 == 0 else 0 * va[0] for i in range(16)]
        elif len(vb) == 1:
            vb = [vb[0] if i % 5 == 0 else 0 * vb[0] for i in range(16)]
    if exact:
        return all(x == y for x, y in zip(va, vb)), 0.0
    scale = max(max(abs(complex(x)) for x in va), max(abs(complex(y)) for y in vb), 1e-300)
    err = max(abs(complex(x) - complex(y)) for x, y in zip(va, vb)) / scale
    return err <= rtol, err


def check_identity(lhs: Expr, rhs: Expr, trials=100, seed=0, exact=True, rtol=1e-8,
                   eps=1e-9, retries=50, sampler=None) -> Verdict:
    """Compare lhs and rhs at random points; mismatches return the witness."""
    lhs._check(rhs)
    if lhs.terms == rhs.terms:
        return Verdict(True, 1)
    rng = random.Random(seed)
    lams = lambda_names(lhs, rhs)
    rads = radial_names(lhs, rhs)
    idx = sorted(expr_indices(lhs) | expr_indices(rhs))
    done = hits = 0
    worst = 0.0
    while done < trials:
        if hits > retries:
            return Verdict(False, done, inconclusive=True, pole_hits=hits,
                           notes=["pole-hit retry budget exhausted"])
        if sampler is not None:
            pt = sampler(rng)
        else:
            pt = random_point(lhs.ctx, rng, lams=lams, radii=rads, indices=idx,
                              exact=exact, eps=eps)
        try:
            a = eval_expr(lhs, pt)
            b = eval_expr(rhs, pt)
        except PoleHit:
            hits += 1
            continue
        ok, err = _compare(a, b, exact, rtol)
        worst = max(worst, err)
        if not ok:
            return Verdict(False, done + 1, witness={"point": pt, "lhs": a, "rhs": b},
                           pole_hits=hits, max_rel_error=err)
        done += 1
    return Verdict(True, done, pole_hits=hits, max_rel_error=worst)
