"""Numeric integration over reserved lambda parameters and radial profiles."""
from __future__ import annotations

import cmath
import math

import numpy as np
from scipy.integrate import quad_vec

from ..errors import QuadratureError, StateError
from ..expr.terms import DeltaMarker, Expr, LambdaMarker, Term
from .evaluate import eval_expr, value_entries


def _as_array(v, seen=None):
    vals = value_entries(v)
    arr = np.array([complex(x) for x in vals], dtype=complex)
    if arr.size == 16:
        if seen is not None:
            seen.append(True)
        return arr
    return np.eye(4, dtype=complex).flatten() * arr[0]


def _group(e: Expr):
    groups = {}
    for t in e.terms:
        lms = []
        for m in t.markers:
            if isinstance(m, DeltaMarker):
                raise StateError("endpoint markers must be discharged before quadrature", name=m.name)
            if isinstance(m, LambdaMarker):
                lms.append(m)
            elif not hasattr(m, "j"):
                raise StateError(f"unsupported marker {m} in quadrature")
        key = tuple(sorted(lms, key=lambda m: m.key()))
        groups.setdefault(key, []).append(Term(t.coeff, t.chain, t.dens, frozenset()))
    return groups


def _integrate(fn, lower, upper, rtol, limit):
    if upper == "inf":
        # lambda = u/(1-u) on [0,1)
        lo = float(lower)

        def g(u):
            return fn(lo + u / (1 - u)) / (1 - u) ** 2

        val, err = quad_vec(g, 0.0, 1.0 - 1e-14, epsrel=rtol, epsabs=0.0, limit=limit)
    else:
        val, err = quad_vec(fn, float(lower), float(upper), epsrel=rtol, epsabs=0.0, limit=limit)
    return val, err


def lambda_quadrature(e: Expr, pt, rtol=1e-10, limit=400, profile_points=9):
    """Integrate every reserved lambda marker of e at the (floating) point pt.

    Returns a complex scalar when e is scalar-valued, otherwise the flattened
    4x4 matrix as a length-16 complex array.
    """
    if pt.exact:
        pt = pt.as_float()
    groups = _group(e)
    total = np.zeros(16, dtype=complex)
    seen = []
    for markers, terms in groups.items():
        sub = Expr(e.ctx, terms)

        def value_at(lams, sub=sub):
            v = eval_expr(sub, pt.with_(lams={**pt.lams, **lams}))
            return _as_array(v, seen)

        def nested(level, lams):
            if level == len(markers):
                return value_at(lams)
            m = markers[level]
            fn = lambda x: nested(level + 1, {**lams, m.name: x})
            val, err = _integrate(fn, m.lower, m.upper, rtol, limit)
            scale = max(float(np.max(np.abs(val))), 1e-300)
            if not np.isfinite(val).all() or err > max(1e3 * rtol, 1e-6) * scale:
                xs = np.linspace(0, 1, profile_points)
                prof = [complex(fn(float(x))[0]) for x in xs] if m.upper != "inf" else []
                raise QuadratureError("lambda quadrature did not converge", name=m.name,
                                      error=float(err), profile=prof)
            return val

        total = total + nested(0, {})
    return total if seen else complex(total[0])


def rel_error(a, b):
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size != b.size:
        if a.size == 1:
            a = np.eye(4, dtype=complex).flatten() * a[0]
        else:
            b = np.eye(4, dtype=complex).flatten() * b[0]
    scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))), 1e-300)
    return float(np.max(np.abs(a - b))) / scale


# ---------------------------------------------------------------- closed forms

def quadratic_roots(a, b, c):
    """Roots of a*x^2 + b*x + c (complex, a != 0)."""
    disc = cmath.sqrt(b * b - 4 * a * c)
    return (-b + disc) / (2 * a), (-b - disc) / (2 * a)


def _log_segment(alpha):
    # int_0^1 dx/(x-alpha), alpha off the real segment
    return cmath.log((1 - alpha) / (-alpha))


def inverse_square_integral(a, b, c):
    """int_0^1 dl (a l^2 + b l + c)^-2 by partial fractions (distinct roots off [0,1])."""
    al, be = quadratic_roots(a, b, c)
    s = al - be
    sq = 1 / (1 - al) + 1 / al + 1 / (1 - be) + 1 / be
    logs = _log_segment(al) - _log_segment(be)
    return (-sq - 2 * logs / s) / (a * a * s * s)


def inverse_integral(a, b, c):
    """int_0^1 dl (a l^2 + b l + c)^-1 by partial fractions."""
    al, be = quadratic_roots(a, b, c)
    return (_log_segment(al) - _log_segment(be)) / (a * (al - be))


def lambda_inverse_square_integral(a, b, c):
    """int_0^1 dl l (a l^2 + b l + c)^-2 by partial fractions."""
    al, be = quadratic_roots(a, b, c)
    s = al - be
    # l/((l-al)^2 (l-be)^2) = A/(l-al)^2 + B/(l-al) + C/(l-be)^2 + D/(l-be)
    A = al / s ** 2
    C = be / s ** 2
    B = -(al + be) / s ** 3
    D = -B
    sq = lambda r: -1 / (1 - r) - 1 / r
    return (A * sq(al) + C * sq(be) + B * _log_segment(al) + D * _log_segment(be)) / (a * a)


# ---------------------------------------------------------------- radial profiles

def radial_profile(integrand, j, pt, rmin=1e-6, rmax=1e-2, samples=13, tol=0.05):
    """Leading exponent of |integrand| as r_j -> 0 from a log-log fit.

    ``integrand`` is an Expr in polar form (evaluated at pt with r_j varied) or
    a callable r -> complex.  Returns (exponent, raw samples); raises
    QuadratureError when the profile is not a clean power law.
    """
    rs = np.logspace(math.log10(rmin), math.log10(rmax), samples)
    if callable(integrand):
        vals = [integrand(float(r)) for r in rs]
    else:
        if pt.exact:
            pt = pt.as_float()
        vals = []
        for r in rs:
            v = eval_expr(integrand, pt.with_(radii={**pt.radii, j: float(r)}))
            vals.append(max(abs(complex(x)) for x in value_entries(v)))
    mags = np.abs(np.asarray(vals, dtype=complex))
    if np.any(mags == 0) or not np.all(np.isfinite(mags)):
        raise QuadratureError("profile vanishes or diverges at sample points", samples=list(mags))
    slope, icpt = np.polyfit(np.log(rs), np.log(mags), 1)
    resid = np.log(mags) - (slope * np.log(rs) + icpt)
    n = round(slope)
    if abs(slope - n) > tol or np.max(np.abs(resid)) > 0.5:
        raise QuadratureError("profile is not a power law", slope=float(slope), samples=list(mags))
    return int(n), list(zip(rs.tolist(), mags.tolist()))


# ---------------------------------------------------------------- regular points

def _bodies(e: Expr):
    from ..expr.scalars import M, dot

    out = []
    for t in e.terms:
        out += [d.body for d in t.dens]
        for el in t.chain.elements:
            if el[0] == "P":
                out.append(dot(el[1], el[1]) - M * M)
    return out


def regular_point(e: Expr, rng, indices=(), eps=1e-13, grid=65, margin=1e-3, tries=500,
                  extra=(), **kw):
    """Random floating point at which no denominator of e nears zero on the lambda ranges.

    Denominators are scanned on a grid over every lambda in [0, 1]; with no real
    crossing the i0 prescriptions are immaterial and eps can be tiny.
    """
    from .check import lambda_names, radial_names
    from .evaluate import _Evaluator, random_point

    lams = sorted(set(lambda_names(e)) | {a[1] for b in extra for a in b.atoms() if a[0] == "L"})
    bodies = list({b: None for b in list(_bodies(e)) + list(extra)})
    for _ in range(tries):
        pt = random_point(e.ctx, rng, lams=lams, radii=radial_names(e), indices=indices,
                          exact=False, eps=eps, **kw)
        ok = True
        for b in bodies:
            vals = []
            for x in np.linspace(0.0, 1.0, grid):
                ev = _Evaluator(pt.with_(lams={n: float(x) for n in lams}))
                vals.append(complex(ev.scalar(b, pt.indices)).real)
            vals = np.array(vals)
            scale = max(float(np.max(np.abs(vals))), 1e-300)
            if np.min(np.abs(vals)) < margin * scale or np.any(np.sign(vals) != np.sign(vals[0])):
                ok = False
                break
        if ok:
            return pt
    raise QuadratureError("no regular sample point found", tries=tries)
