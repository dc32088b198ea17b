import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import dblquad, quad

from softqed.errors import QuadratureError
from softqed.expr import Context, Expr, MomentumVector, dot, vec
from softqed.insertion import kvec
from softqed.oracle import (GQ, LoopPolygon, check_identity, current_pairing, eval_expr,
                            inverse_integral, inverse_square_integral,
                            lambda_inverse_square_integral, log_slope_scan, loop_current,
                            radial_profile, random_point, regulated_pairing, rel_error)
from softqed.oracle.current import _segment_factor, mdot

P = MomentumVector({"p": 1})


def _ward_sides(ctx):
    k = kvec(1)
    lhs = Expr.chain(ctx, [("P", P), ("s", k), ("P", P + k)])
    rhs = Expr.chain(ctx, [("P", P)]) - Expr.chain(ctx, [("P", P + k)])
    return lhs, rhs


def test_true_identity_passes_exactly():
    lhs, rhs = _ward_sides(Context(1))
    v = check_identity(lhs, rhs, trials=30)
    assert v.passed and v.trials == 30 and v.max_rel_error == 0.0


def test_mutated_identity_fails_with_witness():
    lhs, rhs = _ward_sides(Context(1))
    v = check_identity(lhs, rhs.scale(Fraction(-1)), trials=30)
    assert not v.passed and v.trials == 1
    assert set(v.witness) == {"point", "lhs", "rhs"}
    # the witness really separates the two sides
    pt = v.witness["point"]
    assert eval_expr(lhs, pt) != eval_expr(rhs.scale(Fraction(-1)), pt)


def test_syntactic_equality_short_circuits():
    lhs, _ = _ward_sides(Context(1))
    v = check_identity(lhs, lhs, trials=100)
    assert v.passed and v.trials == 1


def test_floating_mode_reports_error():
    lhs, rhs = _ward_sides(Context(1))
    v = check_identity(lhs, rhs, trials=10, exact=False, eps=1e-14)
    assert v.passed and v.max_rel_error < 1e-10


def test_exact_point_is_rational():
    pt = random_point(Context(2, frozenset({2})), seed=3)
    assert all(isinstance(c, Fraction) for v in pt.vectors.values() for c in v)
    k1, k2 = pt.vectors["k1"], pt.vectors["k2"]
    assert k2[0] ** 2 - k2[1] ** 2 - k2[2] ** 2 - k2[3] ** 2 == 0
    assert k1[0] ** 2 - k1[1] ** 2 - k1[2] ** 2 - k1[3] ** 2 != 0


def test_gaussian_rationals():
    a, b = GQ(1, 2), GQ(Fraction(1, 3), -1)
    assert (a * b) / b == a
    assert complex(a * b) == pytest.approx(complex(1, 2) * complex(1 / 3, -1))
    with pytest.raises(ZeroDivisionError):
        a / GQ(0)


def test_scalar_value_of_dot():
    ctx = Context(1)
    pt = random_point(ctx, seed=1)
    e = Expr.scalar(ctx, dot(vec("p"), vec("k1")))
    p, k = pt.vectors["p"], pt.vectors["k1"]
    want = p[0] * k[0] - p[1] * k[1] - p[2] * k[2] - p[3] * k[3]
    assert eval_expr(e, pt) == GQ(want)


# ---- quadrature

def _quad_complex(f):
    re = quad(lambda x: f(x).real, 0, 1, limit=500, epsrel=1e-12)[0]
    im = quad(lambda x: f(x).imag, 0, 1, limit=500, epsrel=1e-12)[0]
    return re + 1j * im


@pytest.mark.parametrize("seed", range(4))
def test_closed_forms_against_scipy(seed):
    rng = random.Random(seed)
    a, b, c = (complex(rng.uniform(-3, 3), rng.uniform(-0.5, 0.5)) for _ in range(3))
    c += 0.05j
    cases = [
        (inverse_integral, lambda l: 1 / (a * l * l + b * l + c)),
        (inverse_square_integral, lambda l: 1 / (a * l * l + b * l + c) ** 2),
        (lambda_inverse_square_integral, lambda l: l / (a * l * l + b * l + c) ** 2),
    ]
    for closed, f in cases:
        assert rel_error(closed(a, b, c), _quad_complex(f)) < 1e-8


def test_radial_profile_of_power():
    n, samples = radial_profile(lambda r: 3 * r ** 2, 1, None)
    assert n == 2 and len(samples) == 13


def test_radial_profile_rejects_non_power():
    with pytest.raises(QuadratureError):
        radial_profile(lambda r: r ** 2 + 1e-5, 1, None)
    with pytest.raises(QuadratureError):
        radial_profile(lambda r: 0.0, 1, None)


def test_rel_error_handles_scalar_against_matrix():
    assert rel_error(2.0, 2.0 * np.eye(4)) == 0.0
    assert rel_error(np.ones((4, 4)), np.ones(16)) == 0.0


# ---- loop current

def _vertex_form(V, k):
    # telescoped sum over corners: -i sum_v e^{ik.x_v} (w_in/(k.w_in) - w_out/(k.w_out))
    out = 0
    for i in range(len(V)):
        win, wout = V[i] - V[i - 1], V[(i + 1) % len(V)] - V[i]
        out = out + -1j * np.exp(1j * mdot(k, V[i])) * (win / mdot(k, win) - wout / mdot(k, wout))
    return out


@given(st.integers(0, 2 ** 32 - 1))
def test_current_conserved(seed):
    rng = np.random.default_rng(seed)
    L = LoopPolygon(rng.normal(size=(rng.integers(2, 7), 4)) * rng.uniform(0.1, 10))
    k = rng.normal(size=4) * rng.uniform(0.01, 10)
    J = loop_current(L, k)
    # measured against the size of the cancelling segment terms, since J
    # itself can be pure rounding noise for a there-and-back polygon
    size = sum(np.max(np.abs(w)) for _, w in L.segments())
    assert abs(mdot(k, J)) <= 1e-12 * np.max(np.abs(k)) * size


def test_current_matches_corner_sum():
    rng = np.random.default_rng(7)
    V = rng.normal(size=(4, 4)) * 2
    for _ in range(10):
        k = rng.normal(size=4) * 3
        assert rel_error(loop_current(LoopPolygon(V), k), _vertex_form(V, k)) < 1e-10


def test_degenerate_loops_have_no_current():
    k = np.array([1.3, -0.2, 0.7, 2.0])
    point = LoopPolygon([[1, 2, 3, 4]] * 3)
    assert np.all(loop_current(point, k) == 0)
    there_and_back = LoopPolygon([[0, 0, 0, 0], [2.0, 1.0, 0.5, -1.0]])
    assert np.max(np.abs(loop_current(there_and_back, k))) < 1e-15
    assert np.all(LoopPolygon([[0, 0, 0, 0], [1, 1, 0, 0], [3, 0, 1, 1]]).closure() == 0)


def test_orthogonal_momentum_gives_plane_wave_segment():
    a, w = np.array([0.3, 1.0, -2.0, 0.5]), np.array([2.0, 1.0, 0.0, 0.0])
    c = np.array([1.0, 0.0, 1.5, -1.0])
    k = np.array([1.0, 2.0, 0.0, 4.0])   # k.w = 0 on the first segment only
    assert mdot(k, w) == 0
    J = loop_current(LoopPolygon([a, a + w, c]), k)
    rest = 0
    for x, y in ((a + w, c), (c, a)):
        kw = mdot(k, y - x)
        rest = rest + (np.exp(1j * mdot(k, y)) - np.exp(1j * mdot(k, x))) / (1j * kw) * (y - x)
    assert rel_error(J, np.exp(1j * mdot(k, a)) * w + rest) < 1e-14


def test_segment_factor_series_near_zero():
    x = np.array([1e-8 * (1 - 1e-6), 1e-8 * (1 + 1e-6), 1e-12, 0.0])
    f = _segment_factor(x)
    assert np.max(np.abs(f - (1 + 0.5j * x - x * x / 6))) < 1e-15
    assert f[-1] == 1


def _cone(n):
    rng = np.random.default_rng(n)
    d = rng.normal(size=(n, 3))
    d /= np.linalg.norm(d, axis=1)[:, None]
    return np.hstack([np.ones((n, 1)), d])


def test_pairing_conjugate_symmetric():
    L1 = LoopPolygon([[0, 0, 0, 0], [2, 1, 0, 0], [3, 0, 1, 0.5]])
    L2 = LoopPolygon([[0, 0, 0, 0], [1, 0, 0.3, 0], [4, 0.5, 0, 1]])
    a = lambda ks: loop_current(L1, ks)
    b = lambda ks: loop_current(L2, ks)
    kw = dict(n_radial=24, n_theta=12, n_phi=16)
    ab = regulated_pairing(a, b, 0.5, 4, **kw)
    ba = regulated_pairing(b, a, 0.5, 4, **kw)
    assert abs(ab - np.conj(ba)) <= 1e-12 * abs(ab)
    assert regulated_pairing(a, lambda ks: np.zeros_like(ks), 0.5, 4, **kw) == 0


def test_self_pairing_positive():
    L = LoopPolygon([[0, 0, 0, 0], [3, 1, 0.5, 0], [5, 0.2, -0.4, 0.3]])
    v = current_pairing(L, 1.0, 8.0, n_radial=32, n_theta=16, n_phi=24)
    assert v.real > 0 and abs(v.imag) < 1e-12 * v.real


def test_pairing_refuses_zero_cutoff():
    L = LoopPolygon([[0, 0, 0, 0], [3, 1, 0.5, 0], [5, 0.2, -0.4, 0.3]])
    with pytest.raises(QuadratureError):
        current_pairing(L, 0.0, 4.0)
    with pytest.raises(ValueError):
        current_pairing(L, 2.0, 1.0)


def _corner_coefficient(V, i):
    def f(ph, th):
        n = np.array([1, math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)])
        win, wout = V[i] - V[i - 1], V[(i + 1) % len(V)] - V[i]
        c = win / mdot(n, win) - wout / mdot(n, wout)
        return -mdot(c, c) * math.sin(th)

    return dblquad(f, 0, math.pi, 0, 2 * math.pi, epsabs=1e-11, epsrel=1e-10)[0] / (
        2 * (2 * math.pi) ** 3)


def test_log_slope_matches_corner_radiation():
    # above the inverse loop size each corner radiates independently,
    # so the slope tends to the sum of per-corner angular integrals
    V = np.array([[0, 0, 0, 0], [3, 1, 0.5, 0], [5, 0.2, -0.4, 0.3]], float)
    want = sum(_corner_coefficient(V, i) for i in range(3))
    slope, vals = log_slope_scan(LoopPolygon(V), [16.0, 8.0, 4.0], 128.0,
                                 n_radial=96, n_theta=64, n_phi=96)
    assert vals[0] < vals[1] < vals[2]
    assert abs(slope - want) < 0.05 * want


def test_closed_loop_finite_far_below_inverse_size():
    L = LoopPolygon([[0, 0, 0, 0], [3, 1, 0.5, 0], [5, 0.2, -0.4, 0.3]])
    kw = dict(n_radial=64, n_theta=24, n_phi=32)
    a = current_pairing(L, 1e-3, 1.0, **kw).real
    b = current_pairing(L, 1e-4, 1.0, **kw).real
    assert 0 < b - a < 1e-6 * a


def test_pairing_gauge_invariant_against_conserved_current():
    L = LoopPolygon([[0, 0, 0, 0], [3, 1, 0.5, 0], [5, 0.2, -0.4, 0.3]])
    J = lambda ks: loop_current(L, ks)
    a = lambda ks: np.cos(ks[..., :1]) * np.array([0.2, 1.0, -0.5, 0.3]) + 0j
    alpha = 0.7 - 1.3j
    shifted = lambda ks: a(ks) + alpha * ks
    kw = dict(n_radial=24, n_theta=12, n_phi=16)
    base = regulated_pairing(a, J, 0.5, 4, **kw)
    assert abs(regulated_pairing(shifted, J, 0.5, 4, **kw) - base) < 1e-12 * abs(base)
