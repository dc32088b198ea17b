"""Acceptance criteria, each timed against its budget and logged as PASS/FAIL.

Two literal criteria do not hold for graphs with classical ends; they are kept
as strict xfails so the failure stays visible, next to passing tests of what
does hold (integrability, degree at least one, exact cancellation of C ends).
"""
import cmath
import itertools
import random
import time

import numpy as np
import pytest

from softqed.expr import Context, canonicalize, contract_index, vec
from softqed.identities import (fixed_classical_ward, inserted_ward, pole_reconstruction,
                                propagator_from_sequence, two_propagator_ward)
from softqed.insertion import (InsertionOperator, apply_Q_hat, apply_Q_tilde,
                               build_generalized_propagator, kvec)
from softqed.ir import (PoleShape, classify_singularity, corpus, is_valid, make_graph,
                        pole_shapes, power_count, random_graph, sectors, symbolic_degrees)
from softqed.ir.power import _side_degrees, _side_inputs
from softqed.oracle import (LoopPolygon, eval_expr, lambda_quadrature, log_slope_scan,
                            loop_current, random_point, rel_error)
from softqed.oracle.current import mdot
from softqed.oracle.quadrature import regular_point
from softqed.poles import (pole_terms_q, single_q_mero_closed, single_q_mero_from_poles,
                           split_single_Q, symbolic_equal)

p = vec("p")
SINGLE = make_graph([(1, (1, 0, "Q"), (2, 0, "Q"))])


def mink(a, b):
    return a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]


def has_c(g):
    return any(e.coupling == "C" for ph in g.photons for e in (ph.a, ph.b))


def full_corpus():
    return [g for n in range(4) for g in corpus(n)]


# ---------------------------------------------------------------- 1 Ward suite

def test_ward_suite(criterion):
    t0 = time.perf_counter()
    verdicts = [two_propagator_ward(trials=100)]
    for seq in ([], [(1, 1)], [(1, 1), (2, -1)]):
        P = propagator_from_sequence(seq)
        verdicts += [inserted_ward(P, trials=100), fixed_classical_ward(P, trials=100)]
    exact = all(v.passed and v.trials >= 100 or v.trials == 1 for v in verdicts)
    gauge = []
    for seq in ([(1, 1)], [(1, 1), (2, 1)], [(2, 1), (1, -1), (3, 1)]):
        P = propagator_from_sequence(seq)
        j = P.ctx.n
        for ins in P.insertions:
            qt = apply_Q_tilde(InsertionOperator("Qt", j, "wmu"), P, ins.idx())
            gauge.append(canonicalize(contract_index(qt, "wmu", kvec(j))).is_zero())
    dt = time.perf_counter() - t0
    ok = all(verdicts) and exact and all(gauge) and dt < 10
    criterion("1 Ward suite", ok, dt, f"{len(verdicts)} identities, {len(gauge)} gauge zeros")
    assert ok


# ---------------------------------------------------------------- 2 decomposition

def _dropped_bounded(n):
    P = build_generalized_propagator(Context(n), p, list(range(1, n + 1)))
    for t in pole_terms_q(P):
        pt = random_point(P.ctx, random.Random(t.i), indices=[f"mu{j}" for j in range(1, n + 1)],
                          exact=False, eps=1e-14)
        pi = [sum(c) for c in zip(*[pt.vectors[s] for s in
                                    ["p"] + [f"k{j}" for j in range(1, t.i + 1)]])]
        vals = []
        for dist in (1e-2, 1e-3, 1e-4, 1e-5, 1e-6):
            q = pt.with_(m=cmath.sqrt(mink(pi, pi) - dist))
            vals.append(float(np.max(np.abs(eval_expr(t.dropped, q)))))
        if not (np.all(np.isfinite(vals)) and vals[-1] <= 10 * vals[0] + 1e-12):
            return False
    return True


def test_decomposition_suite(criterion):
    t0 = time.perf_counter()
    fails = []
    for n in range(4):
        for perm in itertools.permutations(range(1, n + 1)):
            P = build_generalized_propagator(Context(n), p, list(perm))
            if not pole_reconstruction(P, trials=100):
                fails.append(perm)
    rng = random.Random(2024)
    for _ in range(50):
        seq = [(j, rng.choice((1, -1))) for j in rng.sample(range(1, 5), 4)]
        P = propagator_from_sequence(seq, extra=0)
        if not pole_reconstruction(P, trials=100, seed=rng.randrange(2 ** 32)):
            fails.append(seq)
    dropped = all(_dropped_bounded(n) for n in (1, 2, 3))
    dt = time.perf_counter() - t0
    ok = not fails and dropped and dt < 120
    criterion("2 Decomposition suite", ok, dt, f"reconstruction failures {len(fails)}, "
              f"dropped pile bounded {dropped}")
    assert ok


# ---------------------------------------------------------------- 3 single-photon split

def test_single_photon_split(criterion):
    t0 = time.perf_counter()
    ctx = Context(1)
    golden = symbolic_equal(single_q_mero_from_poles(ctx), single_q_mero_closed(ctx))
    P0 = build_generalized_propagator(ctx, p, [])
    Q = apply_Q_hat(InsertionOperator("Q", 1, "mu"), P0)
    sp = split_single_Q(P0)
    rng = random.Random(11)
    worst = 0.0
    for _ in range(20):
        while True:
            pt = regular_point(Q + sp.mero + sp.residual, rng, indices=["mu"])
            P, K = pt.vectors["p"], pt.vectors["k1"]
            if ((2 * mink(P, K)) ** 2 - 4 * mink(K, K) * (mink(P, P) - pt.m ** 2)).real > 0:
                break
        worst = max(worst, rel_error(lambda_quadrature(Q, pt), lambda_quadrature(sp.total(), pt)))
    pt = random_point(ctx, random.Random(1), indices=["mu"], exact=False, eps=0.0)
    P, K = pt.vectors["p"], pt.vectors["k1"]
    pk, kk, pp = mink(P, K), mink(K, K), mink(P, P)
    peaks = []
    for r in (1e-2, 1e-4, 1e-6):
        vals = []
        for th in np.linspace(0, 2 * np.pi, 16, endpoint=False):
            t = ((2 * pk) ** 2 - r * cmath.exp(1j * th)) / (4 * kk)
            vals.append(np.max(np.abs(eval_expr(sp.nonmero, pt.with_(m=cmath.sqrt(pp - t))))))
        peaks.append(max(vals))
    bounded = peaks[-1] < 10 * peaks[0]
    dt = time.perf_counter() - t0
    ok = golden and worst < 1e-8 and bounded and dt < 60
    criterion("3 Single-photon split", ok, dt, f"golden {golden}, max rel {worst:.1e}, "
              f"nonmero bounded {bounded}")
    assert ok


# ---------------------------------------------------------------- 4 infrared theorem

@pytest.fixture(scope="module")
def ir_scan():
    t0 = time.perf_counter()
    rng = random.Random(4)
    graphs = full_corpus() + [random_graph(4, rng) for _ in range(100)]
    lows = []
    for g in graphs:
        if g.n == 0:
            continue
        low = min(min(power_count(g, sh, sec, assume_distortion=True).totals.values())
                  for sec in sectors(g.n) for sh in pole_shapes(g))
        lows.append((g, low))
    gamma = max(max(power_count(SINGLE, sh, sec, assume_distortion=True).totals.values())
                for sec in sectors(1) for sh in pole_shapes(SINGLE, mode="gamma"))
    return lows, gamma, time.perf_counter() - t0


@pytest.mark.xfail(strict=True, reason="graphs with a classical end reach degree 1, not 2")
def test_ir_theorem_literal(criterion, ir_scan):
    lows, gamma, dt = ir_scan
    below = [g for g, low in lows if low < 2]
    ok = not below and gamma <= 1 and dt < 600
    criterion("4 Infrared theorem (degree >= 2 for every graph)", ok, dt,
              f"{len(below)} of {len(lows)} graphs below 2, all with a C end: "
              f"{all(has_c(g) for g in below)}; gamma control max degree {gamma}")
    assert ok


def test_ir_theorem_degree_bounds(criterion, ir_scan):
    lows, gamma, dt = ir_scan
    q_only = [low for g, low in lows if not has_c(g)]
    with_c = [low for g, low in lows if has_c(g)]
    ok = min(q_only) >= 2 and min(with_c) >= 1 and gamma <= 1 and dt < 600
    criterion("4' Infrared theorem (Q-only >= 2, with C ends >= 1, gamma control <= 1)", ok, dt,
              f"Q-only min {min(q_only)} over {len(q_only)}, with C min {min(with_c)} over "
              f"{len(with_c)}, gamma {gamma}")
    assert ok


# ---------------------------------------------------------------- 5 classical neutrality

def _merged_shape(g, j, which, sh):
    # removing a Q vertex merges the two pole segments beside it
    end = getattr(next(ph for ph in g.photons if ph.j == j), which)
    qs = [e.pos for e in g.side_ends(end.side) if e.coupling == "Q"]
    i = qs.index(end.pos)
    cuts = list(sh.cuts)
    if cuts[end.side - 1] > i:
        cuts[end.side - 1] -= 1
    return PoleShape(tuple(cuts))


@pytest.fixture(scope="module")
def flip_scan():
    t0 = time.perf_counter()
    compared = changed = 0
    low_after = 99
    for g in full_corpus():
        for ph in g.photons:
            for which in "ab":
                if getattr(ph, which).coupling != "Q":
                    continue
                h = g.flip(ph.j, which)
                if not is_valid(h):
                    continue
                for sec in sectors(g.n):
                    for sh in pole_shapes(g):
                        a = power_count(g, sh, sec).totals
                        b = power_count(h, _merged_shape(g, ph.j, which, sh), sec).totals
                        compared += 1
                        changed += a != b
                        low_after = min(low_after, min(b.values()))
    return compared, changed, low_after, time.perf_counter() - t0


@pytest.mark.xfail(strict=True, reason="a Q end carries degree one, a C end carries zero")
def test_classical_neutrality_literal(criterion, flip_scan):
    compared, changed, _, dt = flip_scan
    ok = changed == 0 and dt < 300
    criterion("5 Classical neutrality (Q->C flip leaves degrees unchanged)", ok, dt,
              f"{changed} of {compared} sector/shape comparisons change")
    assert ok


def test_classical_neutrality_exact_cancellation(criterion, flip_scan):
    compared, _, low_after, dt0 = flip_scan
    t0 = time.perf_counter()
    mismatches = 0
    for g in full_corpus():
        if not has_c(g):
            continue
        for sec in sectors(g.n):
            for sh in pole_shapes(g):
                for s in (1, 2, 3):
                    seq, classical, c = _side_inputs(g, sh, sec, s)
                    if not classical:
                        continue
                    with_c = _side_degrees(g.n, s, seq, classical, c, "Q")
                    without = _side_degrees(g.n, s, seq, (), c, "Q")
                    for t in range(1, g.n + 1):
                        # each C end costs one power per rank it dominates, the
                        # same share of the measure it brings: net zero
                        mismatches += with_c[t - 1] - without[t - 1] != -sum(
                            1 for r in classical if r >= t)
    dt = dt0 + time.perf_counter() - t0
    ok = mismatches == 0 and low_after >= 1 and dt < 300
    criterion("5' Classical neutrality (C ends cancel exactly, degree >= 1 after any flip)", ok,
              dt, f"cancellation mismatches {mismatches}, min degree after flip {low_after} "
              f"over {compared} comparisons")
    assert ok


# ---------------------------------------------------------------- 6 classifier

def test_classifier_table(criterion):
    crossed = make_graph([(1, (1, 0, "Q"), (3, 0, "Q")), (2, (2, 0, "Q"), (3, 1, "Q"))])
    t0 = time.perf_counter()
    rows = [
        (classify_singularity("mero-separable-pole-aligned", SINGLE), "log phi"),
        (classify_singularity("mero-shifted", SINGLE), "phi^2 log phi"),
        (classify_singularity("one-end-nonmero", SINGLE), "phi log phi"),
        (classify_singularity("both-ends-nonmero", SINGLE), "phi^2 (log phi)^2"),
        (classify_singularity("general-nonmero", crossed), "phi (log phi)^(n+1)"),
        (classify_singularity("mero-nonseparable", crossed), "phi (log phi)^m"),
    ]
    dt = time.perf_counter() - t0
    good = all(f.cls == want and f.anchor.startswith("anchor:") for f, want in rows)
    good &= rows[4][0].log_power == crossed.n + 1 and rows[5][0].log_bound == crossed.n
    ok = good and dt < 1
    criterion("6 Classifier table", ok, dt, f"{len(rows)} rows with anchors")
    assert ok


# ---------------------------------------------------------------- 7 loop current

def test_loop_current(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        L = LoopPolygon(rng.normal(size=(3, 4)) * rng.uniform(0.1, 5))
        k = rng.normal(size=4) * rng.uniform(0.1, 5)
        J = loop_current(L, k)
        worst = max(worst, abs(mdot(k, J)) / (np.max(np.abs(k)) * np.max(np.abs(J))))
    k = np.array([1.3, -0.2, 0.7, 2.0])
    degenerate = np.all(loop_current(LoopPolygon([[1, 2, 3, 4]] * 3), k) == 0)
    a, w, c = np.array([0.3, 1.0, -2.0, 0.5]), np.array([2.0, 1.0, 0.0, 0.0]), np.zeros(4)
    kq = np.array([1.0, 2.0, 0.0, 4.0])
    L = LoopPolygon([a, a + w, c])
    rest = sum((np.exp(1j * mdot(kq, y)) - np.exp(1j * mdot(kq, x))) / (1j * mdot(kq, y - x))
               * (y - x) for x, y in ((a + w, c), (c, a)))
    plane = mdot(kq, w) == 0 and rel_error(loop_current(L, kq),
                                           np.exp(1j * mdot(kq, a)) * w + rest) < 1e-14
    tri = LoopPolygon([[0, 0, 0, 0], [3, 1, 0.5, 0], [5, 0.2, -0.4, 0.3]])
    slope, _ = log_slope_scan(tri, [4.0, 2.0, 1.0], 32.0, n_radial=96, n_theta=32, n_phi=48)
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and degenerate and plane and slope > 0 and dt < 10
    criterion("7 Loop current", ok, dt, f"max rel k.J {worst:.1e}, log slope {slope:.4f}")
    assert ok


# ---------------------------------------------------------------- 8 cross-oracle

def test_cross_oracle_degrees(criterion):
    t0 = time.perf_counter()
    compared = mismatched = 0
    for g in full_corpus():
        for sec in sectors(g.n):
            for sh in pole_shapes(g):
                compared += 1
                mismatched += symbolic_degrees(g, sh, sec)[0] != power_count(g, sh, sec).totals
    dt = time.perf_counter() - t0
    ok = mismatched == 0 and dt < 300
    criterion("8 Cross-oracle degree agreement", ok, dt,
              f"{mismatched} mismatches over {compared} graph/sector/shape triples")
    assert ok
