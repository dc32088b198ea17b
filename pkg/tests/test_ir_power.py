import random

import pytest
from hypothesis import given, strategies as st

from softqed.errors import ShapeError
from softqed.expr.terms import expr_indices
from softqed.ir import (PoleShape, Sector, corpus, half_line_detail, make_graph, pole_shapes,
                        power_count, random_graph, sectors, symbolic_degrees, verdict_for,
                        whole_term_degrees)
from softqed.ir.power import _side_degrees, _side_inputs, assemble_term
from softqed.oracle import radial_profile, random_point

SINGLE = make_graph([(1, (1, 0, "Q"), (2, 0, "Q"))])
SINGLE_QC = make_graph([(1, (1, 0, "Q"), (2, 0, "C"))])
S1 = Sector((1,))

_SMALL = corpus(1) + corpus(2)


def test_single_every_shape_degree_two():
    shapes = pole_shapes(SINGLE)
    assert len(shapes) == 4
    for sh in shapes:
        r = power_count(SINGLE, sh, S1, assume_distortion=True)
        assert r.totals == {1: 2} and r.verdict == "convergent" and not r.flags
        assert symbolic_degrees(SINGLE, sh, S1)[0] == {1: 2}
        assert whole_term_degrees(SINGLE, sh, S1) == {1: 2}


def test_single_gamma_control_diverges():
    for sh in pole_shapes(SINGLE, mode="gamma"):
        r = power_count(SINGLE, sh, S1, assume_distortion=True)
        assert r.totals == {1: 0} and r.verdict == "divergent"
        assert symbolic_degrees(SINGLE, sh, S1)[0] == {1: 0}


def test_verdict_needs_assumption():
    r = power_count(SINGLE, PoleShape((0, 1, 0)), S1)
    assert r.verdict is None and r.notes


def test_verdict_rule():
    assert verdict_for({1: 2, 2: 3}) == "convergent"
    assert verdict_for({1: 1, 2: 3}) == "marginal"
    assert verdict_for({1: 0}) == "divergent"


@pytest.mark.parametrize("mode,exponent", [("Q", 1), ("gamma", -1)])
def test_numeric_radial_profile(mode, exponent):
    sh = PoleShape((0, 1, 0), mode)
    e = assemble_term(SINGLE, sh, S1)
    pt = random_point(e.ctx, random.Random(2), indices=sorted(expr_indices(e)), radii=[1],
                      exact=False)
    got, _ = radial_profile(e, 1, pt)
    assert got == exponent
    assert got == power_count(SINGLE, sh, S1).totals[1] - 1


def test_numeric_radial_profile_with_classical_end():
    sh = pole_shapes(SINGLE_QC)[0]
    e = assemble_term(SINGLE_QC, sh, S1)
    pt = random_point(e.ctx, random.Random(5), indices=sorted(expr_indices(e)), radii=[1],
                      exact=False)
    assert radial_profile(e, 1, pt)[0] == 0
    assert power_count(SINGLE_QC, sh, S1).totals == {1: 1}


def test_shape_checks():
    with pytest.raises(ShapeError):
        power_count(SINGLE, PoleShape((0, 2, 0)), S1)
    with pytest.raises(ShapeError):
        power_count(SINGLE, PoleShape((0, 1, 0)), Sector((1, 2)))


def test_half_line_detail_tallies():
    d = half_line_detail(SINGLE, PoleShape((0, 1, 0)), S1, 1)
    assert sum(x["degree"] for x in d.values()) == 2
    assert d["1R"]["e_factor"] == 1 and d["1R"]["segments"] == 1


@pytest.mark.parametrize("idx", range(0, len(_SMALL), 7))
def test_classical_end_cancels_exactly(idx):
    # the factor i p_mu/(p.k_j) lowers the side degree in r_t by one for t <= rank(j),
    # which is exactly the measure share (r_1..r_j) assigned to that end
    g = _SMALL[idx]
    for sec in sectors(g.n):
        for sh in pole_shapes(g):
            for s in (1, 2, 3):
                seq, classical, c = _side_inputs(g, sh, sec, s)
                if not classical:
                    continue
                with_c = _side_degrees(g.n, s, seq, classical, c, "Q")
                without = _side_degrees(g.n, s, seq, (), c, "Q")
                for t in range(1, g.n + 1):
                    assert with_c[t - 1] - without[t - 1] == -sum(1 for r in classical if r >= t)


def _all_reports(g, mode="Q"):
    for sec in sectors(g.n):
        for sh in pole_shapes(g, mode):
            yield sec, sh, power_count(g, sh, sec, assume_distortion=True)


@given(st.sampled_from(_SMALL))
def test_two_routes_agree(g):
    for sec, sh, r in _all_reports(g):
        assert symbolic_degrees(g, sh, sec)[0] == r.totals


@given(st.sampled_from(_SMALL))
def test_degree_bounds(g):
    # Q-only graphs: at least 2 in every r_t; with a C end: at least 1 (integrable)
    has_c = any(e.coupling == "C" for ph in g.photons for e in (ph.a, ph.b))
    low = min(min(r.totals.values()) for _, _, r in _all_reports(g))
    assert low >= (1 if has_c else 2)


def test_whole_term_matches_factorwise_n1():
    for g in corpus(1):
        for sh in pole_shapes(g):
            assert whole_term_degrees(g, sh, S1) == symbolic_degrees(g, sh, S1)[0]


def test_whole_term_matches_factorwise_n2():
    # one full product expansion (about half a minute)
    g = make_graph([(1, (1, 0, "Q"), (2, 0, "Q")), (2, (2, 1, "Q"), (3, 0, "Q"))])
    sec, sh = sectors(2)[0], pole_shapes(g)[0]
    assert whole_term_degrees(g, sh, sec) == symbolic_degrees(g, sh, sec)[0] == {1: 3, 2: 2}


def test_per_half_line_claim_holds_for_q_graphs():
    for g in corpus(2, couplings=False):
        for _, _, r in _all_reports(g):
            assert not [f for f in r.flags if f.startswith("half-line-claim")]


@given(st.integers(0, 10 ** 6))
def test_random_n4_spot_check(seed):
    g = random_graph(4, random.Random(seed), couplings=False)
    rng = random.Random(seed)
    sec = rng.choice(sectors(4))
    sh = rng.choice(pole_shapes(g))
    r = power_count(g, sh, sec)
    assert symbolic_degrees(g, sh, sec)[0] == r.totals
    assert min(r.totals.values()) >= 2
