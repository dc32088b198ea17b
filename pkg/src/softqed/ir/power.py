"""Radial power counting for pole terms of insertion graphs.

A pole-term shape picks one cut (pole) segment per side, counted over the Q
vertices of that side: cut c on a side with Q vertices 0..L-1 sits between
vertex c-1 and vertex c.  The cut splits the side into two half-lines, each
read from the cut towards its hard vertex.

Two independent routes give the degree in each radial variable r_t:

* ``power_count`` walks each half-line, contracting segments that carry a
  photon dominant for r_t, and tallies numerators, surviving segment
  denominators and the k-slash factor next to the pole;
* ``symbolic_degrees`` builds the actual reduced pole terms with the pole
  module, substitutes polar variables and reads off ``degree_in``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from ..errors import ShapeError
from ..expr import (ONE, I, Context, DenominatorFactor, DiracChain, Expr, MomentumVector,
                    Term, comp, dot)
from ..expr.calculus import expr_degree_in, substitute_polar
from ..expr.scalars import radial
from ..expr.terms import RadialMarker
from .graph import SIDES, InsertionGraph
from .sectors import Sector

MODES = ("Q", "gamma")


@dataclass(frozen=True)
class PoleShape:
    """Cut index per side over Q vertices; Q mode carries the k-slash factors."""

    cuts: tuple
    mode: str = "Q"

    def label(self):
        return "".join(str(c) for c in self.cuts)


def pole_shapes(g: InsertionGraph, mode="Q"):
    """Every choice of pole segment per side, in lexicographic order."""
    import itertools

    counts = g.q_counts()
    return [PoleShape(c, mode) for c in itertools.product(*(range(L + 1) for L in counts))]


def _check_shape(g, shape):
    if shape.mode not in MODES:
        raise ShapeError(f"unknown coupling mode {shape.mode}")
    for s, c, L in zip(SIDES, shape.cuts, g.q_counts()):
        if not 0 <= c <= L:
            raise ShapeError(f"cut {c} outside 0..{L} on side {s}", side=s)


# ---------------------------------------------------------------- combinatorial route

@dataclass
class HalfLine:
    side: int
    part: str          # 'L' towards v_s, 'R' towards v_{s+1}
    vertices: tuple    # (rank, sign) from the cut outwards
    classical: tuple   # ranks of C ends attributed here

    @property
    def label(self):
        return f"{self.side}{self.part}"

    def ranks(self):
        return [r for r, _ in self.vertices] + list(self.classical)


@dataclass
class HalfLineCount:
    degree: int
    numerators: int
    segments: int
    e_factor: int
    groups: list
    classical: int = 0


def half_lines(g: InsertionGraph, shape: PoleShape, sector: Sector):
    ranks = sector.ranks()
    out = []
    for s, c in zip(SIDES, shape.cuts):
        ends = g.side_ends(s)
        qs = [(ranks[e.photon], e.sign) for e in ends if e.coupling == "Q"]
        left_c, right_c = [], []
        seen_q = 0
        for e in ends:
            if e.coupling == "Q":
                seen_q += 1
            else:
                (left_c if seen_q < c else right_c).append(ranks[e.photon])
        out.append(HalfLine(s, "L", tuple(reversed(qs[:c])), tuple(left_c)))
        out.append(HalfLine(s, "R", tuple(qs[c:]), tuple(right_c)))
    return out


@lru_cache(maxsize=None)
def _count_half_line(vertices, classical, t, mode):
    """Degree in r_t of one half-line (vertices listed from the cut outwards)."""
    open_dom = set()
    contracted = []
    for rank, _ in vertices:
        if rank < t:
            open_dom ^= {rank}
        contracted.append(bool(open_dom))
    # group vertices joined by contracted segments; the last segment ends at the hard vertex
    groups, cur = [], []
    for u, (rank, _) in enumerate(vertices):
        cur.append(rank)
        if not contracted[u]:
            groups.append(("vertex" if len(cur) == 1 else "contraction", tuple(cur)))
            cur = []
    if cur:
        groups.append(("hard", tuple(cur)))
    numerators = sum(1 for rank, _ in vertices if rank >= t)
    segments = sum(1 for x in contracted if not x)
    e_factor = int(mode == "Q" and bool(vertices) and vertices[0][0] >= t)
    # a classical end brings (r_1..r_j) and 1/(p.k_j): net zero
    cl = sum(1 for r in classical if r >= t)
    deg = numerators - segments + e_factor + cl - cl
    return HalfLineCount(deg, numerators, segments, e_factor, groups, cl)


@dataclass
class PowerCountReport:
    graph: tuple
    shape: PoleShape
    sector: Sector
    half_lines: dict            # (t, label) -> degree
    totals: dict                # t -> total degree including dr_t
    photon_of_rank: dict
    verdict: str = None
    assume_distortion: bool = False
    flags: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def exponents(self):
        """e_t in r_t^{e_t} dr_t."""
        return {t: d - 1 for t, d in self.totals.items()}

    def min_degree(self):
        return min(self.totals.values()) if self.totals else None

    def degrees_key(self):
        return (tuple(sorted(self.totals.items())), tuple(sorted(self.half_lines.items())))


def verdict_for(totals):
    """'convergent' when every degree is >= 2, 'marginal' when the smallest is 1
    (r^0 dr still integrates), 'divergent' otherwise."""
    low = min(totals.values(), default=2)
    if low >= 2:
        return "convergent"
    return "marginal" if low == 1 else "divergent"


def power_count(g: InsertionGraph, shape: PoleShape, sector: Sector,
                assume_distortion=False) -> PowerCountReport:
    """Half-line contraction count for every radial variable of the sector.

    Degrees are always computed; the convergent/divergent verdict needs the
    contour-distortion assumption and is left as None without it.
    """
    _check_shape(g, shape)
    if sector.n != g.n:
        raise ShapeError("sector and graph disagree on the photon count")
    hls = half_lines(g, shape, sector)
    per, totals, flags = {}, {}, []
    for h in hls:
        rk = h.ranks()
        for r in set(rk):
            if rk.count(r) == 2:
                flags.append(f"both-ends-on-half-line:{h.label}:r{r}")
    for t in range(1, g.n + 1):
        tot = 0
        for h in hls:
            cnt = _count_half_line(h.vertices, h.classical, t, shape.mode)
            per[(t, h.label)] = cnt.degree
            tot += cnt.degree
            incident = t in [r for r, _ in h.vertices]
            if shape.mode == "Q" and cnt.degree < (1 if incident else 0):
                flags.append(f"half-line-claim:{h.label}:r{t}:{cnt.degree}")
        totals[t] = tot
    rep = PowerCountReport(g.key(), shape, sector, per, totals,
                           {i + 1: j for i, j in enumerate(sector.perm)},
                           assume_distortion=assume_distortion, flags=sorted(set(flags)))
    if assume_distortion:
        rep.verdict = verdict_for(totals)
    else:
        rep.notes.append("verdict withheld: contour-distortion assumption not set")
    return rep


def half_line_detail(g, shape, sector, t):
    """Vertex typing and tallies per half-line for r_t (for reports)."""
    out = {}
    for h in half_lines(g, shape, sector):
        c = _count_half_line(h.vertices, h.classical, t, shape.mode)
        out[h.label] = {"degree": c.degree, "numerators": c.numerators,
                        "segments": c.segments, "e_factor": c.e_factor,
                        "classical": c.classical,
                        "groups": [[kind, list(rs)] for kind, rs in c.groups]}
    return out


# ---------------------------------------------------------------- symbolic route

def _side_base(s):
    return MomentumVector({"p": 1, f"q{s}": 1})


def _single_factors(e: Expr):
    """Split a one-term Expr into coefficient, chain elements and denominators."""
    if len(e.terms) != 1:
        raise ShapeError("expected a single-term factor", terms=len(e.terms))
    (t,) = e.terms
    out = [Expr(e.ctx, [Term(t.coeff, DiracChain(), ())])]
    out += [Expr(e.ctx, [Term(ONE, DiracChain((el,)), ())]) for el in t.chain.elements]
    out += [Expr(e.ctx, [Term(ONE, DiracChain(), (d,))]) for d in t.dens]
    return out


def side_pole_term(n, s, seq, classical, c, mode="Q"):
    """Reduced pole term of one side and its separate vertex factors.

    ``seq`` lists (rank, sign) of the Q vertices, ``classical`` the ranks of the
    C ends; photon labels are ranks, so the polar ordering is the identity.
    Returns (pole term without quantum factors, list of quantum vertex factors,
    list of classical factors i p_mu/(p.k)).
    """
    from ..insertion import Insertion, build_generalized_propagator
    from ..poles import attach_q_factors, pole_decompose, q_vertex, reduce_residue

    ctx = Context(n)
    ins = [Insertion(r, "gamma", f"s{s}v{u}", sg) for u, (r, sg) in enumerate(seq)]
    P = build_generalized_propagator(ctx, _side_base(s), ins, side=s, allow_repeat=True)
    pt = pole_decompose(P)[c]
    qs = []
    if mode == "Q":
        qs = [q_vertex(ctx, pt.momentum, x.photon, x.idx(), "m" + x.idx()) for x in ins]
        pt = attach_q_factors(pt, P, free=lambda x: "m" + x.idx())
        pt = reduce_residue(pt, P, keep_dropped=False)
    cs = []
    for u, r in enumerate(classical):
        k = MomentumVector({f"k{r}": 1})
        cs.append(Expr(ctx, [Term(I * comp(pt.momentum, f"c{s}{u}"), DiracChain(),
                                  (DenominatorFactor(dot(pt.momentum, k), ("e", r, 1)),))]))
    return pt, qs, cs


def _factor_list(pt, qs, cs):
    out = []
    for x in [pt.left, pt.pole, pt.right] + qs + cs:
        out += _single_factors(x)
    return out


_FACTOR_CACHE = {}


def _factor_degrees(n, f: Expr):
    key = (n, f.terms)
    hit = _FACTOR_CACHE.get(key)
    if hit is None:
        fp = substitute_polar(f)
        hit = tuple(expr_degree_in(fp, t) for t in range(1, n + 1))
        _FACTOR_CACHE[key] = hit
    return hit


@lru_cache(maxsize=None)
def _side_degrees(n, s, seq, classical, c, mode):
    pt, qs, cs = side_pole_term(n, s, seq, classical, c, mode)
    degs = [0] * n
    for f in _factor_list(pt, qs, cs):
        for t, d in enumerate(_factor_degrees(n, f)):
            degs[t] += d
    return tuple(degs)


def measure(n) -> Expr:
    """prod_j |k_j| d|k_j| in sector variables, with the Jacobian and dr markers."""
    ctx = Context(n)
    coeff = ONE
    for j in range(1, n + 1):
        for s in range(1, j + 1):
            coeff = coeff * radial(s)
        for s in range(1, j):
            coeff = coeff * radial(s)
    markers = frozenset(RadialMarker(t) for t in range(1, n + 1))
    return Expr(ctx, [Term(coeff, DiracChain(), (), markers)])


def _side_inputs(g, shape, sector, s):
    ranks = sector.ranks()
    seq = tuple((ranks[j], sg) for j, sg in g.q_sequence(s))
    classical = tuple(ranks[j] for j in g.c_ends(s))
    return seq, classical, shape.cuts[s - 1]


def symbolic_degrees(g: InsertionGraph, shape: PoleShape, sector: Sector):
    """Total degree per r_t from degree_in on the assembled pole-term factors.

    The lowest radial degree of a product is the sum over its factors, so each
    factor of the single-term product is substituted and measured separately.
    """
    _check_shape(g, shape)
    n = g.n
    tot = [expr_degree_in(measure(n), t) for t in range(1, n + 1)] if n else []
    per_side = {}
    for s in SIDES:
        seq, classical, c = _side_inputs(g, shape, sector, s)
        d = _side_degrees(n, s, seq, classical, c, shape.mode)
        per_side[s] = d
        tot = [a + b for a, b in zip(tot, d)]
    return {t + 1: d for t, d in enumerate(tot)}, per_side


def assemble_term(g: InsertionGraph, shape: PoleShape, sector: Sector) -> Expr:
    """Full product of the three side pole terms times the measure, in polar form."""
    n = g.n
    out = measure(n) if n else Expr.scalar(Context(0), ONE)
    for s in SIDES:
        seq, classical, c = _side_inputs(g, shape, sector, s)
        pt, _, cs = side_pole_term(n, s, seq, classical, c, shape.mode)
        e = pt.expr()
        for f in cs:
            e = f * e
        out = out * e
    return substitute_polar(out)


def whole_term_degrees(g, shape, sector):
    e = assemble_term(g, shape, sector)
    return {t: expr_degree_in(e, t) for t in range(1, g.n + 1)}
