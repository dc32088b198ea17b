"""Insertion graphs: soft photons attached to the three sides of a charged triangle.

Side s runs from hard vertex v_s to v_{s+1} (mod 3).  Each photon end sits at an
integer slot on a side and couples either classically (C) or quantally (Q).
Photon j carries momentum k_j from its end ``a`` (emission) to its end ``b``
(absorption).
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field, replace

from ..errors import GraphError

SIDES = (1, 2, 3)


@dataclass(frozen=True)
class End:
    side: int
    pos: int
    coupling: str = "Q"

    def __str__(self):
        return f"{self.side}:{self.pos}:{self.coupling}"


@dataclass(frozen=True)
class PhotonLine:
    j: int
    a: End
    b: End

    def ends(self):
        return ((self.a, -1), (self.b, 1))


@dataclass(frozen=True)
class SideEnd:
    """One end as seen from its side: slot order, photon, line-momentum sign."""

    pos: int
    photon: int
    sign: int
    coupling: str


@dataclass
class InsertionGraph:
    photons: tuple = ()
    excluded: dict = field(default_factory=dict)

    @property
    def n(self):
        return len(self.photons)

    def photon(self, j) -> PhotonLine:
        for ph in self.photons:
            if ph.j == j:
                return ph
        raise KeyError(j)

    def side_ends(self, s):
        out = []
        for ph in self.photons:
            for end, sign in ph.ends():
                if end.side == s:
                    out.append(SideEnd(end.pos, ph.j, sign, end.coupling))
        return sorted(out, key=lambda e: e.pos)

    def q_sequence(self, s):
        """(photon, sign) of the Q vertices of side s in line order."""
        return tuple((e.photon, e.sign) for e in self.side_ends(s) if e.coupling == "Q")

    def c_ends(self, s):
        return tuple(e.photon for e in self.side_ends(s) if e.coupling == "C")

    def q_counts(self):
        return tuple(len(self.q_sequence(s)) for s in SIDES)

    def flip(self, j, which):
        """Copy with the coupling of end ``which`` ('a' or 'b') of photon j toggled."""
        out = []
        for ph in self.photons:
            if ph.j == j:
                end = getattr(ph, which)
                end = replace(end, coupling="C" if end.coupling == "Q" else "Q")
                ph = replace(ph, **{which: end})
            out.append(ph)
        return InsertionGraph(tuple(out))

    def with_couplings(self, couplings):
        """Copy with end couplings given per photon as ('Q','C') style pairs."""
        out = []
        for ph, (ca, cb) in zip(self.photons, couplings):
            out.append(PhotonLine(ph.j, replace(ph.a, coupling=ca), replace(ph.b, coupling=cb)))
        return InsertionGraph(tuple(out))

    def spec_text(self):
        return "".join(f"photon {ph.j} {ph.a} {ph.b}\n" for ph in self.photons)

    def key(self):
        return tuple((ph.j, str(ph.a), str(ph.b)) for ph in self.photons)


# ---------------------------------------------------------------- validation

def _interval_defects(g: InsertionGraph, q_only=False):
    """Self-energy and vertex-correction intervals on each side.

    An interval of consecutive ends on one side is a self-energy when at least
    one photon lies wholly inside it and no end inside connects outside; it is a
    vertex correction when exactly one end connects outside.  With ``q_only``
    the C ends are dropped first: they are inserted in all orders and form no
    vertex of the pole structure.
    """
    se, vc = [], []
    for s in SIDES:
        ends = [e for e in g.side_ends(s) if e.coupling == "Q" or not q_only]
        for lo in range(len(ends)):
            for hi in range(lo + 1, len(ends)):
                inside = ends[lo:hi + 1]
                counts = {}
                for e in inside:
                    counts[e.photon] = counts.get(e.photon, 0) + 1
                internal = [j for j, c in counts.items() if c == 2]
                external = [j for j, c in counts.items() if c == 1]
                if not internal:
                    continue
                span = (s, inside[0].pos, inside[-1].pos)
                if not external:
                    se.append(span)
                elif len(external) == 1:
                    vc.append(span)
    return se, vc


def _inside(g, span):
    """Photons with an end in the side interval ``span``."""
    s, lo, hi = span
    return sorted({e.photon for e in g.side_ends(s) if lo <= e.pos <= hi})


def validate(g: InsertionGraph) -> InsertionGraph:
    """Check the structural invariants; returns g with ``excluded`` filled in."""
    labels = [ph.j for ph in g.photons]
    if sorted(labels) != list(range(1, len(labels) + 1)):
        raise GraphError("photon labels must be 1..n without gaps", invariant="photon-labels",
                         labels=labels)
    slots = {}
    for ph in g.photons:
        for end, _ in ph.ends():
            if end.side not in SIDES:
                raise GraphError(f"side {end.side} outside 1..3", invariant="side-range",
                                 photon=ph.j)
            if end.pos < 0:
                raise GraphError("negative slot position", invariant="slot-range", photon=ph.j)
            if end.coupling not in ("C", "Q"):
                raise GraphError(f"unknown coupling {end.coupling}", invariant="coupling",
                                 photon=ph.j)
            key = (end.side, end.pos)
            if key in slots:
                raise GraphError(f"slot {end.side}:{end.pos} used twice", invariant="distinct-slots",
                                 photons=[slots[key], ph.j])
            slots[key] = ph.j
        if ph.a.coupling != "Q" and ph.b.coupling != "Q":
            raise GraphError(f"photon {ph.j} has no Q end", invariant="q-on-one-end", photon=ph.j)
    se, vc = _interval_defects(g)
    g.excluded = {"self_energy": se, "vertex_correction": vc}
    if se:
        raise GraphError("self-energy subgraph present", invariant="no-self-energy", spans=se,
                         photons=_inside(g, se[0]))
    if vc:
        raise GraphError("vertex-correction subgraph present", invariant="no-vertex-correction",
                         spans=vc, photons=_inside(g, vc[0]))
    qse, qvc = _interval_defects(g, q_only=True)
    g.excluded.update(q_self_energy=qse, q_vertex_correction=qvc)
    if qse:
        raise GraphError("self-energy on the Q skeleton", invariant="no-self-energy", spans=qse,
                         photons=_inside(g, qse[0]))
    if qvc:
        raise GraphError("vertex correction on the Q skeleton", invariant="no-vertex-correction",
                         spans=qvc, photons=_inside(g, qvc[0]))
    return g


def is_valid(g: InsertionGraph) -> bool:
    try:
        validate(g)
    except GraphError:
        return False
    return True


def make_graph(entries) -> InsertionGraph:
    """Graph from (j, (side, pos, coupling), (side, pos, coupling)) triples, validated."""
    photons = tuple(PhotonLine(j, End(*a), End(*b)) for j, a, b in entries)
    return validate(InsertionGraph(photons))


# ---------------------------------------------------------------- corpus

def _matchings(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for i, other in enumerate(rest):
        for m in _matchings(rest[:i] + rest[i + 1:]):
            yield [(first, other)] + m


def topologies(n):
    """Every placement of n photons on the sides, up to relabelling and direction.

    Slots on each side are numbered 0.. in order; photon labels follow the
    first slot of each pair.
    """
    out = []
    for n1 in range(2 * n + 1):
        for n2 in range(2 * n + 1 - n1):
            n3 = 2 * n - n1 - n2
            slots = [(1, i) for i in range(n1)] + [(2, i) for i in range(n2)] + \
                    [(3, i) for i in range(n3)]
            for m in _matchings(slots):
                ph = tuple(PhotonLine(j + 1, End(*a), End(*b)) for j, (a, b) in enumerate(m))
                out.append(InsertionGraph(ph))
    return out


def coupling_choices(n):
    return list(itertools.product((("Q", "Q"), ("Q", "C"), ("C", "Q")), repeat=n))


def corpus(n, couplings=True):
    """All valid graphs with n photons; every Q/C assignment when ``couplings``."""
    out = []
    for g in topologies(n):
        choices = coupling_choices(n) if couplings else [(("Q", "Q"),) * n]
        for ch in choices:
            h = g.with_couplings(ch)
            if is_valid(h):
                out.append(h)
    return out


def random_graph(n, rng: random.Random, couplings=True, tries=10000):
    """Uniform random placement (and couplings), retried until valid."""
    for _ in range(tries):
        sizes = [0, 0, 0]
        sides = [rng.randint(1, 3) for _ in range(2 * n)]
        ends = []
        for s in sides:
            ends.append((s, sizes[s - 1]))
            sizes[s - 1] += 1
        order = list(range(2 * n))
        rng.shuffle(order)
        ph = []
        for j in range(n):
            a, b = ends[order[2 * j]], ends[order[2 * j + 1]]
            ca, cb = rng.choice((("Q", "Q"), ("Q", "C"), ("C", "Q"))) if couplings else ("Q", "Q")
            ph.append(PhotonLine(j + 1, End(a[0], a[1], ca), End(b[0], b[1], cb)))
        g = InsertionGraph(tuple(ph))
        if is_valid(g):
            return g
    raise GraphError("no valid random graph found", invariant="sampling", n=n)
