"""Separability, bridge lines and the momentum shifts at the hard vertices.

Cutting one segment per side breaks the triangle into three arcs, one around
each hard vertex.  Side s runs v_s -> v_{s+1}; with cut segment c (counted
over all ends of the side, segment u lies before end u), ends u < c belong to
the arc of v_s and ends u >= c to the arc of v_{s+1}.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import networkx as nx

from ..errors import ReroutingError, ShapeError
from ..expr import MomentumVector
from .graph import SIDES, InsertionGraph
from .power import PoleShape
from .sectors import Sector


def _next(s):
    return s % 3 + 1


def pole_cuts(g: InsertionGraph, shape: PoleShape):
    """Full-segment cuts for a pole shape (cut placed right after Q vertex c-1)."""
    out = []
    for s, c in zip(SIDES, shape.cuts):
        ends = g.side_ends(s)
        qpos = [u for u, e in enumerate(ends) if e.coupling == "Q"]
        if not 0 <= c <= len(qpos):
            raise ShapeError(f"cut {c} outside the Q vertices of side {s}", side=s)
        out.append(0 if c == 0 else qpos[c - 1] + 1)
    return tuple(out)


def cut_choices(g: InsertionGraph):
    return list(itertools.product(*(range(len(g.side_ends(s)) + 1) for s in SIDES)))


def _arc(g, cuts):
    """Hard vertex (1..3) whose arc holds each (photon, role) end."""
    where = {}
    for s, c in zip(SIDES, cuts):
        for u, e in enumerate(g.side_ends(s)):
            role = "a" if e.sign < 0 else "b"
            where[(e.photon, role)] = s if u < c else _next(s)
    return where


def line_graph(g: InsertionGraph, cuts):
    """networkx graph of the diagram with the cut segments removed."""
    G = nx.Graph()
    for s in SIDES:
        G.add_node(f"v{s}")
    for s, c in zip(SIDES, cuts):
        ends = g.side_ends(s)
        nodes = [f"v{s}"] + [f"e{s}.{e.pos}" for e in ends] + [f"v{_next(s)}"]
        for u in range(len(nodes) - 1):
            if u != c:
                G.add_edge(nodes[u], nodes[u + 1], kind="segment", side=s, index=u)
    for ph in g.photons:
        G.add_edge(f"e{ph.a.side}.{ph.a.pos}", f"e{ph.b.side}.{ph.b.pos}", kind="photon",
                   photon=ph.j)
    return G


@dataclass
class SeparationCertificate:
    cuts: tuple
    separable: bool
    partition: dict = field(default_factory=dict)   # hard vertex -> sorted node names
    witness: dict = None
    bridges: tuple = ()

    def __bool__(self):
        return self.separable


def detect_separable(g: InsertionGraph, cuts) -> SeparationCertificate:
    """Certificate when the cuts leave three components with one hard vertex each.

    Otherwise the witness names a photon joining two arcs and a cycle through
    it that crosses between components.
    """
    cuts = tuple(cuts)
    if len(cuts) != 3:
        raise ShapeError("one cut segment per side is required")
    G = line_graph(g, cuts)
    comps = list(nx.connected_components(G))
    hard = [[v for v in c if v.startswith("v")] for c in comps]
    ok = len(comps) == 3 and all(len(h) == 1 for h in hard)
    cert = SeparationCertificate(cuts, ok)
    if ok:
        cert.partition = {h[0]: sorted(c) for h, c in zip(hard, comps)}
        return cert
    where = _arc(g, cuts)
    bridges = tuple(sorted(ph.j for ph in g.photons if where[(ph.j, "a")] != where[(ph.j, "b")]))
    cert.bridges = bridges
    j = bridges[0]
    ph = g.photon(j)
    a, b = f"e{ph.a.side}.{ph.a.pos}", f"e{ph.b.side}.{ph.b.pos}"
    Gm = G.copy()
    Gm.remove_edge(a, b)
    path = nx.shortest_path(Gm, a, b) if nx.has_path(Gm, a, b) else [a, b]
    cert.witness = {"photon": j, "arcs": [f"v{where[(j, 'a')]}", f"v{where[(j, 'b')]}"],
                    "cycle": path + [a]}
    return cert


def is_separable_graph(g: InsertionGraph):
    """First separating cut choice, or None."""
    for cuts in cut_choices(g):
        if detect_separable(g, cuts):
            return cuts
    return None


@dataclass
class BridgeSet:
    bridges: tuple
    first_rank: int = None
    k_a: tuple = ()
    k_b: tuple = ()


def find_bridge_lines(g: InsertionGraph, shape: PoleShape, sector: Sector = None) -> BridgeSet:
    """Photons whose every completing loop crosses a star (pole) segment.

    With the sector ordering, i is the smallest rank among the bridges; k_a
    holds the photons of rank below i and k_b the rest.
    """
    where = _arc(g, pole_cuts(g, shape))
    br = tuple(sorted(ph.j for ph in g.photons if where[(ph.j, "a")] != where[(ph.j, "b")]))
    if not br:
        return BridgeSet(())
    sector = sector or Sector(tuple(range(1, g.n + 1)))
    i = min(sector.rank(j) for j in br)
    return BridgeSet(br, i, tuple(sector.perm[:i - 1]), tuple(sector.perm[i - 1:]))


def momentum_shift(g: InsertionGraph, shape: PoleShape, rerouting=None):
    """(K_1, K_2, K_3): net photon momentum leaving each hard vertex.

    Each bridge photon loop is redrawn to run from its absorbing end along its
    arc out of that arc's hard vertex, and back in at the emitting end's hard
    vertex.  ``rerouting`` may give {photon: (out_vertex, in_vertex)}; a
    choice that does not match the arcs would carry the loop across a star
    segment and is rejected.
    """
    where = _arc(g, pole_cuts(g, shape))
    K = {s: MomentumVector() for s in SIDES}
    rerouting = dict(rerouting or {})
    for ph in g.photons:
        src, dst = where[(ph.j, "a")], where[(ph.j, "b")]
        want = (dst, src)
        got = rerouting.pop(ph.j, None)
        if got is not None and tuple(got) != want and not (src == dst and got[0] == got[1] == src):
            raise ReroutingError("rerouted loop passes through a star segment", photon=ph.j,
                                 requested=list(got), allowed=list(want))
        if src == dst:
            continue
        k = MomentumVector({f"k{ph.j}": 1})
        K[dst] = K[dst] + k
        K[src] = K[src] - k
    if rerouting:
        raise ReroutingError("rerouting names unknown photons", photons=sorted(rerouting))
    return K[1], K[2], K[3]
