"""Term enumeration and the singularity-form rule table.

Every coupling end splits into a meromorphic (M), nonmeromorphic (N) or
residual (R) part.  A side whose ends are all M is expanded into its pole
terms; any other side stays whole.  Terms containing an R part are flagged as
ignorable near the Landau surface.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .graph import SIDES, InsertionGraph
from .power import PoleShape
from .topology import detect_separable, is_separable_graph, pole_cuts

KINDS = ("mero-separable-pole-aligned", "mero-shifted", "mero-nonseparable",
         "one-end-nonmero", "both-ends-nonmero", "general-nonmero")


@dataclass(frozen=True)
class SingularityForm:
    """phi^power (log phi)^logs; ``log_bound`` replaces logs when only a bound is known."""

    cls: str
    phi_power: int = None
    log_power: int = None
    log_bound: int = None
    anchor: str = None
    kind: str = None

    def as_dict(self):
        return {"class": self.cls, "phi_power": self.phi_power, "log_power": self.log_power,
                "log_bound": self.log_bound, "anchor": self.anchor, "kind": self.kind}


def classify_singularity(term_kind, g: InsertionGraph) -> SingularityForm:
    """Rule-table lookup; anything outside the table is returned unclassified."""
    n = g.n
    if term_kind == "mero-separable-pole-aligned":
        return SingularityForm("log phi", 0, 1, None, "anchor:separable-pole-aligned", term_kind)
    if term_kind == "mero-shifted" and n == 1:
        return SingularityForm("phi^2 log phi", 2, 1, None, "anchor:shifted-pole", term_kind)
    if term_kind in ("mero-shifted", "mero-nonseparable"):
        return SingularityForm("phi (log phi)^m", 1, None, n, "anchor:bridge-smearing", term_kind)
    if term_kind == "one-end-nonmero" and n == 1:
        return SingularityForm("phi log phi", 1, 1, None, "anchor:one-end-nonmero", term_kind)
    if term_kind == "both-ends-nonmero" and n == 1:
        return SingularityForm("phi^2 (log phi)^2", 2, 2, None, "anchor:both-ends-nonmero",
                               term_kind)
    if term_kind == "general-nonmero":
        return SingularityForm("phi (log phi)^(n+1)", 1, n + 1, None, "anchor:general-nonmero",
                               term_kind)
    return SingularityForm("unclassified", anchor=None, kind=str(term_kind))


@dataclass(frozen=True)
class TermSpec:
    parts: tuple           # per photon: (part at end a, part at end b)
    cuts: tuple            # per side: pole index over Q vertices, or None
    kind: str
    ignorable: bool = False

    def shape(self):
        if any(c is None for c in self.cuts):
            return None
        return PoleShape(self.cuts)

    def label(self):
        p = "".join(a + b for a, b in self.parts) or "-"
        c = "".join("*" if x is None else str(x) for x in self.cuts)
        return f"{p}/{c}"


def term_kind(g: InsertionGraph, parts, cuts):
    flat = [x for pr in parts for x in pr]
    if "R" in flat:
        return "residual"
    nn = flat.count("N")
    if nn:
        if g.n == 1:
            return "one-end-nonmero" if nn == 1 else "both-ends-nonmero"
        return "general-nonmero"
    if detect_separable(g, pole_cuts(g, PoleShape(cuts))):
        return "mero-separable-pole-aligned"
    return "mero-shifted" if is_separable_graph(g) is not None else "mero-nonseparable"


def _side_parts(g, parts):
    out = {s: [] for s in SIDES}
    for ph, (pa, pb) in zip(g.photons, parts):
        out[ph.a.side].append(pa)
        out[ph.b.side].append(pb)
    return out


def enumerate_terms(g: InsertionGraph):
    """Every (M|N|R per end) x (pole choice per fully meromorphic side) term."""
    counts = g.q_counts()
    out = []
    for parts in itertools.product(itertools.product("MNR", repeat=2), repeat=g.n):
        sp = _side_parts(g, parts)
        ranges = [range(L + 1) if all(x == "M" for x in sp[s]) else [None]
                  for s, L in zip(SIDES, counts)]
        for cuts in itertools.product(*ranges):
            kind = term_kind(g, parts, cuts)
            out.append(TermSpec(tuple(parts), cuts, kind, kind == "residual"))
    return out


def term_count(g: InsertionGraph):
    """prod over sides of (3^e_s - 1) whole-side terms plus (L_s + 1) pole terms."""
    total = 1
    for s, L in zip(SIDES, g.q_counts()):
        e = len(g.side_ends(s))
        total *= 3 ** e - 1 + (L + 1)
    return total
