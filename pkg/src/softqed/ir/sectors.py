"""Radial sectors: orderings |k_{pi(1)}| >= ... >= |k_{pi(n)}| of the photon momenta."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class Sector:
    """``perm`` lists photon labels from largest to smallest |k|.

    The photon of rank s has |k| = r_1 ... r_s with r_1 <= delta and r_s <= 1
    for s >= 2.
    """

    perm: tuple
    delta: Fraction = Fraction(1)

    @property
    def n(self):
        return len(self.perm)

    def rank(self, j):
        return self.perm.index(j) + 1

    def ranks(self):
        return {j: i + 1 for i, j in enumerate(self.perm)}

    def bounds(self):
        return [(0, self.delta)] + [(0, 1)] * (self.n - 1)

    def label(self):
        return "".join(str(j) for j in self.perm) or "-"


def sectors(n, delta=Fraction(1)):
    """All n! sectors in lexicographic order of the permutation."""
    return [Sector(p, delta) for p in itertools.permutations(range(1, n + 1))]


def sector_of(magnitudes, delta=Fraction(1)):
    """Sector containing the point with |k_j| = magnitudes[j-1].

    Ties sit on a common boundary; they go to the lexicographically first
    permutation, i.e. equal magnitudes are ordered by label.
    """
    labels = range(1, len(magnitudes) + 1)
    perm = tuple(sorted(labels, key=lambda j: (-magnitudes[j - 1], j)))
    return Sector(perm, delta)


def parse_sector(text, n):
    """'all' or a permutation written as digits/commas, e.g. '213' or '2,1,3'."""
    if text in (None, "all"):
        return sectors(n)
    digits = [int(c) for c in text.replace(",", "").strip()]
    if sorted(digits) != list(range(1, n + 1)):
        raise ValueError(f"sector {text!r} is not a permutation of 1..{n}")
    return [Sector(tuple(digits))]
