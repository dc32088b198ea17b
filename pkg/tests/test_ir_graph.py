import itertools
import math
import random

import pytest
from hypothesis import given, strategies as st

from softqed.errors import GraphError
from softqed.ir import (End, InsertionGraph, PhotonLine, Sector, corpus, is_valid, make_graph,
                        parse_sector, random_graph, sector_of, sectors, topologies, validate)

SINGLE = [(1, (1, 0, "Q"), (2, 0, "Q"))]

# Frozen from the brute-force oracle below; the test also recomputes it.
CORPUS_SIZES = [1, 9, 108, 2070]


# ---- independent oracle: ends laid out as one word per side, rules phrased by closure

def _oracle_ok(words, coup):
    # words: three lists of photon labels; coup[(label, occurrence)] = 'Q' | 'C'
    for j in {x for w in words for x in w}:
        if coup[(j, 0)] == "C" and coup[(j, 1)] == "C":
            return False
    for keep in ("QC", "Q"):
        for s, w in enumerate(words):
            seen = {}
            tagged = []
            for x in w:
                occ = sum(1 for ww in words[:s] for y in ww if y == x) + seen.get(x, 0)
                seen[x] = seen.get(x, 0) + 1
                tagged.append((x, occ))
            tagged = [t for t in tagged if coup[t] in keep]
            for lo in range(len(tagged)):
                for hi in range(lo + 2, len(tagged) + 1):
                    chunk = [x for x, _ in tagged[lo:hi]]
                    leaving = [x for x in chunk if chunk.count(x) == 1]
                    if not leaving:
                        return False
                    if len(leaving) == 1 and len(chunk) >= 3:
                        return False
    return True


def oracle_count(n):
    total = 0
    for n1 in range(2 * n + 1):
        for n2 in range(2 * n + 1 - n1):
            for word in _pairings(2 * n):
                words = [word[:n1], word[n1:n1 + n2], word[n1 + n2:]]
                for ch in itertools.product(("QQ", "QC", "CQ"), repeat=n):
                    coup = {}
                    for j, c in enumerate(ch, 1):
                        coup[(j, 0)], coup[(j, 1)] = c[0], c[1]
                    total += _oracle_ok(words, coup)
    return total


def _pairings(m):
    # words of length m in which labels 1..m/2 each appear twice, labelled by first appearance
    def rec(word, nxt, left):
        if len(word) == m:
            yield list(word)
            return
        for x in set(left):
            if left[x] == 1:
                yield from rec(word + [x], nxt, {**left, x: 0})
        if nxt <= m // 2:
            yield from rec(word + [nxt], nxt + 1, {**left, nxt: 1})
    yield from rec([], 1, {})


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_corpus_size_matches_oracle(n):
    assert oracle_count(n) == CORPUS_SIZES[n]
    assert len(corpus(n)) == CORPUS_SIZES[n]


def test_topology_count_is_matchings_times_splits():
    for n in range(4):
        splits = math.comb(2 * n + 2, 2)
        assert len(topologies(n)) == splits * math.prod(range(1, 2 * n, 2))


def test_single_and_bare():
    g = make_graph(SINGLE)
    assert g.n == 1 and g.q_counts() == (1, 1, 0)
    assert make_graph([]).n == 0


@pytest.mark.parametrize("entries,invariant", [
    ([(1, (1, 0, "C"), (1, 1, "C"))], "q-on-one-end"),
    ([(1, (1, 0, "Q"), (1, 1, "Q"))], "no-self-energy"),
    ([(1, (1, 0, "Q"), (1, 2, "Q")), (2, (1, 1, "Q"), (2, 0, "Q"))], "no-vertex-correction"),
    ([(2, (1, 0, "Q"), (2, 0, "Q"))], "photon-labels"),
    ([(1, (1, 0, "Q"), (4, 0, "Q"))], "side-range"),
    ([(1, (1, 0, "Q"), (2, 0, "Q")), (2, (1, 0, "Q"), (3, 0, "Q"))], "distinct-slots"),
])
def test_invariants(entries, invariant):
    with pytest.raises(GraphError) as exc:
        make_graph(entries)
    assert exc.value.payload["invariant"] == invariant


def test_q_skeleton_vertex_correction_rejected():
    # dropping the C end of photon 2 leaves photon 3 wrapped around photon 1's end alone
    entries = [(1, (2, 0, "Q"), (3, 1, "Q")), (2, (2, 1, "Q"), (3, 2, "C")),
               (3, (3, 0, "Q"), (3, 3, "Q"))]
    g = InsertionGraph(tuple(PhotonLine(j, End(*a), End(*b)) for j, a, b in entries))
    with pytest.raises(GraphError) as exc:
        validate(g)
    assert "Q skeleton" in str(exc.value)


def test_flip_toggles_one_end():
    g = make_graph(SINGLE)
    h = g.flip(1, "b")
    assert h.photon(1).b.coupling == "C" and h.photon(1).a.coupling == "Q"
    assert not is_valid(h.flip(1, "a"))


@given(st.integers(1, 4), st.integers(0, 10 ** 6))
def test_random_graphs_valid(n, seed):
    g = random_graph(n, random.Random(seed))
    assert is_valid(g) and g.n == n


def test_spec_text_round_trip():
    g = make_graph([(1, (1, 0, "Q"), (2, 1, "C")), (2, (2, 0, "Q"), (3, 0, "Q"))])
    assert g.spec_text() == "photon 1 1:0:Q 2:1:C\nphoton 2 2:0:Q 3:0:Q\n"


# ---- sectors

@pytest.mark.parametrize("n", [0, 1, 2, 3, 4])
def test_sector_count(n):
    assert len(sectors(n)) == math.factorial(n)


@given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=5))
def test_sectors_cover_once(mags):
    s = sector_of(mags)
    ranked = [mags[j - 1] for j in s.perm]
    assert ranked == sorted(mags, reverse=True)


def test_ties_go_to_first_sector():
    assert sector_of([0.5, 0.5, 0.2]).perm == (1, 2, 3)
    assert sector_of([0.2, 0.5, 0.5]).perm == (2, 3, 1)


def test_sector_ranks_and_bounds():
    s = Sector((2, 3, 1))
    assert s.rank(2) == 1 and s.rank(1) == 3
    assert s.bounds() == [(0, s.delta), (0, 1), (0, 1)]


def test_parse_sector():
    assert len(parse_sector("all", 3)) == 6
    assert parse_sector("213", 3)[0].perm == (2, 1, 3)
    with pytest.raises(ValueError):
        parse_sector("112", 3)
