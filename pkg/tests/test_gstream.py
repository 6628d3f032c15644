import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sipgraph.field import DomainError
from sipgraph.gstream import (CostMeter, GraphStream, SetupError, StreamUpdate, Universe,
                              derive_updates, format_stream, graph_from_edges, parse_stream,
                              pattern_size, replay_canonical_check, triangle_patterns)


def test_parse_format_round_trip():
    text = "N 4\nW 5\nE 0 1 3 1\nE 2 1 2 1\nE 0 1 3 -1\nCLAW 1 1 1 0 1 2\n"
    g = parse_stream(text)
    assert g.n == 4 and g.wmax == 5
    assert g.updates[1] == StreamUpdate(1, 2, 2, 1)
    again = parse_stream(format_stream(g, "comment"))
    assert again.updates == g.updates and again.cert == g.cert and again.n == 4
    assert g.final_edges() == {(1, 2): 2}


def test_disj_lines():
    g = parse_stream("X 0110\nY 1001\n")
    assert g.x == [0, 1, 1, 0] and g.y == [1, 0, 0, 1] and g.n == 4


@pytest.mark.parametrize("text", [
    "N 3\nE 1 1 1\n",          # self loop
    "N 3\nE 0 1 1\nE 0 1 1\n",  # multiplicity 2
    "N 3\nE 0 1 -1\n",         # negative multiplicity
    "N 2\nE 0 5 1\n",          # out of range
    "N 3\nE 0 1 2\n",          # bad delta
    "N 3\nQ 1\n",              # unknown tag
    "N 3\nW 2\nE 0 1 9 1\n",   # weight above W
    "X 012\n",
])
def test_malformed_streams_raise(text):
    with pytest.raises(SetupError):
        parse_stream(text)


def test_graph_from_edges_dict_weights():
    g = graph_from_edges(3, {(0, 1): 4, (2, 1): 2})
    assert g.final_edges() == {(0, 1): 4, (1, 2): 2}
    assert g.weighted and g.weight_bound() == 4


def _brute(universe, pattern, where=None):
    out = []
    for tup in itertools.product(*[range(s) for s in universe.shape]):
        if universe.predicate is not None:
            if not universe.predicate([np.array([c]) for c in tup])[0]:
                continue
        ok = True
        for c, x in zip(pattern, tup):
            if c is None:
                continue
            if isinstance(c, tuple):
                ok &= c[0] <= x < c[1]
            else:
                ok &= x == c
        if ok and where is not None:
            ok &= bool(where([np.array([c]) for c in tup])[0])
        if ok:
            out.append(universe.index(tup))
    return sorted(out)


coord = st.one_of(st.none(), st.integers(0, 4), st.tuples(st.integers(0, 4), st.integers(0, 5)))


@settings(max_examples=60, deadline=None)
@given(st.tuples(coord, coord, coord), st.booleans())
def test_enumerate_matches_brute_force(pattern, constrained):
    pred = (lambda c: c[0] < c[1]) if constrained else None
    u = Universe("t", (5, 5, 5), predicate=pred)
    got = sorted(int(x) for x in u.enumerate(list(pattern)))
    assert got == _brute(u, pattern)
    where = lambda c: (c[2] % 2) == 0
    got = sorted(int(x) for x in u.enumerate(list(pattern), where))
    assert got == _brute(u, pattern, where)


def test_universe_encode_decode():
    u = Universe("t", (3, 4, 5), predicate=lambda c: c[0] <= c[1])
    for idx in range(u.u):
        tup = [int(c[0]) for c in u.decode(np.array([idx]))]
        assert u.index(tup) == idx
    with pytest.raises(DomainError):
        u.index((2, 1, 0))
    with pytest.raises(DomainError):
        u.enumerate([None, None])


def test_triangle_patterns_cover_each_triangle_once():
    n = 6
    for i, j in itertools.combinations(range(n), 2):
        hits = []
        for pat in triangle_patterns(n, i, j):
            hits += list(itertools.product(*[
                range(*c) if isinstance(c, tuple) else [c] for c in pat]))
        want = [t for t in itertools.combinations(range(n), 3) if i in t and j in t]
        assert sorted(hits) == want
        assert sum(pattern_size(p, (n, n, n)) for p in triangle_patterns(n, i, j)) == n - 2


def test_derive_updates():
    up = StreamUpdate.make(3, 1, None, -1)
    assert derive_updates("vertex-cover", up, 5) == [((1, 3), -1)]
    assert derive_updates("vertex-cover", ("vertex", 2), 5) == [((2, None), -1), ((None, 2), -1)]
    assert derive_updates("maximality-a", ("label", 2, 0), 5) == [((2, None, 0), -2),
                                                                  ((None, 2, 0), -2)]
    assert derive_updates("maximality-b", ("fa", 1, 7), 5) == [((1, None), -7), ((None, 1), -7)]
    with pytest.raises(DomainError):
        derive_updates("triangles", StreamUpdate.make(0, 9), 5)
    with pytest.raises(DomainError):
        derive_updates("nope", up, 5)


def test_replay_canonical_check():
    assert replay_canonical_check([(0, 1), (0, 2), (1, 2)]) == (True, None)
    assert replay_canonical_check([(0, 1), (0, 1)]) == (False, 1)
    assert replay_canonical_check([3, 1]) == (False, 1)
    assert replay_canonical_check([]) == (True, None)


def test_cost_meter_peak():
    m = CostMeter()
    m.hold("a", 3)
    m.hold("b", 2)
    m.release("a")
    m.hold("c", 1)
    assert m.verifier_space_bits == 5 * 61
    m.p2v(4)
    m.v2p(1)
    d = m.as_dict()
    assert d["comm_bits_p2v"] == 244 and d["comm_bits_v2p"] == 61
