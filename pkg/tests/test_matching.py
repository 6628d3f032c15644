import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sipgraph import GraphStream, graph_from_edges, run_session, soundness_trial
from sipgraph.cli import FIXTURES, gen_metric
from sipgraph.gstream import parse_stream
from sipgraph.matching import (choose_dk, cm_edge_fives, cm_satisfied, digit_family,
                               generate_f_a, honest_cm_cert, maximality_a, maximality_b, x_a)
from sipgraph.oracles import (oracle_3ap_check, oracle_bipartite_mcm, oracle_mcm, oracle_mwm,
                              oracle_tsp)
from sipgraph.session import Session

from conftest import random_graph


def complete(n, w=None):
    return graph_from_edges(n, [(i, j) + ((w,) if w else ()) for i, j in
                                itertools.combinations(range(n), 2)])


def k33():
    return graph_from_edges(6, [(i, j) for i in range(3) for j in range(3, 6)])


# ---- bipartite --------------------------------------------------------------

def test_mcm_bipartite_examples():
    assert run_session("mcm-bipartite", k33()).value == 3
    assert run_session("mcm-bipartite", graph_from_edges(3, [(0, 1), (1, 2)])).value == 1
    assert run_session("mcm-bipartite", GraphStream(n=4)).value == 0


def test_mcm_bipartite_random():
    for seed in range(10):
        rng = np.random.default_rng(seed)
        n = 12
        edges = [(i, j) for i in range(6) for j in range(6, 12) if rng.random() < 0.3]
        g = graph_from_edges(n, edges)
        assert run_session("mcm-bipartite", g, seed=seed).value == oracle_bipartite_mcm(g)[0]


def test_mwm_bipartite_examples():
    assert run_session("mwm-bipartite", graph_from_edges(2, [(0, 1, 5)])).value == 5
    for seed in range(6):
        rng = np.random.default_rng(seed)
        edges = [(i, j, int(rng.integers(1, 7))) for i in range(4) for j in range(4, 8)
                 if rng.random() < 0.5]
        g = graph_from_edges(8, edges, 6)
        t = run_session("mwm-bipartite", g, seed=seed)
        assert t.accepted and t.value == oracle_mwm(g)[0]


def test_bipartite_adversaries():
    path = graph_from_edges(6, [(0, 1), (1, 2), (3, 4)])
    assert soundness_trial("mcm-bipartite", path, "fake-matching-edge", trials=20) == 1.0
    g = graph_from_edges(6, [(0, 3), (0, 4), (1, 4), (2, 5), (1, 5)])
    assert soundness_trial("mcm-bipartite", g, "cover-missing-edge", trials=20) == 1.0
    w = graph_from_edges(6, {(0, 3): 3, (0, 4): 2, (1, 4): 4, (2, 5): 1, (1, 5): 2}, 4)
    assert soundness_trial("mwm-bipartite", w, "wrong-duals", trials=20) == 1.0


# ---- general MWM ------------------------------------------------------------

def test_triangle_claw_fixture():
    t = run_session("mwm-general", parse_stream(FIXTURES["triangle-claw"]))
    assert t.accepted and t.value == 1
    info = t.data["info"]
    assert info["sigma_y"] == 0 and info["sigma_r"] - info["sigma_max"] == 2


def test_single_edge_mwm():
    assert run_session("mwm-general", graph_from_edges(2, [(0, 1, 7)], 7)).value == 7
    assert run_session("mwm-general", GraphStream(n=3)).value == 0


def test_weighted_triangle_mwm():
    g = graph_from_edges(3, {(0, 1): 3, (1, 2): 4, (0, 2): 5}, 5)
    assert run_session("mwm-general", g).value == 5


def test_mwm_general_random():
    for seed in range(6):
        g = random_graph(6, 0.5, seed, wmax=3)
        t = run_session("mwm-general", g, seed=seed)
        assert t.accepted and t.value == oracle_mwm(g)[0]


def test_shadow_fives_match_satisfaction():
    for seed in range(6):
        g = random_graph(6, 0.5, seed, wmax=3)
        edges = g.final_edges()
        y, claws = honest_cm_cert(6, edges, 3)
        fives = cm_edge_fives(6, 3, edges, y, claws)
        assert all(v == 1 for v in fives.values())
        # break one dual: edges that lose their constraint lose their 5
        if y:
            v = next(iter(y))
            y2 = dict(y)
            y2[v] -= 1
            sat = cm_satisfied(edges, y2, claws)
            fives = cm_edge_fives(6, 3, edges, y2, claws)
            for e in edges:
                assert fives[e] == (1 if sat[e] else 0)


@pytest.mark.parametrize("strategy", ["non-laminar-claw", "non-odd-set", "wrong-sigma-r"])
def test_claw_adversaries(strategy):
    g = parse_stream(FIXTURES["triangle-claw"])
    assert soundness_trial("mwm-general", g, strategy, trials=20) == 1.0


def test_wrong_duals_general():
    g = graph_from_edges(5, {(0, 1): 2, (1, 2): 2, (0, 2): 2, (2, 3): 1, (3, 4): 3}, 3)
    assert soundness_trial("mwm-general", g, "wrong-duals", trials=20) == 1.0


# ---- general MCM ------------------------------------------------------------

@pytest.mark.parametrize("variant", ["A", "B"])
def test_mcm_general_examples(variant):
    opts = {"maximality": variant}
    assert run_session("mcm-general", complete(3), options=opts).value == 1
    assert run_session("mcm-general", complete(4), options=opts).value == 2
    assert run_session("mcm-general", parse_stream(FIXTURES["two-triangles"]),
                       options=opts).value == 2
    assert run_session("mcm-general", cycle5(), options=opts).value == 2
    assert run_session("mcm-general", parse_stream(FIXTURES["star"]), options=opts).value == 1


def cycle5():
    return graph_from_edges(5, [(i, (i + 1) % 5) for i in range(5)])


@pytest.mark.parametrize("variant", ["A", "B"])
def test_mcm_general_random(variant):
    for seed in range(8):
        g = random_graph(8, 0.3, seed)
        t = run_session("mcm-general", g, seed=seed, options={"maximality": variant})
        assert t.accepted and t.value == oracle_mcm(g)[0]


def test_mcm_general_adversaries():
    tri = graph_from_edges(7, [(0, 1), (1, 2), (2, 0), (2, 3), (4, 5), (5, 6), (4, 6)])
    assert soundness_trial("mcm-general", tri, "hidden-cross-edge", trials=20) == 1.0
    path = graph_from_edges(6, [(0, 1), (1, 2), (3, 4)])
    assert soundness_trial("mcm-general", path, "fake-matching-edge", trials=20) == 1.0


def _partition_labels(n, rng):
    parts = int(rng.integers(1, 4))
    return [int(rng.integers(0, parts + 1)) for _ in range(n)]


def _crossing(g, labs):
    return any(labs[i] != labs[j] and labs[i] and labs[j] for i, j in g.final_edges())


def test_maximality_variants_agree_with_scan():
    rng = np.random.default_rng(0)
    for trial in range(30):
        n = int(rng.integers(2, 9))
        g = random_graph(n, 0.3, trial)
        labs = _partition_labels(n, rng)
        want = not _crossing(g, labs)
        got = []
        for fn in (maximality_a, maximality_b):
            sess = Session(g, seed=trial)
            try:
                got.append(fn(sess, lambda p: [(v, k) for v, k in enumerate(labs)]))
            except Exception as exc:
                assert type(exc).__name__ == "Reject"
                got.append(False)
        assert got == [want, want]


def test_maximality_a_frequency_cases():
    rng = np.random.default_rng(1)
    for trial in range(20):
        n = int(rng.integers(2, 8))
        g = random_graph(n, 0.4, trial)
        labs = _partition_labels(n, rng)
        sess = Session(g, seed=trial)
        try:
            maximality_a(sess, lambda p: [(v, k) for v, k in enumerate(labs)])
        except Exception:
            pass
        a = sess.prover.vectors["maxa"].a
        assert set(np.unique(a)) <= set(range(-4, 6))
        assert (np.any(a == -1)) == _crossing(g, labs)


# ---- 3-AP-free labels -------------------------------------------------------

def test_digit_family_smallest_value():
    assert choose_dk(1) == (3, 3)
    assert digit_family(3, 3, 6)[0] == 0 * 25 + 1 * 5 + 2


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=1, max_value=50))
def test_generate_f_a(r):
    f = generate_f_a(r)
    assert len(f) == r and f == sorted(f) and len(set(f)) == r
    assert oracle_3ap_check(f)
    assert all(v % 5 == 2 for v in f)
    cross = x_a(f)
    assert len(cross) <= max(0, r * (r - 1))
    assert all(c % 5 == 2 for c in cross)
    benign = {0, 1} | {x for a in f for x in (-a, 1 - a, -2 * a, 1 - 2 * a)}
    assert not benign & set(cross)


def test_generate_f_a_empty():
    assert generate_f_a(0) == []


# ---- TSP --------------------------------------------------------------------

def test_tsp_small():
    g = graph_from_edges(3, {(0, 1): 2, (0, 2): 3, (1, 2): 5}, 5)
    t = run_session("tsp", g)
    assert t.accepted and t.value == 10


def test_tsp_line_and_random():
    # four collinear points
    pos = [0, 1, 3, 4]
    g = graph_from_edges(4, {(i, j): abs(pos[i] - pos[j]) for i, j in
                             itertools.combinations(range(4), 2)}, 4)
    t = run_session("tsp", g)
    opt = oracle_tsp(4, [[abs(a - b) for b in pos] for a in pos])
    assert opt == 8 and opt <= t.value <= 1.6 * opt
    for seed in range(3):
        g = gen_metric(7, seed)
        e = g.final_edges()
        w = [[0 if i == j else e[min(i, j), max(i, j)] for j in range(7)] for i in range(7)]
        t = run_session("tsp", g, seed=seed)
        opt = oracle_tsp(7, w)
        assert t.accepted and opt <= t.value <= 1.6 * opt
        assert t.data["info"]["odd_vertices"] % 2 == 0


def test_tsp_odd_set_lie():
    assert soundness_trial("tsp", gen_metric(6, 1), "odd-set-lie", trials=5) == 1.0
