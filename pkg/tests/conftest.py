import itertools

import numpy as np
import pytest

from sipgraph import graph_from_edges


def random_graph(n, p, seed, wmax=None):
    rng = np.random.default_rng(seed)
    edges = []
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < p:
            edges.append((i, j, int(rng.integers(1, wmax + 1))) if wmax else (i, j))
    return graph_from_edges(n, edges, wmax)


@pytest.fixture
def rgraph():
    return random_graph


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
