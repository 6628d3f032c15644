"""Brute-force reference answers.

None of this shares code with the verifier; tests compare verified
values against these, and the honest prover borrows the certificate
searches (Tutte-Berge separators, Cunningham-Marsh duals).
"""
from __future__ import annotations

import itertools
from collections import deque
from functools import lru_cache
from typing import Optional

import numpy as np


def _graph(g):
    """Accept a GraphStream or an (n, {(i, j): w}) pair."""
    if isinstance(g, tuple):
        n, edges = g
        return n, {(min(i, j), max(i, j)): w for (i, j), w in edges.items()}
    return g.n, g.final_edges()


def _adj(n, edges):
    adj = [set() for _ in range(n)]
    for i, j in edges:
        adj[i].add(j)
        adj[j].add(i)
    return adj


def oracle_triangles(g) -> int:
    n, edges = _graph(g)
    adj = _adj(n, edges)
    return sum(1 for a, b, c in itertools.combinations(range(n), 3)
               if b in adj[a] and c in adj[a] and c in adj[b])


def oracle_disjoint(x, y) -> bool:
    return not ({i for i, b in enumerate(x) if b} & {i for i, b in enumerate(y) if b})


# ---- matchings --------------------------------------------------------------

def oracle_mcm(g):
    """Maximum matching size and a witness, by memoised search over vertex subsets."""
    n, edges = _graph(g)
    return _best_matching(n, {e: 1 for e in edges})


def oracle_mwm(g):
    n, edges = _graph(g)
    return _best_matching(n, edges)


def _best_matching(n, wts):
    adj = [[] for _ in range(n)]
    for (i, j), w in sorted(wts.items()):
        adj[i].append((j, w))
        adj[j].append((i, w))

    @lru_cache(maxsize=None)
    def best(free: int):
        if free == 0:
            return 0, ()
        v = (free & -free).bit_length() - 1
        rest = free & ~(1 << v)
        val, wit = best(rest)
        for u, w in adj[v]:
            if rest >> u & 1:
                sub, sw = best(rest & ~(1 << u))
                if sub + w > val:
                    val, wit = sub + w, ((min(u, v), max(u, v)),) + sw
        return val, wit

    val, wit = best((1 << n) - 1)
    best.cache_clear()
    return val, sorted(wit)


def oracle_bipartite_mcm(g, left=None):
    """Hopcroft-Karp on a bipartite graph; left side found by 2-colouring if absent."""
    n, edges = _graph(g)
    if left is None:
        colour = oracle_two_colouring(g)
        if colour is None:
            raise ValueError("graph is not bipartite")
        left = [v for v in range(n) if colour[v] == 0]
    lset = set(left)
    adj = {v: [] for v in left}
    for i, j in sorted(edges):
        a, b = (i, j) if i in lset else (j, i)
        adj[a].append(b)
    INF = float("inf")
    mate_l = {v: None for v in left}
    mate_r: dict = {}

    def bfs():
        dist = {}
        q = deque()
        for v in left:
            if mate_l[v] is None:
                dist[v] = 0
                q.append(v)
        found = False
        while q:
            v = q.popleft()
            for u in adj[v]:
                w = mate_r.get(u)
                if w is None:
                    found = True
                elif w not in dist:
                    dist[w] = dist[v] + 1
                    q.append(w)
        return found, dist

    def dfs(v, dist):
        for u in adj[v]:
            w = mate_r.get(u)
            if w is None or (dist.get(w) == dist[v] + 1 and dfs(w, dist)):
                mate_l[v] = u
                mate_r[u] = v
                return True
        dist[v] = INF
        return False

    size = 0
    while True:
        found, dist = bfs()
        if not found:
            break
        for v in left:
            if mate_l[v] is None and dfs(v, dist):
                size += 1
    wit = sorted((min(v, u), max(v, u)) for v, u in mate_l.items() if u is not None)
    return size, wit


def oracle_hungarian(g):
    """Maximum-weight bipartite matching value via the assignment solver."""
    from scipy.optimize import linear_sum_assignment

    n, edges = _graph(g)
    colour = oracle_two_colouring(g)
    if colour is None:
        raise ValueError("graph is not bipartite")
    left = [v for v in range(n) if colour[v] == 0]
    right = [v for v in range(n) if colour[v] == 1]
    if not left or not right:
        return 0
    li = {v: k for k, v in enumerate(left)}
    ri = {v: k for k, v in enumerate(right)}
    m = np.zeros((len(left), len(right)))
    for (i, j), w in edges.items():
        a, b = (i, j) if colour[i] == 0 else (j, i)
        m[li[a], ri[b]] = w
    rows, cols = linear_sum_assignment(m, maximize=True)
    return int(round(m[rows, cols].sum()))


# ---- connectivity -----------------------------------------------------------

def oracle_components(g) -> list:
    """Connected components as sorted vertex lists, ordered by smallest vertex."""
    n, edges = _graph(g)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in edges:
        a, b = find(i), find(j)
        if a != b:
            parent[max(a, b)] = min(a, b)
    groups: dict = {}
    for v in range(n):
        groups.setdefault(find(v), []).append(v)
    return sorted(groups.values())


def oracle_cc(g) -> int:
    return len(oracle_components(g))


def oracle_two_colouring(g) -> Optional[list]:
    n, edges = _graph(g)
    adj = _adj(n, edges)
    colour = [None] * n
    for s in range(n):
        if colour[s] is not None:
            continue
        colour[s] = 0
        q = deque([s])
        while q:
            v = q.popleft()
            for u in adj[v]:
                if colour[u] is None:
                    colour[u] = 1 - colour[v]
                    q.append(u)
                elif colour[u] == colour[v]:
                    return None
    return colour


def oracle_bipartite(g) -> bool:
    return oracle_two_colouring(g) is not None


def oracle_mst(g) -> int:
    """Kruskal; minimum spanning forest weight."""
    n, edges = _graph(g)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    total = 0
    for (i, j), w in sorted(edges.items(), key=lambda kv: (kv[1], kv[0])):
        a, b = find(i), find(j)
        if a != b:
            parent[a] = b
            total += w
    return total


# ---- Tutte-Berge ------------------------------------------------------------

def oracle_tutte_berge(g):
    """(bound, separator) minimising (n + |S| - odd(G - S)) / 2 over all S."""
    n, edges = _graph(g)
    adj = _adj(n, edges)
    best = None
    for mask in range(1 << n):
        removed = [bool(mask >> v & 1) for v in range(n)]
        seen = list(removed)
        odd = 0
        for s in range(n):
            if seen[s]:
                continue
            seen[s] = True
            size, stack = 0, [s]
            while stack:
                v = stack.pop()
                size += 1
                for u in adj[v]:
                    if not seen[u]:
                        seen[u] = True
                        stack.append(u)
            odd += size % 2
        k = bin(mask).count("1")
        val = (n + k - odd) // 2
        if best is None or val < best[0]:
            best = (val, [v for v in range(n) if removed[v]])
    return best


# ---- TSP --------------------------------------------------------------------

def oracle_tsp(n: int, w) -> int:
    """Held-Karp optimum tour length; w is an n x n symmetric matrix."""
    if n <= 1:
        return 0
    if n == 2:
        return 2 * w[0][1]
    full = 1 << (n - 1)
    INF = float("inf")
    dp = [[INF] * n for _ in range(full)]
    for k in range(1, n):
        dp[1 << (k - 1)][k] = w[0][k]
    for mask in range(1, full):
        for last in range(1, n):
            cur = dp[mask][last]
            if cur == INF or not mask >> (last - 1) & 1:
                continue
            for nxt in range(1, n):
                bit = 1 << (nxt - 1)
                if mask & bit:
                    continue
                cand = cur + w[last][nxt]
                if cand < dp[mask | bit][nxt]:
                    dp[mask | bit][nxt] = cand
    return min(dp[full - 1][k] + w[k][0] for k in range(1, n))


def oracle_3ap_check(seq) -> bool:
    """True when no three distinct members a, b, c satisfy a + b = 2c."""
    vals = sorted(set(seq))
    if len(vals) != len(list(seq)):
        return False
    s = set(vals)
    for x, y in itertools.combinations(vals, 2):
        if (x + y) % 2 == 0 and (x + y) // 2 in s:
            return False
    return True


# ---- Cunningham-Marsh duals -------------------------------------------------

def oracle_cm_duals(g, wmax: Optional[int] = None):
    """Integral optimal duals (y, claws) whose odd sets form disjoint chains.

    Solved as a small integer program over every odd vertex set of size at
    least 3 containing an edge, with pairwise laminarity and a no-branching
    rule so the support splits into vertex-disjoint nested chains.  Duals
    are capped at wmax (also cumulative per chain).  Returns None when no
    such certificate reaches the matching optimum.

    claws: list of (LI, level, r, boundary) with level 1 outermost.
    """
    from scipy.optimize import Bounds, LinearConstraint, milp

    n, edges = _graph(g)
    opt, _ = oracle_mwm((n, edges))
    if not edges:
        return {}, []
    W = wmax if wmax is not None else max(edges.values())
    sets = []
    for size in range(3, n + 1, 2):
        for U in itertools.combinations(range(n), size):
            s = frozenset(U)
            if any(i in s and j in s for i, j in edges):
                sets.append(s)
    ns = len(sets)
    nv = n + 2 * ns  # y, z, b
    rows, lo, hi = [], [], []

    def add(coefs: dict, lb, ub):
        row = np.zeros(nv)
        for k, c in coefs.items():
            row[k] += c
        rows.append(row)
        lo.append(lb)
        hi.append(ub)

    for (i, j), w in edges.items():
        c = {i: 1, j: 1}
        for k, s in enumerate(sets):
            if i in s and j in s:
                c[n + k] = 1
        add(c, w, np.inf)
    for k in range(ns):
        add({n + k: 1, n + ns + k: -W}, -np.inf, 0)
        sup = {n + m: 1 for m, t in enumerate(sets) if t >= sets[k]}
        add(sup, -np.inf, W)
    for a, b in itertools.combinations(range(ns), 2):
        A, B = sets[a], sets[b]
        if A & B and not (A <= B or B <= A):
            add({n + ns + a: 1, n + ns + b: 1}, -np.inf, 1)
    for c, C in enumerate(sets):
        inner = [k for k, s in enumerate(sets) if s < C]
        for a, b in itertools.combinations(inner, 2):
            if not sets[a] & sets[b]:
                add({n + ns + a: 1, n + ns + b: 1, n + ns + c: 1}, -np.inf, 2)
    cost = np.zeros(nv)
    cost[:n] = 1
    for k, s in enumerate(sets):
        cost[n + k] = len(s) // 2
    integrality = np.ones(nv)
    ub = np.concatenate([np.full(n, W), np.full(ns, W), np.ones(ns)])
    cons = [LinearConstraint(np.array(rows), lo, hi)] if rows else []
    res = milp(cost, constraints=cons, integrality=integrality,
               bounds=Bounds(np.zeros(nv), ub))
    if res.x is None:
        return None
    x = np.round(res.x).astype(int)
    if int(round(res.fun)) != opt:
        return None
    y = {v: int(x[v]) for v in range(n) if x[v] > 0}
    chosen = [(sets[k], int(x[n + k])) for k in range(ns) if x[n + k] > 0]
    return y, chains_to_claws(chosen)


def chains_to_claws(chosen):
    """Group nested odd sets into claws; levels count from the outermost set."""
    chosen = sorted(chosen, key=lambda t: (-len(t[0]), sorted(t[0])))
    claws = []  # each a list of (set, z) outermost first
    for s, z in chosen:
        for chain in claws:
            if s <= chain[-1][0]:
                chain.append((s, z))
                break
        else:
            claws.append([(s, z)])
    claws.sort(key=lambda ch: min(ch[0][0]))
    out = []
    for li, chain in enumerate(claws, 1):
        r = 0
        for level, (s, z) in enumerate(chain, 1):
            r += z
            inner = chain[level][0] if level < len(chain) else frozenset()
            out.append((li, level, r, sorted(s - inner)))
    return out
