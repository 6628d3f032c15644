"""Spanning-forest certificates: connectivity, approximate MST, bipartiteness.

Forest certificate stream layout (all tokens are integer tuples):

  header   (edge_total, tree_count)
  forest   (0, root) opens a tree; (1, parent, child, depth[, w]) adds an edge
  edges    (a, b, label[, w]) with a < b, strictly increasing in (a, b)
  vertices (v, label, depth, outdeg) for v = 0..n-1 in order;
           label 0 marks a separator vertex (only when separators are allowed)

The depth annotation plus parent fingerprints rule out detached cycles,
which in-degree counting alone cannot.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

from .gstream import SetupError, Universe, derive_updates
from .fingerprint import Fingerprint
from .session import Reject, Session, register_strategy
from .sumcheck import FreqWindow

ROOT, EDGE = 0, 1


# ---- honest certificate construction ---------------------------------------

def cached(prover, key, fn):
    if key not in prover.cache:
        prover.cache[key] = fn()
    return prover.cache[key]


def bfs_forest(n: int, edges, skip=()):
    """BFS trees of the graph minus `skip`, rooted at each component's minimum.

    Returns (trees, depth) where trees is a list of
    (root, [(parent, child, depth), ...]) in topological order.
    """
    skip = set(skip)
    adj = [[] for _ in range(n)]
    for i, j in sorted(edges):
        if i in skip or j in skip:
            continue
        adj[i].append(j)
        adj[j].append(i)
    depth = [None] * n
    trees = []
    for s in range(n):
        if s in skip or depth[s] is not None:
            continue
        depth[s] = 0
        order = []
        q = deque([s])
        while q:
            v = q.popleft()
            for u in adj[v]:
                if depth[u] is None:
                    depth[u] = depth[v] + 1
                    order.append((v, u, depth[u]))
                    q.append(u)
        trees.append((s, order))
    return trees, depth


def forest_tokens(n: int, trees, separators=(), weights=None):
    """Header, forest, edge-replay and vertex-replay token lists."""
    label = {}
    dep = {}
    outdeg = [0] * n
    forest = []
    replay = []
    total = 0
    for k, (root, order) in enumerate(trees, 1):
        forest.append((ROOT, root))
        label[root] = k
        dep[root] = 0
        for p, c, d in order:
            w = None if weights is None else weights[(min(p, c), max(p, c))]
            forest.append((EDGE, p, c, d) if w is None else (EDGE, p, c, d, w))
            label[c] = k
            dep[c] = d
            outdeg[p] += 1
            a, b = min(p, c), max(p, c)
            replay.append((a, b, k) if w is None else (a, b, k, w))
            total += 1
    replay.sort()
    seps = set(separators)
    vertices = []
    for v in range(n):
        if v in seps:
            vertices.append((v, 0, 0, 0))
        else:
            vertices.append((v, label[v], dep[v], outdeg[v]))
    return [(total, len(trees))], forest, replay, vertices


# ---- verifier ---------------------------------------------------------------

@dataclass
class ForestResult:
    trees: int
    sizes: list
    odd_components: int
    separators: int
    weight: int = 0
    labels_seen: dict = field(default_factory=dict)


def f_support(fvals):
    """Every value a Maximality-B pair slot can end at, and the crossing set."""
    pts = {0, 1}
    cross = set()
    for a in fvals:
        pts |= {-a, 1 - a, -2 * a, 1 - 2 * a}
    for x in range(len(fvals)):
        for y in range(len(fvals)):
            if x != y:
                s = fvals[x] + fvals[y]
                pts |= {-s, 1 - s}
                cross.add(1 - s)
    return FreqWindow.of_points(pts), sorted(cross)


class ForestVerifier:
    """Verifier state for one spanning-forest certificate over [n].

    maximality: None, 'forest' (every vertex labelled), 'A' or 'B'
    (Tutte-Berge flavours where label 0 vertices form the separator).
    """

    def __init__(self, sess: Session, n: int, tag: str, maximality: Optional[str] = None,
                 weighted: bool = False, wmax: int = 1, allow_separators: bool = False,
                 edge_filter: Optional[Callable] = None):
        self.sess = sess
        self.n = n
        self.tag = tag
        self.maximality = maximality
        self.weighted = weighted
        self.wmax = wmax
        self.allow_separators = allow_separators
        self.edge_filter = edge_filter
        nn = max(n, 1)
        shape = (nn, nn, wmax + 1) if weighted else (nn, nn)
        self.sub = f"{tag}/subset"
        sess.open_vector(self.sub, Universe(self.sub, shape, ("i", "j", "w")[:len(shape)]))
        self.mx = None
        if maximality in ("forest", "A"):
            self.mx = f"{tag}/maximality"
            sess.open_vector(self.mx, Universe(self.mx, (nn, nn, nn), ("i", "j", "label")))
        elif maximality == "B":
            self.mx = f"{tag}/maximality"
            sess.open_vector(self.mx, Universe(self.mx, (nn, nn), ("i", "j")))
        self.edges_seen = 0

    # input pass
    def edge(self, up, w=None):
        if self.edge_filter is not None and not self.edge_filter(up):
            return
        self.edges_seen += up.delta
        if self.weighted:
            self.sess.update(self.sub, (up.i, up.j, w if w is not None else up.w), up.delta)
        else:
            self.sess.update(self.sub, (up.i, up.j), up.delta)
        if self.mx is not None:
            rule = "maximality-b" if self.maximality == "B" else "maximality-a"
            for pattern, delta in derive_updates(rule, up, self.n):
                self.sess.update(self.mx, pattern, delta)

    def _key(self, v, d, k):
        n = self.n
        return v + n * (d + n * k)

    # certificate
    def run(self, compute: Callable, fvals_for: Optional[Callable] = None,
            on_edge: Optional[Callable] = None) -> ForestResult:
        """Stream and check the certificate; finv checks happen in finish()."""
        sess, n, tag = self.sess, self.n, self.tag
        sess.phase = tag
        header = sess.receive(f"{tag}/header", lambda p: compute(p)[0])
        if len(header) != 1 or len(header[0]) != 2:
            raise Reject("malformed forest header", tag)
        total_edges, r = header[0]
        if not 0 <= r <= n or not 0 <= total_edges < max(n, 1):
            raise Reject("forest header out of range", tag)
        fvals = fvals_for(r) if fvals_for is not None else None
        span = n * n * (n + 1) + 1
        espan = n * n * (n + 1) * (self.wmax + 1) + 1
        fp_occ = sess.fingerprint(f"{tag}/occ", span)
        fp_occ_r = Fingerprint(fp_occ.alpha, span)
        fp_par = sess.fingerprint(f"{tag}/parent", span)
        fp_par_r = Fingerprint(fp_par.alpha, span)
        fp_e = sess.fingerprint(f"{tag}/edges", espan)
        fp_e_r = Fingerprint(fp_e.alpha, espan)
        sess.hold(f"{tag}/fp-replay", 3)
        sess.hold(f"{tag}/counters", 8)

        k = 0
        size = 0
        sizes = []
        odd = 0
        weight = 0
        count_edges = 0

        def close_tree():
            nonlocal odd
            if k:
                sizes.append(size)
                odd += size % 2

        for tok in sess.receive(f"{tag}/forest", lambda p: compute(p)[1]):
            if tok[0] == ROOT and len(tok) == 2:
                close_tree()
                k += 1
                size = 1
                v = tok[1]
                if not 0 <= v < n or k > r:
                    raise Reject("root out of range or too many trees", tag)
                fp_occ.update(self._key(v, 0, k))
                self._label(v, k, fvals)
            elif tok[0] == EDGE and len(tok) == (5 if self.weighted else 4):
                p, c, d = tok[1], tok[2], tok[3]
                if k == 0 or not (0 <= p < n and 0 <= c < n) or p == c or not 1 <= d < n:
                    raise Reject("malformed tree edge", tag)
                fp_occ.update(self._key(c, d, k))
                fp_par.update(self._key(p, d - 1, k))
                a, b = min(p, c), max(p, c)
                w = tok[4] if self.weighted else 0
                if self.weighted and not 1 <= w <= self.wmax:
                    raise Reject("tree edge weight out of range", tag)
                fp_e.update(self._ekey(a, b, k, w))
                weight += w
                size += 1
                count_edges += 1
                self._label(c, k, fvals)
                if on_edge is not None:
                    on_edge(p, c, w)
            else:
                raise Reject("malformed forest token", tag)
        close_tree()
        if k != r or count_edges != total_edges:
            raise Reject("forest does not match its header", tag)

        prev = None
        for tok in sess.receive(f"{tag}/edges", lambda p: compute(p)[2]):
            if len(tok) != (4 if self.weighted else 3):
                raise Reject("malformed edge replay token", tag)
            a, b, lab = tok[0], tok[1], tok[2]
            if not (0 <= a < b < n) or not 1 <= lab <= r:
                raise Reject("edge replay token out of range", tag)
            if prev is not None and not (a, b) > prev:
                raise Reject("edge replay not in canonical order (repeated edge)", tag)
            prev = (a, b)
            w = tok[3] if self.weighted else 0
            if self.weighted and not 1 <= w <= self.wmax:
                raise Reject("edge replay weight out of range", tag)
            fp_e_r.update(self._ekey(a, b, lab, w))
            if self.weighted:
                self.sess.update(self.sub, (a, b, w), -1)
            else:
                self.sess.update(self.sub, (a, b), -1)
        if not fp_e_r == fp_e:
            raise Reject("edge replay does not match the trees (edge shared or altered)", tag)

        seps = 0
        expect_v = 0
        for tok in sess.receive(f"{tag}/vertices", lambda p: compute(p)[3]):
            if len(tok) != 4:
                raise Reject("malformed vertex replay token", tag)
            v, lab, d, od = tok
            if v != expect_v:
                raise Reject("vertex replay must list 0..n-1 in order", tag)
            expect_v += 1
            if lab == 0:
                if not self.allow_separators:
                    raise Reject("vertex left outside every tree", tag)
                seps += 1
                self._separator(v)
                continue
            if not 1 <= lab <= r or not 0 <= d < n or not 0 <= od < n:
                raise Reject("vertex replay token out of range", tag)
            key = self._key(v, d, lab)
            fp_occ_r.update(key)
            fp_par_r.update(key, od)
        if expect_v != n:
            raise Reject("vertex replay must list 0..n-1 in order", tag)
        if not fp_occ_r == fp_occ:
            raise Reject("vertices repeated or missing across trees", tag)
        if not fp_par_r == fp_par:
            raise Reject("tree edges do not form rooted trees (cycle or detached part)", tag)
        self.result = ForestResult(r, sizes, odd, seps, weight)
        self._fvals = fvals
        return self.result

    def _ekey(self, a, b, k, w):
        n = self.n
        return a + n * (b + n * (k + (n + 1) * w))

    def _label(self, v, k, fvals):
        if self.mx is None:
            return
        if self.maximality == "B":
            for pattern, delta in derive_updates("maximality-b", ("fa", v, fvals[k - 1]), self.n):
                self.sess.update(self.mx, pattern, delta)
        else:
            for pattern, delta in derive_updates("maximality-a", ("label", v, k - 1), self.n):
                self.sess.update(self.mx, pattern, delta)

    def _separator(self, v):
        if self.mx is None:
            return
        if self.maximality == "A":
            for pattern, delta in derive_updates("maximality-a", ("sep", v), self.n):
                self.sess.update(self.mx, pattern, delta)
        # Maximality B leaves separator slots untouched

    def finish(self) -> ForestResult:
        sess, tag = self.sess, self.tag
        if sess.finv(self.sub, [-1], FreqWindow(-1, 1), expect=0) != 0:
            raise Reject("phantom edge: a tree edge is not in the graph", tag)
        if self.maximality in ("forest", "A"):
            window = FreqWindow(-4, 1) if self.maximality == "forest" else FreqWindow(-4, 5)
            if sess.finv(self.mx, [-1], window, expect=0) != 0:
                raise Reject("components not maximal: an edge crosses two components", tag)
        elif self.maximality == "B":
            fvals = self._fvals or []
            if len(fvals) >= 2:
                window, cross = f_support(fvals)
                if sess.finv(self.mx, cross, window, expect=0) != 0:
                    raise Reject("components not maximal: an edge crosses two components", tag)
        return self.result


# ---- protocols --------------------------------------------------------------

def honest_forest(n, edges, weights=None):
    trees, _ = bfs_forest(n, edges)
    return forest_tokens(n, trees, weights=weights)


def disjointedness_check(sess: Session, verifier: ForestVerifier, compute) -> ForestResult:
    return verifier.run(compute)


def count_components(sess: Session) -> int:
    g = sess.stream
    n = g.n
    if n == 0:
        return 0
    fv = ForestVerifier(sess, n, "cc", maximality="forest")
    for up in g.updates:
        fv.edge(up)
    fv.run(lambda p: cached(p, "cc", lambda: honest_forest(n, p.edges)))
    res = fv.finish()
    sess.info["components"] = res.trees
    sess.info["component_sizes"] = res.sizes
    return res.trees


def mst_levels(wmax: int, eps: float):
    """Grid t_i = (1+eps)^i up to the first t_R >= wmax."""
    t = [1.0]
    while t[-1] < wmax * (1 - 1e-12):
        t.append(t[-1] * (1 + eps))
    return t


def snap_level(w: int, t) -> int:
    for i, ti in enumerate(t):
        if ti >= w * (1 - 1e-12):
            return i
    return len(t) - 1


def mst_bound(n: int, t, ccs) -> float:
    """n - t_R + sum_{i<R} (t_{i+1} - t_i) cc(G_i)."""
    R = len(t) - 1
    return n - t[R] + sum((t[i + 1] - t[i]) * ccs[i] for i in range(R))


class MstCheck:
    """Parallel component counts of the threshold graphs G_0..G_R."""

    def __init__(self, sess: Session, n: int, wmax: int, eps: float, tag: str = "mst"):
        self.sess, self.n, self.eps, self.tag = sess, n, eps, tag
        self.t = mst_levels(wmax, eps)
        self.levels = []
        for i in range(len(self.t)):
            fv = ForestVerifier(sess, n, f"{tag}/level{i}", maximality="forest",
                                edge_filter=self._filter(i))
            self.levels.append(fv)

    def _filter(self, i):
        return lambda up: snap_level(up.w, self.t) <= i

    def edge(self, up):
        for fv in self.levels:
            fv.edge(up)

    def run(self) -> float:
        n, t = self.n, self.t
        ccs = []
        for i, fv in enumerate(self.levels):
            def compute(p, i=i):
                sub = [e for e, w in p.edges.items() if snap_level(w, t) <= i]
                return cached(p, (self.tag, i), lambda: honest_forest(n, sub))
            fv.run(compute)
            ccs.append(fv.finish().trees)
        self.ccs = ccs
        if ccs[-1] != 1:
            raise Reject(f"input graph is disconnected (cc = {ccs[-1]})", self.tag)
        return mst_bound(n, t, ccs)


def mst_approx(sess: Session) -> float:
    g = sess.stream
    n = g.n
    eps = float(sess.options.get("epsilon", 0.1))
    if n <= 1:
        return 0.0
    mc = MstCheck(sess, n, g.weight_bound(), eps)
    for up in g.updates:
        if up.w is None:
            raise SetupError("mst needs weighted edges")
        mc.edge(up)
    bound = mc.run()
    sess.info["levels"] = len(mc.t)
    sess.info["level_components"] = mc.ccs
    sess.info["epsilon"] = eps
    return bound


def bipartiteness(sess: Session) -> bool:
    g = sess.stream
    n = g.n
    if n == 0:
        return True
    base = ForestVerifier(sess, n, "cc", maximality="forest")
    cover = ForestVerifier(sess, 2 * n, "cover", maximality="forest")
    from .gstream import StreamUpdate

    for up in g.updates:
        base.edge(up)
        cover.edge(StreamUpdate.make(up.i, up.j + n, None, up.delta))
        cover.edge(StreamUpdate.make(up.i + n, up.j, None, up.delta))

    def lifted(p):
        return [(i, j + n) for i, j in p.edges] + [(i + n, j) for i, j in p.edges]

    base.run(lambda p: cached(p, "cc", lambda: honest_forest(n, p.edges)))
    c1 = base.finish().trees
    cover.run(lambda p: cached(p, "cover", lambda: honest_forest(2 * n, lifted(p))))
    c2 = cover.finish().trees
    sess.info["components"] = c1
    sess.info["double_cover_components"] = c2
    return c2 == 2 * c1


# ---- adversaries ------------------------------------------------------------

def _trees_from(forest):
    trees = []
    for tok in forest:
        if tok[0] == ROOT:
            trees.append((tok[1], []))
        else:
            trees[-1][1].append((tok[1], tok[2], tok[3]))
    return trees


@register_strategy("forest-cycle", ("cc", "bipartite"),
                   "re-hangs a subtree below one of its own descendants, detaching a cycle",
                   kinds=("cc/header", "cc/forest", "cc/edges", "cc/vertices"))
def _forest_cycle(kind, tokens, prover):
    return _forest_rewrite(kind, tokens, prover, _make_cycle)


@register_strategy("duplicate-vertex", ("cc", "bipartite"),
                   "lists a vertex a second time inside another tree",
                   kinds=("cc/header", "cc/forest", "cc/edges", "cc/vertices"))
def _duplicate_vertex(kind, tokens, prover):
    return _forest_rewrite(kind, tokens, prover, _make_duplicate)


@register_strategy("hidden-cross-edge", ("cc", "bipartite", "mcm-general"),
                   "cuts a tree edge and reports the two halves as separate components",
                   kinds=("cc/header", "cc/forest", "cc/edges", "cc/vertices",
                          "tb/header", "tb/forest", "tb/edges", "tb/vertices"))
def _hidden_cross(kind, tokens, prover):
    return _forest_rewrite(kind, tokens, prover, _make_split)


@register_strategy("fingerprint-perturb", ("cc", "bipartite"),
                   "replays one tree edge under a different endpoint",
                   kinds=("cc/edges",))
def _fp_perturb(kind, tokens, prover):
    out = list(tokens)
    n = prover.stream.n
    for idx, t in enumerate(out):
        a, b, lab = t[0], t[1], t[2]
        nxt = out[idx + 1][:2] if idx + 1 < len(out) else (n, n)
        for b2 in range(b + 1, n):
            if (a, b2) < tuple(nxt) and (a, b2) in prover.edges:
                out[idx] = (a, b2, lab) + tuple(t[3:])
                return out
    if out:
        a, b, lab = out[0][:3]
        out[0] = (a, b, lab % max(1, len(out)) + 1) + tuple(out[0][3:])
    return out


def _forest_rewrite(kind, tokens, prover, maker):
    base, part = kind.rsplit("/", 1)
    store = prover.cache.setdefault("tampered", {})
    if base not in store:
        honest = prover.cache.get(base)
        if honest is None:
            return tokens
        n = prover.stream.n
        trees = _trees_from(honest[1])
        seps = [t[0] for t in honest[3] if t[1] == 0]
        new = maker(n, trees, prover)
        store[base] = forest_tokens(n, new, seps) if new is not None else honest
    idx = {"header": 0, "forest": 1, "edges": 2, "vertices": 3}[part]
    return store[base][idx]


def _make_cycle(n, trees, prover):
    # close a non-tree edge (u, v) into a cycle below lca(u, v) and cut that
    # subtree loose; every vertex keeps exactly one parent and edge counts hold
    for t_idx, (root, order) in enumerate(trees):
        parent = {c: p for p, c, _ in order}
        depth = {root: 0}
        depth.update({c: d for _, c, d in order})

        def path_up(x):
            out = [x]
            while x != root:
                x = parent[x]
                out.append(x)
            return out

        for (u, v) in sorted(prover.edges):
            if u not in depth or v not in depth or parent.get(u) == v or parent.get(v) == u:
                continue
            pu, pv = path_up(u), path_up(v)
            common = set(pu) & set(pv)
            top = next(x for x in pu if x in common)
            if top == root:
                continue
            chain = pv[:pv.index(top) + 1][::-1]  # top .. v
            newp = dict(parent)
            for a, b in zip(chain, chain[1:]):
                newp[a] = b
            newp[v] = u
            trees = list(trees)
            trees[t_idx] = (root, [(newp[c], c, depth[c]) for _, c, _ in order])
            return trees
    return None


def _descendants(v, order):
    kids = {}
    for p, c, _ in order:
        kids.setdefault(p, []).append(c)
    out, stack = [], list(kids.get(v, []))
    while stack:
        x = stack.pop()
        out.append(x)
        stack.extend(kids.get(x, []))
    return out


def _make_duplicate(n, trees, prover):
    if len(trees) < 2:
        return None
    # copy the last vertex of tree 0 under the root of tree 1
    root_b, order_b = trees[1]
    x = ([trees[0][0]] + [c for _, c, _ in trees[0][1]])[-1]
    trees = list(trees)
    trees[1] = (root_b, order_b + [(root_b, x, 1)])
    return trees


def _make_split(n, trees, prover):
    for t_idx, (root, order) in enumerate(trees):
        if not order:
            continue
        p, v, d0 = order[-1]
        sub = set([v] + _descendants(v, order))
        keep = [(a, b, d) for a, b, d in order if b not in sub]
        moved = [(a, b, d - d0) for a, b, d in order if b in sub and b != v]
        trees = list(trees)
        trees[t_idx] = (root, keep)
        trees.append((v, moved))
        return trees
    return None
