"""Matching protocols: bipartite MCM and MWM, general MWM with laminar odd-set
duals, general MCM through Tutte-Berge, and the Christofides-style TSP check.

Certificate layouts (integer tuples):

  matching/edges     (i, j[, w]) with i < j, strictly increasing
  matching/vertices  every matched vertex once, strictly increasing
  cover/vertices     cover vertices, strictly increasing
  duals              (v, y_v) for y_v > 0, strictly increasing in v
  claws              (LI, level, r, *boundary) sorted by (LI, level)
  laminar            every claw vertex once, strictly increasing
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .fingerprint import Fingerprint
from .gstream import SetupError, StreamUpdate, Universe, derive_updates
from .session import Reject, Session, register_strategy
from .spanning import ForestVerifier, MstCheck, bfs_forest, cached, f_support, forest_tokens
from .sumcheck import FreqWindow

CM_MAX_CANDIDATES = 60_000_000


def _increasing(tokens, what, stage, key=lambda t: t):
    prev = None
    for t in tokens:
        k = key(t)
        if prev is not None and not k > prev:
            raise Reject(f"{what} not strictly increasing", stage)
        prev = k


# ---- matching certificate ---------------------------------------------------

def matching_tokens(witness, weights=None):
    edges = sorted((min(i, j), max(i, j)) for i, j in witness)
    if weights is None:
        etoks = edges
    else:
        etoks = [(i, j, weights[(i, j)]) for i, j in edges]
    verts = sorted(v for e in edges for v in e)
    return etoks, [(v,) for v in verts]


class MatchingCheck:
    """Edges of the claimed matching lie in E and no two share an endpoint."""

    def __init__(self, sess: Session, n: int, tag: str = "matching", weighted: bool = False,
                 wmax: int = 1, alpha: Optional[int] = None):
        self.sess, self.n, self.tag = sess, n, tag
        self.weighted, self.wmax = weighted, wmax
        nn = max(n, 1)
        shape = (nn, nn, wmax + 1) if weighted else (nn, nn)
        self.sub = f"{tag}/subset"
        sess.open_vector(self.sub, Universe(self.sub, shape, ("i", "j", "w")[:len(shape)]))
        self.alpha = alpha
        self.k = 0
        self.weight = 0

    def _pattern(self, i, j, w):
        return (i, j, w) if self.weighted else (i, j)

    def edge(self, up: StreamUpdate, w=None):
        self.sess.update(self.sub, self._pattern(up.i, up.j, w), up.delta)

    def run(self, compute: Callable):
        """compute(prover) -> (edge tokens, vertex tokens)."""
        sess, n, tag = self.sess, self.n, self.tag
        if self.alpha is None:
            fp_m = sess.fingerprint(f"{tag}/endpoints", max(n, 1))
        else:
            sess.hold(f"fp:{tag}/endpoints", 1)
            fp_m = Fingerprint(self.alpha, max(n, 1))
        sess.hold(f"fp:{tag}/vertices", 1)
        fp_v = Fingerprint(fp_m.alpha, max(n, 1))
        toks = sess.receive(f"{tag}/edges", lambda p: compute(p)[0])
        _increasing(toks, "matching edges", tag, key=lambda t: t[:2])
        for t in toks:
            if len(t) != (3 if self.weighted else 2):
                raise Reject("malformed matching edge", tag)
            i, j = t[0], t[1]
            w = t[2] if self.weighted else None
            if not 0 <= i < j < n or (self.weighted and not 1 <= w <= self.wmax):
                raise Reject("matching edge out of range", tag)
            sess.update(self.sub, self._pattern(i, j, w), -1)
            fp_m.update(i)
            fp_m.update(j)
            self.k += 1
            self.weight += w if self.weighted else 1
        verts = sess.receive(f"{tag}/vertices", lambda p: compute(p)[1])
        _increasing(verts, "matched vertices", tag)
        for t in verts:
            if len(t) != 1 or not 0 <= t[0] < n:
                raise Reject("matched vertex out of range", tag)
            fp_v.update(t[0])
        if len(verts) != 2 * self.k or not fp_v == fp_m:
            raise Reject("shared endpoint in matching", tag)
        self.fp = fp_v
        return self.k

    def finish(self):
        if self.sess.finv(self.sub, [-1], FreqWindow(-1, 1), expect=0) != 0:
            raise Reject("non-edge in matching", self.tag)


class CoverCheck:
    """Every edge has an endpoint in the claimed vertex cover."""

    def __init__(self, sess: Session, n: int, tag: str = "cover"):
        self.sess, self.n, self.tag = sess, n, tag
        nn = max(n, 1)
        self.vec = f"{tag}/edges"
        sess.open_vector(self.vec, Universe(self.vec, (nn, nn), ("i", "j")))
        self.size = 0

    def edge(self, up: StreamUpdate):
        for pattern, delta in derive_updates("vertex-cover", up, self.n):
            self.sess.update(self.vec, pattern, delta)

    def run(self, compute: Callable):
        toks = self.sess.receive(f"{self.tag}/vertices", compute)
        _increasing(toks, "cover vertices", self.tag)
        for t in toks:
            if len(t) != 1 or not 0 <= t[0] < self.n:
                raise Reject("cover vertex out of range", self.tag)
            for pattern, delta in derive_updates("vertex-cover", ("vertex", t[0]), self.n):
                self.sess.update(self.vec, pattern, delta)
            self.size += 1
        return self.size

    def finish(self):
        if self.sess.finv(self.vec, [1], FreqWindow(-2, 1), expect=0) != 0:
            raise Reject("uncovered edge exists", self.tag)


def verify_matching_cert(sess: Session, compute: Callable, weighted=False) -> int:
    """Stand-alone matching certificate check over the session's stream."""
    g = sess.stream
    wmax = g.weight_bound() if weighted else 1
    mc = MatchingCheck(sess, g.n, weighted=weighted, wmax=wmax)
    for up in g.updates:
        mc.edge(up, up.w if weighted else None)
    mc.run(compute)
    mc.finish()
    return mc.k


def verify_vertex_cover(sess: Session, compute: Callable) -> int:
    g = sess.stream
    cc = CoverCheck(sess, g.n)
    for up in g.updates:
        cc.edge(up)
    size = cc.run(compute)
    cc.finish()
    return size


# ---- honest certificates ----------------------------------------------------

def _nx_graph(n, edges):
    import networkx as nx

    G = nx.Graph()
    G.add_nodes_from(range(n))
    for (i, j), w in edges.items():
        G.add_edge(i, j, weight=w)
    return G


def bipartite_cert(n, edges):
    """(matching witness, minimum vertex cover) by Hopcroft-Karp and Konig."""
    import networkx as nx
    from networkx.algorithms import bipartite

    G = _nx_graph(n, edges)
    if not nx.is_bipartite(G):
        raise SetupError("graph is not bipartite")
    colour = bipartite.color(G)
    top = {v for v, c in colour.items() if c == 0}
    mate = bipartite.hopcroft_karp_matching(G, top_nodes=top)
    witness = {(min(a, b), max(a, b)) for a, b in mate.items()}
    cover = bipartite.to_vertex_cover(G, mate, top_nodes=top)
    return sorted(witness), sorted(cover)


def max_weight_witness(n, edges, maxcardinality=False):
    import networkx as nx

    G = _nx_graph(n, edges)
    m = nx.max_weight_matching(G, maxcardinality=maxcardinality)
    return sorted((min(a, b), max(a, b)) for a, b in m)


def bipartite_duals(n, edges, wmax):
    """Integral vertex duals of minimum total with y_i + y_j >= w_ij."""
    from scipy.optimize import Bounds, LinearConstraint, milp

    if not edges:
        return {}
    rows = np.zeros((len(edges), n))
    lo = np.zeros(len(edges))
    for r, ((i, j), w) in enumerate(sorted(edges.items())):
        rows[r, i] = rows[r, j] = 1
        lo[r] = w
    res = milp(np.ones(n), constraints=[LinearConstraint(rows, lo, np.inf)],
               integrality=np.ones(n), bounds=Bounds(np.zeros(n), np.full(n, wmax)))
    if res.x is None:
        raise SetupError("no integral vertex duals found")
    y = np.round(res.x).astype(int)
    return {v: int(y[v]) for v in range(n) if y[v] > 0}


# ---- bipartite protocols ----------------------------------------------------

def mcm_bipartite(sess: Session) -> int:
    g = sess.stream
    n = g.n
    mc = MatchingCheck(sess, n)
    cc = CoverCheck(sess, n)
    for up in g.updates:
        mc.edge(up)
        cc.edge(up)

    def cert(p):
        return cached(p, "bipartite-cert", lambda: bipartite_cert(n, p.edges))

    mc.run(lambda p: matching_tokens(cert(p)[0]))
    cc.run(lambda p: [(v,) for v in cert(p)[1]])
    if cc.size != mc.k:
        raise Reject("cover and matching sizes differ", "cover")
    mc.finish()
    cc.finish()
    sess.info["matching_size"] = mc.k
    return mc.k


def bipartite_dual_universe(n: int, wmax: int) -> Universe:
    nn = max(n, 1)
    return Universe("bipartite-duals", (nn, nn, wmax + 1, wmax + 1, wmax + 1),
                    ("i", "j", "w", "y_i", "y_j"),
                    lambda c: (c[0] < c[1]) & (c[2] >= 1) & (c[2] <= c[3] + c[4]))


def read_duals(sess: Session, tag: str, n: int, wmax: int, compute: Callable) -> list:
    """Vertex duals as a dense list; absent vertices carry zero."""
    toks = sess.receive(tag, compute)
    _increasing(toks, "dual list", tag, key=lambda t: t[0])
    y = [0] * n
    for t in toks:
        if len(t) != 2 or not 0 <= t[0] < n or not 1 <= t[1] <= wmax:
            raise Reject("dual entry out of range", tag)
        y[t[0]] = t[1]
    return y


def mwm_bipartite(sess: Session) -> int:
    g = sess.stream
    n = g.n
    W = g.weight_bound()
    mc = MatchingCheck(sess, n, weighted=True, wmax=W)
    sess.open_vector("duals", bipartite_dual_universe(n, W))
    m = 0
    for up in g.updates:
        w = up.w if up.w is not None else 1
        mc.edge(up, w)
        sess.update("duals", (up.i, up.j, w, None, None), up.delta)
        m += up.delta

    def witness(p):
        return cached(p, "mwm-matching", lambda: max_weight_witness(n, p.edges))

    mc.run(lambda p: matching_tokens(witness(p), p.edges))
    y = read_duals(sess, "duals", n, W, lambda p: sorted(
        cached(p, "bipartite-duals", lambda: bipartite_duals(n, p.edges, W)).items()))
    for v in range(n):
        sess.update("duals", (v, None, None, y[v], None), 1)
        sess.update("duals", (None, v, None, None, y[v]), 1)
    if sum(y) != mc.weight:
        raise Reject("dual cost differs from matching weight", "duals")
    mc.finish()
    if sess.finv("duals", [3], FreqWindow(0, 3), expect=m) != m:
        raise Reject("violated dual constraint exists", "duals")
    sess.info["matching_weight"] = mc.weight
    return mc.weight


# ---- laminar odd-set duals --------------------------------------------------

def cm_dims(n: int) -> tuple:
    """(max claws, max levels per claw) for odd sets of size >= 3 over [n]."""
    return max(1, n // 3), max(1, (n - 1) // 2)


@lru_cache(maxsize=8)
def cm_universe(n: int, wmax: int) -> Universe:
    """Tuples (i, j, w, y_i, y_j, LI, l_i, l_j, r).

    Outside-claw tuples have LI = l_i = l_j = r = 0 and y_i + y_j >= w.
    In-claw tuples have all four >= 1 and y_i + y_j < w <= y_i + y_j + r.
    """
    L, D = cm_dims(n)
    nn = max(n, 1)
    shape = (nn, nn, wmax + 1, wmax + 1, wmax + 1, L + 1, D + 1, D + 1, wmax + 1)
    if int(np.prod(shape, dtype=np.int64)) > CM_MAX_CANDIDATES:
        raise SetupError(f"n={n}, W={wmax} is too large for the laminar dual universe")

    def member(c):
        i, j, w, y, y2, li, l1, l2, r = c
        s = y + y2
        outside = (li == 0) & (l1 == 0) & (l2 == 0) & (r == 0) & (s >= w)
        inside = (li >= 1) & (l1 >= 1) & (l2 >= 1) & (r >= 1) & (s < w) & (w <= s + r)
        return (i < j) & (w >= 1) & (outside | inside)

    return Universe(f"laminar-duals[{n},{wmax}]", shape,
                    ("i", "j", "w", "y_i", "y_j", "LI", "l_i", "l_j", "r"), member)


_ANY4 = (None, None, None, None)


def cm_edge_updates(i, j, w, delta):
    return [((i, j, w, None, None) + _ANY4, delta, None)]


def cm_dual_updates(v, y, n):
    L, _ = cm_dims(n)
    claws = (1, L + 1)
    return [
        ((v, None, None, y, None, claws, None, None, None), 1, None),
        ((None, v, None, None, y, claws, None, None, None), 1, None),
        ((v, None, None, y, None, 0, 0, 0, 0), 2, None),
        ((None, v, None, None, y, 0, 0, 0, 0), 2, None),
    ]


def cm_claw_updates(v, li, level, r):
    # as smaller endpoint the tuple's r must be ours unless the partner sits
    # strictly shallower; as larger endpoint unless the partner is no deeper
    return [
        ((v, None, None, None, None, li, level, None, None), 1,
         lambda c: (c[7] < level) | (c[8] == r)),
        ((None, v, None, None, None, li, None, level, None), 1,
         lambda c: (c[6] <= level) | (c[8] == r)),
    ]


def cm_outside_updates(v):
    return [((v, None) + (None,) * 7, -1, None), ((None, v) + (None,) * 7, -1, None)]


def cm_shadow(n, wmax, edges, y, claws, outside=()):
    """Dense frequency vector built from the same update rules the verifier uses.

    edges: {(i, j): w}; y: {v: y_v}; claws: [(LI, level, r, boundary)].
    Returns (universe, frequencies).
    """
    U = cm_universe(n, wmax)
    a = np.zeros(U.u, dtype=np.int64)

    def apply(plan):
        for pattern, delta, where in plan:
            np.add.at(a, U.enumerate(pattern, where), delta)

    for (i, j), w in edges.items():
        apply(cm_edge_updates(i, j, w, 1))
    for v in range(n):
        apply(cm_dual_updates(v, y.get(v, 0), n))
    for li, level, r, boundary in claws:
        for v in boundary:
            apply(cm_claw_updates(v, li, level, r))
    for v in outside:
        apply(cm_outside_updates(v))
    return U, a


def cm_edge_fives(n, wmax, edges, y, claws):
    """For each edge, how many of its tuples reach frequency 5."""
    U, a = cm_shadow(n, wmax, edges, y, claws)
    out = {}
    for (i, j), w in edges.items():
        idx = U.enumerate((i, j, w, None, None) + _ANY4)
        out[(i, j)] = int(np.sum(a[idx] == 5))
    return out


def cm_satisfied(edges, y, claws):
    """Edges whose dual constraint y_i + y_j + sum z_U >= w holds."""
    where = {}
    for li, level, r, boundary in claws:
        for v in boundary:
            where[v] = (li, level, r)
    out = {}
    for (i, j), w in edges.items():
        extra = 0
        if i in where and j in where and where[i][0] == where[j][0]:
            extra = where[i][2] if where[i][1] <= where[j][1] else where[j][2]
        out[(i, j)] = y.get(i, 0) + y.get(j, 0) + extra >= w
    return out


class CmCheck:
    """Verifies laminar odd-set duals against every edge of the stream."""

    def __init__(self, sess: Session, n: int, wmax: int, tag: str = "cm",
                 alpha: Optional[int] = None):
        self.sess, self.n, self.wmax, self.tag = sess, n, wmax, tag
        self.L, self.D = cm_dims(n)
        self.vec = f"{tag}/constraints"
        sess.open_vector(self.vec, cm_universe(n, wmax))
        self.alpha = alpha
        self.m = 0

    def _apply(self, plan):
        for pattern, delta, where in plan:
            self.sess.update(self.vec, pattern, delta, where)

    def edge(self, i, j, w, delta):
        self._apply(cm_edge_updates(i, j, w, delta))
        self.m += delta

    def outside(self, v):
        self._apply(cm_outside_updates(v))

    def run(self, duals: Callable, claws: Callable, laminar: Callable) -> int:
        sess, n, tag = self.sess, self.n, self.tag
        y = read_duals(sess, f"{tag}/duals", n, self.wmax, duals)
        for v in range(n):
            self._apply(cm_dual_updates(v, y[v], n))
        self.sum_y = sum(y)

        if self.alpha is None:
            fp_c = sess.fingerprint(f"{tag}/claw-vertices", max(n, 1))
        else:
            sess.hold(f"fp:{tag}/claw-vertices", 1)
            fp_c = Fingerprint(self.alpha, max(n, 1))
        sess.hold(f"{tag}/claw-state", 6)
        sigma_r = sigma_max = 0
        prev = None  # (LI, level, r, |boundary|)

        def close(prev):
            nonlocal sigma_max
            if prev is None:
                return
            if prev[3] % 2 != 1:
                raise Reject("non-odd set: deepest boundary of a claw has even size", tag)
            sigma_max += prev[2]

        for t in sess.receive(f"{tag}/claws", claws):
            if len(t) < 3:
                raise Reject("malformed claw token", tag)
            li, level, r, boundary = t[0], t[1], t[2], t[3:]
            if not (1 <= li <= self.L and 1 <= level <= self.D and 1 <= r <= self.wmax):
                raise Reject("claw token out of range", tag)
            if prev is not None and li == prev[0]:
                if level != prev[1] + 1:
                    raise Reject("claw levels not consecutive", tag)
                if r < prev[2]:
                    raise Reject("r_U not monotone", tag)
                if prev[3] % 2:
                    raise Reject("non-odd set: inner boundary of a claw has odd size", tag)
            else:
                if prev is not None and li <= prev[0]:
                    raise Reject("claws not sorted", tag)
                if level != 1:
                    raise Reject("claw must start at level 1", tag)
                close(prev)
            for v in boundary:
                if not 0 <= v < n:
                    raise Reject("claw vertex out of range", tag)
                fp_c.update(v)
                sigma_r += r
                self._apply(cm_claw_updates(v, li, level, r))
            prev = (li, level, r, len(boundary))
        close(prev)

        sess.hold(f"fp:{tag}/laminar", 1)
        fp_l = Fingerprint(fp_c.alpha, max(n, 1))
        toks = sess.receive(f"{tag}/laminar", laminar)
        _increasing(toks, "laminar vertex replay", tag)
        for t in toks:
            if len(t) != 1 or not 0 <= t[0] < n:
                raise Reject("laminar vertex out of range", tag)
            fp_l.update(t[0])
        if not fp_l == fp_c:
            raise Reject("non-laminar family: a vertex sits in two claws", tag)
        self.fp_claws = fp_c
        twice = 2 * self.sum_y + sigma_r - sigma_max
        if twice % 2:
            raise Reject("dual cost is not integral", tag)
        self.sigma_r, self.sigma_max = sigma_r, sigma_max
        self.cost = twice // 2
        return self.cost

    def finish(self, expect: int, window: FreqWindow = FreqWindow(0, 5)):
        got = self.sess.finv(self.vec, [5], window, expect=expect)
        if got != expect:
            raise Reject(f"dual constraint violated ({got} of {expect} edges certified)", self.tag)


def cert_from_lines(lines):
    """(y, claws) from VTX / CLAW certificate lines, or None if there are none."""
    y, claws = {}, []
    found = False
    for line in lines:
        if line[0] == "VTX":
            y[line[1]] = line[2]
            found = True
        elif line[0] == "CLAW":
            claws.append((line[1], line[2], line[3], list(line[4:])))
            found = True
    return (y, sorted(claws)) if found else None


def cm_tokens(y, claws):
    duals = sorted((v, yv) for v, yv in y.items() if yv > 0)
    ctoks = [(li, level, r, *sorted(b)) for li, level, r, b in sorted(claws, key=lambda c: c[:2])]
    lam = sorted((v,) for c in claws for v in c[3])
    return duals, ctoks, lam


def honest_cm_cert(n, edges, wmax, lines=()):
    from .oracles import oracle_cm_duals

    fixed = cert_from_lines(lines)
    if fixed is not None:
        return fixed
    found = oracle_cm_duals((n, edges), wmax)
    if found is None:
        raise SetupError("no chain-laminar dual certificate exists for this instance")
    return found


def mwm_general(sess: Session) -> int:
    g = sess.stream
    n = g.n
    W = g.weight_bound()
    mc = MatchingCheck(sess, n, weighted=True, wmax=W)
    cm = CmCheck(sess, n, W)
    for up in g.updates:
        w = up.w if up.w is not None else 1
        mc.edge(up, w)
        cm.edge(up.i, up.j, w, up.delta)

    def cert(p):
        return cached(p, "cm-cert", lambda: cm_tokens(*honest_cm_cert(n, p.edges, W, p.stream.cert)))

    mc.run(lambda p: matching_tokens(
        cached(p, "mwm-matching", lambda: max_weight_witness(n, p.edges)), p.edges))
    cost = cm.run(lambda p: cert(p)[0], lambda p: cert(p)[1], lambda p: cert(p)[2])
    if cost != mc.weight:
        raise Reject(f"dual cost {cost} differs from matching weight {mc.weight}", "cm")
    mc.finish()
    cm.finish(cm.m)
    sess.info.update(matching_weight=mc.weight, sigma_y=cm.sum_y, sigma_r=cm.sigma_r,
                     sigma_max=cm.sigma_max)
    return mc.weight


# ---- 3-AP-free label values -------------------------------------------------

def _family_size(k, d):
    return math.factorial(k) // math.factorial(k // d) ** d


def choose_dk(r: int) -> tuple:
    """Smallest k, then d, with d | k, d > 2 and a family of at least 5r values."""
    k = 3
    while True:
        for d in range(3, k + 1):
            if k % d == 0 and _family_size(k, d) >= 5 * r:
                return d, k
        k += 1


def _next_permutation(a: list) -> bool:
    i = len(a) - 2
    while i >= 0 and a[i] >= a[i + 1]:
        i -= 1
    if i < 0:
        return False
    j = len(a) - 1
    while a[j] <= a[i]:
        j -= 1
    a[i], a[j] = a[j], a[i]
    a[i + 1:] = reversed(a[i + 1:])
    return True


def digit_family(d: int, k: int, count: int) -> list:
    """The `count` smallest values sum_i a_i (2d-1)^(i-1) over digit vectors
    using each of 0..d-1 exactly k/d times."""
    base = 2 * d - 1
    # most significant digit first, so lexicographic order is numeric order
    digits = sorted(list(range(d)) * (k // d))
    out = []
    while len(out) < count:
        out.append(sum(a * base ** i for i, a in enumerate(reversed(digits))))
        if not _next_permutation(digits):
            break
    return out


def generate_f_a(r: int) -> list:
    """r increasing 3-AP-free positive values, all congruent to 2 mod 5."""
    if r <= 0:
        return []
    d, k = choose_dk(r)
    vals = digit_family(d, k, 5 * r)
    classes = [[v for v in vals if v % 5 == j] for j in range(5)]
    j = max(range(5), key=lambda c: (len(classes[c]), -c))
    return [v + 2 - j for v in classes[j][:r]]


def x_a(fvals) -> list:
    return sorted({1 - a - b for x, a in enumerate(fvals) for y, b in enumerate(fvals) if x != y})


# ---- Tutte-Berge ------------------------------------------------------------

def tutte_berge_cert(n, edges):
    from .oracles import oracle_tutte_berge

    _, sep = oracle_tutte_berge((n, edges))
    trees, _ = bfs_forest(n, edges, skip=sep)
    return forest_tokens(n, trees, separators=sep)


def mcm_general_tutte_berge(sess: Session, maximality_variant: Optional[str] = None) -> int:
    g = sess.stream
    n = g.n
    variant = (maximality_variant or sess.options.get("maximality", "A")).upper()
    if variant not in ("A", "B"):
        raise SetupError("maximality variant must be A or B")
    if n == 0:
        return 0
    mc = MatchingCheck(sess, n)
    fv = ForestVerifier(sess, n, "tb", maximality=variant, allow_separators=True)
    for up in g.updates:
        mc.edge(up)
        fv.edge(up)

    from .oracles import oracle_mcm

    mc.run(lambda p: matching_tokens(cached(p, "mcm", lambda: oracle_mcm((n, p.edges))[1])))
    res = fv.run(lambda p: cached(p, "tb", lambda: tutte_berge_cert(n, p.edges)),
                 fvals_for=generate_f_a if variant == "B" else None)
    twice = n + res.separators - res.odd_components
    if twice % 2 or twice // 2 != mc.k:
        raise Reject(f"bounds do not meet: matching {mc.k}, Tutte-Berge bound {twice / 2:g}", "tb")
    mc.finish()
    fv.finish()
    sess.info.update(matching_size=mc.k, separator_size=res.separators,
                     odd_components=res.odd_components, maximality=variant)
    return mc.k


def mcm_general(sess: Session) -> int:
    return mcm_general_tutte_berge(sess)


def _read_labels(sess: Session, n: int, compute: Callable, tag: str) -> list:
    toks = sess.receive(f"{tag}/labels", compute)
    if [t[0] for t in toks] != list(range(n)) or any(len(t) != 2 for t in toks):
        raise Reject("label list must give (v, label) for v = 0..n-1", tag)
    return [t[1] for t in toks]


def maximality_a(sess: Session, labels: Callable) -> bool:
    """No stream edge joins two differently labelled parts.

    labels(prover) -> [(v, k)] with k >= 1 a part and 0 meaning outside every part.
    """
    g, n = sess.stream, sess.stream.n
    nn = max(n, 1)
    sess.open_vector("maxa", Universe("maxa", (nn, nn, nn), ("i", "j", "label")))
    for up in g.updates:
        for pattern, delta in derive_updates("maximality-a", up, n):
            sess.update("maxa", pattern, delta)
    for v, k in enumerate(_read_labels(sess, n, labels, "maxa")):
        if not 0 <= k <= n:
            raise Reject("label out of range", "maxa")
        token = ("sep", v) if k == 0 else ("label", v, k - 1)
        for pattern, delta in derive_updates("maximality-a", token, n):
            sess.update("maxa", pattern, delta)
    if sess.finv("maxa", [-1], FreqWindow(-4, 5), expect=0) != 0:
        raise Reject("cross-component edge present", "maxa")
    return True


def maximality_b(sess: Session, labels: Callable) -> bool:
    """Same verdict as maximality_a on a pair universe, using 3-AP-free offsets."""
    g, n = sess.stream, sess.stream.n
    nn = max(n, 1)
    sess.open_vector("maxb", Universe("maxb", (nn, nn), ("i", "j")))
    for up in g.updates:
        for pattern, delta in derive_updates("maximality-b", up, n):
            sess.update("maxb", pattern, delta)
    labs = _read_labels(sess, n, labels, "maxb")
    if any(not 0 <= k <= n for k in labs):
        raise Reject("label out of range", "maxb")
    r = max(labs, default=0)
    fvals = generate_f_a(r)
    for v, k in enumerate(labs):
        if k:
            for pattern, delta in derive_updates("maximality-b", ("fa", v, fvals[k - 1]), n):
                sess.update("maxb", pattern, delta)
    if r >= 2:
        window, cross = f_support(fvals)
        if sess.finv("maxb", cross, window, expect=0) != 0:
            raise Reject("cross-component edge present", "maxb")
    return True


# ---- TSP --------------------------------------------------------------------

def tsp_cert(n, edges, W):
    """Honest certificate parts for the TSP check (all ids in [n])."""
    import networkx as nx

    from .oracles import oracle_cm_duals

    G = _nx_graph(n, edges)
    T = nx.minimum_spanning_tree(G, algorithm="kruskal")
    tedges = {(min(a, b), max(a, b)): edges[(min(a, b), max(a, b))] for a, b in T.edges()}
    trees, _ = bfs_forest(n, tedges)
    forest = forest_tokens(n, trees, weights=tedges)
    deg = [0] * n
    for a, b in tedges:
        deg[a] += 1
        deg[b] += 1
    odd = [v for v in range(n) if deg[v] % 2]
    pos = {v: k for k, v in enumerate(odd)}
    flipped = {(pos[a], pos[b]): W + 1 - w for (a, b), w in edges.items() if a in pos and b in pos}
    wit = max_weight_witness(len(odd), flipped, maxcardinality=True)
    matching = [(odd[a], odd[b]) for a, b in wit]
    found = oracle_cm_duals((len(odd), flipped), W)
    if found is None:
        raise SetupError("no chain-laminar dual certificate for the odd-vertex matching")
    y, claws = found
    y = {odd[v]: yv for v, yv in y.items()}
    claws = [(li, lvl, r, [odd[v] for v in b]) for li, lvl, r, b in claws]
    in_claws = {v for c in claws for v in c[3]}
    return {
        "forest": forest,
        "degrees": [(v, deg[v]) for v in range(n)],
        "matching": matching_tokens(matching, edges),
        "cm": cm_tokens(y, claws),
        "odd-rest": [(v,) for v in odd if v not in in_claws],
        "outside": [(v,) for v in range(n) if deg[v] % 2 == 0],
    }


def tsp_verify(sess: Session) -> float:
    g = sess.stream
    n = g.n
    W = g.weight_bound()
    eps = float(sess.options.get("epsilon", 0.1))
    if n <= 1:
        return 0
    edges_seen = 0
    mst = MstCheck(sess, n, W, eps, tag="tsp/mst")
    tree = ForestVerifier(sess, n, "tsp/tree", weighted=True, wmax=W)
    vset = sess.fingerprint("tsp/vertex-sets", n)
    alpha = vset.alpha
    mc = MatchingCheck(sess, n, "tsp/matching", weighted=True, wmax=W, alpha=alpha)
    cm = CmCheck(sess, n, W, "tsp/cm", alpha=alpha)
    for up in g.updates:
        if up.w is None:
            raise SetupError("tsp needs a weighted complete graph")
        mst.edge(up)
        tree.edge(up, up.w)
        mc.edge(up, up.w)
        cm.edge(up.i, up.j, W + 1 - up.w, up.delta)
        edges_seen += up.delta
    if edges_seen != n * (n - 1) // 2:
        raise SetupError("tsp needs a complete graph")

    def part(name):
        return lambda p: cached(p, "tsp", lambda: tsp_cert(n, p.edges, W))[name]

    bound = mst.run()
    fp_deg = sess.fingerprint("tsp/degrees", n)
    res = tree.run(part("forest"),
                   on_edge=lambda a, b, w: (fp_deg.update(a), fp_deg.update(b)))
    if res.trees != 1:
        raise Reject("the tree certificate must be one spanning tree", "tsp/tree")
    if res.weight > bound + 1e-9:
        raise Reject(f"tree weight {res.weight} exceeds the verified bound {bound:.4f}", "tsp/tree")

    sess.hold("tsp/degree-replay", 5)
    fp_deg_r = Fingerprint(fp_deg.alpha, n)
    fp_odd = Fingerprint(alpha, n)
    fp_all = Fingerprint(alpha, n)
    odd = 0
    toks = sess.receive("tsp/degrees", part("degrees"))
    if [t[0] for t in toks] != list(range(n)) or any(len(t) != 2 for t in toks):
        raise Reject("degree replay must list (v, deg) for v = 0..n-1", "tsp/degrees")
    for v, dg in toks:
        if not 1 <= dg < n:
            raise Reject("degree out of range", "tsp/degrees")
        fp_deg_r.update(v, dg)
        fp_all.update(v)
        if dg % 2:
            fp_odd.update(v)
            odd += 1
    if not fp_deg_r == fp_deg:
        raise Reject("degree replay disagrees with the tree", "tsp/degrees")
    if odd % 2:
        raise Reject("odd number of odd-degree vertices", "tsp/degrees")
    sess.info["odd_vertices"] = odd

    k = mc.run(lambda p: part("matching")(p))
    if 2 * k != odd or not mc.fp == fp_odd:
        raise Reject("matching is not perfect on the odd-degree vertices", "tsp/matching")

    cost = cm.run(lambda p: part("cm")(p)[0], lambda p: part("cm")(p)[1],
                  lambda p: part("cm")(p)[2])
    rest = sess.receive("tsp/odd-rest", part("odd-rest"))
    _increasing(rest, "odd-vertex remainder", "tsp/cm")
    fp_in = Fingerprint(alpha, n, cm.fp_claws.acc)
    for t in rest:
        if len(t) != 1 or not 0 <= t[0] < n:
            raise Reject("vertex out of range", "tsp/cm")
        fp_in.update(t[0])
    if not fp_in == fp_odd:
        raise Reject("odd sets use vertices outside the odd-degree set", "tsp/cm")

    outside = sess.receive("tsp/outside", part("outside"))
    _increasing(outside, "even-degree vertex list", "tsp/cm")
    fp_out = Fingerprint(alpha, n, fp_odd.acc)
    for t in outside:
        if len(t) != 1 or not 0 <= t[0] < n:
            raise Reject("vertex out of range", "tsp/cm")
        fp_out.update(t[0])
        cm.outside(t[0])
    if not fp_out == fp_all:
        raise Reject("even-degree list is not the complement of the odd set", "tsp/cm")

    if cost != k * (W + 1) - mc.weight:
        raise Reject("dual cost does not certify a minimum perfect matching", "tsp/cm")
    mc.finish()
    cm.finish(odd * (odd - 1) // 2, FreqWindow(-2, 5))
    total = res.weight + mc.weight
    sess.info.update(mst_bound=bound, tree_weight=res.weight, matching_weight=mc.weight,
                     tour_bound=total, epsilon=eps)
    return total


# ---- adversaries ------------------------------------------------------------

def _pick_fake_edge(prover, matched):
    n = prover.stream.n
    free = [v for v in range(n) if v not in matched]
    for a in free:
        for b in free:
            if a < b and (a, b) not in prover.edges:
                return (a, b)
    return None


@register_strategy("fake-matching-edge", ("mcm-bipartite", "mcm-general", "matching"),
                   "adds a non-edge between two unmatched vertices to the matching",
                   kinds=("matching/edges", "matching/vertices"))
def _fake_matching_edge(kind, tokens, prover):
    st = prover.cache.setdefault("fake-edge", {})
    if kind == "matching/edges":
        matched = {v for t in tokens for v in t[:2]}
        st["e"] = _pick_fake_edge(prover, matched)
        if st["e"] is None:
            return tokens
        weighted = bool(tokens) and len(tokens[0]) == 3
        return sorted(list(tokens) + [st["e"] + ((1,) if weighted else ())])
    if st.get("e") is None:
        return tokens
    return sorted(list(tokens) + [(st["e"][0],), (st["e"][1],)])


@register_strategy("cover-missing-edge", ("mcm-bipartite",),
                   "swaps one cover vertex for a vertex outside the cover, leaving an edge uncovered",
                   kinds=("cover/vertices",))
def _cover_missing(kind, tokens, prover):
    cover = [t[0] for t in tokens]
    if not cover:
        return tokens
    cs = set(cover)
    # drop a cover vertex with an edge to a non-cover vertex x, add a spare other than x
    for (a, b) in sorted(prover.edges):
        for c, x in ((a, b), (b, a)):
            if c in cs and x not in cs:
                spare = next((v for v in range(prover.stream.n) if v not in cs and v != x), None)
                kept = [(v,) for v in cover if v != c]
                return sorted(kept + ([(spare,)] if spare is not None else []))
    return tokens[1:]


def _mate(prover, v):
    for a, b in prover.cache.get("mwm-matching", []):
        if v in (a, b):
            return b if v == a else a
    return None


@register_strategy("wrong-duals", ("mwm-bipartite", "mwm-general"),
                   "moves one unit of dual weight off a matched vertex, keeping the dual total",
                   kinds=("duals", "cm/duals"))
def _wrong_duals(kind, tokens, prover):
    y = {t[0]: t[1] for t in tokens}
    if not y:
        return tokens
    W = prover.stream.weight_bound()
    a = min(y)
    for b in range(prover.stream.n):
        if b != a and b != _mate(prover, a) and y.get(b, 0) < W:
            y[a] -= 1
            y[b] = y.get(b, 0) + 1
            return sorted((v, yv) for v, yv in y.items() if yv > 0)
    return tokens


@register_strategy("non-laminar-claw", ("mwm-general",),
                   "opens an extra one-vertex claw on a vertex already inside another claw",
                   kinds=("cm/claws",))
def _non_laminar(kind, tokens, prover):
    if not tokens:
        return tokens
    last = tokens[-1][0]
    return list(tokens) + [(last + 1, 1, 1, tokens[0][3])]


@register_strategy("non-odd-set", ("mwm-general",),
                   "drops one vertex from the innermost set of a claw, making it even",
                   kinds=("cm/claws", "cm/laminar"))
def _non_odd(kind, tokens, prover):
    st = prover.cache.setdefault("non-odd", {})
    if kind == "cm/claws":
        if not tokens:
            return tokens
        # innermost level of the first claw
        idx = max(k for k, t in enumerate(tokens) if t[0] == tokens[0][0])
        t = tokens[idx]
        st["v"] = t[3]
        out = list(tokens)
        out[idx] = t[:3] + t[4:]
        return out
    if "v" not in st:
        return tokens
    return [t for t in tokens if t[0] != st["v"]]


@register_strategy("wrong-sigma-r", ("mwm-general",),
                   "raises r on the innermost level of a claw, inflating the dual cost",
                   kinds=("cm/claws",))
def _wrong_sigma_r(kind, tokens, prover):
    if not tokens:
        return tokens
    idx = max(k for k, t in enumerate(tokens) if t[0] == tokens[0][0])
    t = tokens[idx]
    out = list(tokens)
    out[idx] = (t[0], t[1], t[2] + 1) + t[3:]
    return out


@register_strategy("odd-set-lie", ("tsp",),
                   "moves one unit of degree between two vertices in the degree replay",
                   kinds=("tsp/degrees",))
def _odd_set_lie(kind, tokens, prover):
    out = [list(t) for t in tokens]
    src = next((k for k, t in enumerate(out) if t[1] > 1), None)
    if src is None:
        return tokens
    dst = 0 if src != 0 else 1
    out[src][1] -= 1
    out[dst][1] += 1
    return [tuple(t) for t in out]
