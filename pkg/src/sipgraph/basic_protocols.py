"""Triangle counting and set disjointness."""
from __future__ import annotations

from .gstream import SetupError, Universe, derive_updates
from .session import Reject, Session
from .sumcheck import FreqWindow


def triangle_universe(n: int) -> Universe:
    # slots (a, b, c) with a < b < c, embedded in the full cube so that each
    # coordinate lines up with one grid digit when ell = n
    side = max(n, 2)
    return Universe("triangles", (side, side, side), ("a", "b", "c"))


def count_triangles(sess: Session) -> int:
    g = sess.stream
    n = g.n
    sess.open_vector("triangles", triangle_universe(n))
    for up in g.updates:
        for pattern, delta in derive_updates("triangles", up, n):
            sess.update("triangles", pattern, delta)
    count = sess.finv("triangles", [3], FreqWindow(0, 3))
    sess.info["triangles"] = count
    return count


def disjointness(sess: Session) -> bool:
    g = sess.stream
    if g.x is None or g.y is None:
        raise SetupError("disjointness needs X and Y bit vectors")
    if len(g.x) != len(g.y):
        raise SetupError("X and Y have different lengths")
    n = len(g.x)
    sess.open_vector("disj", Universe("disj", (max(n, 1),), ("index",)))
    for bits in (g.x, g.y):
        for i, b in enumerate(bits):
            if b:
                sess.update("disj", (i,), 1)
    common = sess.finv("disj", [2], FreqWindow(0, 2))
    sess.info["intersection_size"] = common
    return common == 0


__all__ = ["count_triangles", "disjointness", "triangle_universe", "Reject"]
