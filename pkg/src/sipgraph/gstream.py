"""Dynamic graph streams, index universes, derived-update rules, cost meter."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .field import WORD_BITS, DomainError, GridParams


class SetupError(ValueError):
    """Malformed input detected before any protocol message."""


@dataclass(frozen=True)
class StreamUpdate:
    i: int
    j: int
    w: Optional[int]
    delta: int

    @staticmethod
    def make(i: int, j: int, w: Optional[int] = None, delta: int = 1) -> "StreamUpdate":
        if i == j:
            raise SetupError(f"self-loop on vertex {i}")
        if delta not in (1, -1):
            raise SetupError(f"delta must be +1 or -1, got {delta}")
        if i > j:
            i, j = j, i
        return StreamUpdate(i, j, w, delta)


@dataclass
class GraphStream:
    n: int
    updates: list = field(default_factory=list)
    wmax: Optional[int] = None
    x: Optional[list] = None  # set-disjointness inputs
    y: Optional[list] = None
    cert: list = field(default_factory=list)  # typed certificate lines

    def add(self, i, j, w=None, delta=1):
        self.updates.append(StreamUpdate.make(i, j, w, delta))
        return self

    @property
    def weighted(self) -> bool:
        return any(u.w is not None for u in self.updates)

    def weight_bound(self) -> int:
        if self.wmax is not None:
            return self.wmax
        return max((u.w for u in self.updates if u.w is not None), default=1)

    def final_edges(self) -> dict:
        """(i, j) -> weight (1 when unweighted) for edges with net multiplicity 1."""
        mult: dict = {}
        wt: dict = {}
        for u in self.updates:
            if not (0 <= u.i < self.n and 0 <= u.j < self.n):
                raise SetupError(f"vertex out of range in edge ({u.i},{u.j})")
            key = (u.i, u.j)
            if key in wt and u.w is not None and wt[key] != u.w and mult.get(key, 0) > 0:
                raise SetupError(f"edge {key} carries two weights")
            mult[key] = mult.get(key, 0) + u.delta
            if u.w is not None:
                wt[key] = u.w
            if mult[key] not in (0, 1):
                raise SetupError(f"edge {key} reaches multiplicity {mult[key]}")
        return {k: wt.get(k, 1) for k, m in mult.items() if m == 1}

    def validate(self):
        self.final_edges()
        if self.wmax is not None:
            for u in self.updates:
                if u.w is not None and not 1 <= u.w <= self.wmax:
                    raise SetupError(f"weight {u.w} outside [1, {self.wmax}]")
        return self


def graph_from_edges(n: int, edges, wmax: Optional[int] = None) -> GraphStream:
    g = GraphStream(n=n, wmax=wmax)
    if isinstance(edges, dict):
        edges = [(i, j, w) for (i, j), w in edges.items()]
    for e in edges:
        if len(e) == 3:
            g.add(e[0], e[1], e[2])
        else:
            g.add(e[0], e[1])
    return g


# ---- file format ------------------------------------------------------------

def parse_stream(text: str) -> GraphStream:
    n = None
    wmax = None
    ups, cert = [], []
    x = y = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tag, *rest = line.split()
        try:
            if tag == "N":
                n = int(rest[0])
            elif tag == "W":
                wmax = int(rest[0])
            elif tag == "E":
                vals = [int(t) for t in rest]
                if len(vals) == 3:
                    ups.append(StreamUpdate.make(vals[0], vals[1], None, vals[2]))
                elif len(vals) == 4:
                    ups.append(StreamUpdate.make(vals[0], vals[1], vals[2], vals[3]))
                else:
                    raise SetupError("edge line needs 3 or 4 fields")
            elif tag in ("X", "Y"):
                bits = [int(c) for c in "".join(rest)]
                if any(b not in (0, 1) for b in bits):
                    raise SetupError("bit vectors hold 0/1 only")
                if tag == "X":
                    x = bits
                else:
                    y = bits
            elif tag in ("VTX", "EDGE", "CLAW", "ROOT", "SEP"):
                cert.append((tag, *[int(t) for t in rest]))
            else:
                raise SetupError(f"unknown line tag {tag!r}")
        except (IndexError, ValueError) as exc:
            if isinstance(exc, SetupError):
                raise SetupError(f"line {lineno}: {exc}") from None
            raise SetupError(f"line {lineno}: cannot parse {raw!r}") from None
    if n is None:
        ids = [v for u in ups for v in (u.i, u.j)]
        n = max(ids) + 1 if ids else (len(x) if x is not None else 0)
    g = GraphStream(n=n, updates=ups, wmax=wmax, x=x, y=y, cert=cert)
    return g.validate()


def format_stream(g: GraphStream, comment: Optional[str] = None) -> str:
    out = []
    if comment:
        out.append(f"# {comment}")
    out.append(f"N {g.n}")
    if g.wmax is not None:
        out.append(f"W {g.wmax}")
    if g.x is not None:
        out.append("X " + "".join(map(str, g.x)))
    if g.y is not None:
        out.append("Y " + "".join(map(str, g.y)))
    for u in g.updates:
        if u.w is None:
            out.append(f"E {u.i} {u.j} {u.delta}")
        else:
            out.append(f"E {u.i} {u.j} {u.w} {u.delta}")
    for line in g.cert:
        out.append(" ".join(str(t) for t in line))
    return "\n".join(out) + "\n"


# ---- universes --------------------------------------------------------------

def _values(c, size: int) -> np.ndarray:
    if c is None:
        return np.arange(size, dtype=np.int64)
    if isinstance(c, range):
        return np.arange(max(c.start, 0), min(c.stop, size), c.step, dtype=np.int64)
    if isinstance(c, tuple):
        return np.arange(max(c[0], 0), min(c[1], size), dtype=np.int64)
    if isinstance(c, (list, np.ndarray)):
        v = np.asarray(c, dtype=np.int64)
        return v[(v >= 0) & (v < size)]
    c = int(c)
    if not 0 <= c < size:
        raise DomainError(f"coordinate value {c} outside [0, {size})")
    return np.array([c], dtype=np.int64)


class Universe:
    """A product of coordinate ranges, optionally cut down by a predicate.

    Unconstrained universes index tuples by little-endian mixed radix.
    Constrained ones index members by rank in sorted key order.
    """

    CHUNK = 1 << 20

    def __init__(self, name: str, shape: Sequence[int], roles: Sequence[str] = (),
                 predicate: Optional[Callable] = None):
        self.name = name
        self.shape = tuple(int(s) for s in shape)
        self.roles = tuple(roles)
        self.predicate = predicate
        self._radix = [1]
        for s in self.shape[:-1]:
            self._radix.append(self._radix[-1] * s)
        self.members = None
        self._coords = None
        self._postings: dict = {}
        if predicate is not None:
            self.members = self._enumerate_members()
            self.u = int(self.members.size)
        else:
            self.u = int(np.prod(self.shape, dtype=np.int64)) if self.shape else 1

    def _enumerate_members(self) -> np.ndarray:
        # iterate over leading coordinates so each chunk stays small
        k = 0
        rest = int(np.prod(self.shape, dtype=np.int64))
        while k < len(self.shape) and rest > self.CHUNK:
            rest //= self.shape[k]
            k += 1
        keys = []
        for head in itertools.product(*[range(s) for s in self.shape[:k]]):
            pat = list(head) + [None] * (len(self.shape) - k)
            coords = self._grid(pat)
            mask = self.predicate(coords)
            if np.any(mask):
                keys.append(self.encode([c[mask] for c in coords]))
        if not keys:
            return np.zeros(0, dtype=np.int64)
        return np.sort(np.concatenate(keys))

    def _grid(self, pattern) -> list:
        vals = [_values(c, s) for c, s in zip(pattern, self.shape)]
        mesh = np.meshgrid(*vals, indexing="ij")
        return [m.ravel() for m in mesh]

    def encode(self, coords) -> np.ndarray:
        key = np.zeros(np.asarray(coords[0]).shape, dtype=np.int64)
        for c, rad in zip(coords, self._radix):
            key = key + np.asarray(c, dtype=np.int64) * rad
        return key

    def decode(self, idx: np.ndarray) -> list:
        key = self.members[idx] if self.members is not None else np.asarray(idx, dtype=np.int64)
        out = []
        for s in self.shape:
            out.append(key % s)
            key = key // s
        return out

    def index(self, tup: Sequence[int]) -> int:
        for c, s in zip(tup, self.shape):
            if not 0 <= c < s:
                raise DomainError(f"tuple {tuple(tup)} outside universe {self.name}")
        key = int(sum(c * r for c, r in zip(tup, self._radix)))
        if self.members is None:
            return key
        pos = int(np.searchsorted(self.members, key))
        if pos >= self.u or self.members[pos] != key:
            raise DomainError(f"tuple {tuple(tup)} not a member of {self.name}")
        return pos

    def enumerate(self, pattern: Sequence, where: Optional[Callable] = None) -> np.ndarray:
        """Universe indices of every member tuple matching the pattern."""
        if len(pattern) != len(self.shape):
            raise DomainError("pattern arity does not match universe")
        if self.members is not None:
            return self._enumerate_members_matching(pattern, where)
        coords = self._grid(pattern)
        if where is None:
            return self.encode(coords)
        mask = where(coords)
        return self.encode([c[mask] for c in coords])

    def member_coords(self) -> list:
        if self._coords is None:
            self._coords = [c.astype(np.int32) for c in self.decode(np.arange(self.u))]
        return self._coords

    def _posting(self, k: int, val: int) -> np.ndarray:
        key = (k, val)
        if key not in self._postings:
            self._postings[key] = np.nonzero(self.member_coords()[k] == val)[0]
        return self._postings[key]

    def _enumerate_members_matching(self, pattern, where):
        coords = self.member_coords()
        cand = None
        for k, c in enumerate(pattern):
            if isinstance(c, (int, np.integer)):
                if not 0 <= c < self.shape[k]:
                    raise DomainError(f"coordinate value {c} outside [0, {self.shape[k]})")
                post = self._posting(k, int(c))
                if cand is None or post.size < cand.size:
                    cand = post
        if cand is None:
            cand = np.arange(self.u, dtype=np.int64)
        mask = np.ones(cand.size, dtype=bool)
        sub = [c[cand] for c in coords]
        for k, c in enumerate(pattern):
            if c is None:
                continue
            if isinstance(c, (int, np.integer)):
                mask &= sub[k] == c
            elif isinstance(c, range) and c.step == 1 or isinstance(c, tuple):
                lo, hi = (c.start, c.stop) if isinstance(c, range) else c
                mask &= (sub[k] >= lo) & (sub[k] < hi)
            else:
                mask &= np.isin(sub[k], _values(c, self.shape[k]))
        if where is not None:
            mask &= where(sub)
        return cand[mask].astype(np.int64)

    def aligned(self, grid: GridParams) -> bool:
        """True when grid digits coincide with the logical coordinates."""
        return (self.members is None and len(self.shape) == grid.d
                and all(s == grid.ell for s in self.shape))


# ---- derived-update rules ---------------------------------------------------

def triangle_patterns(n: int, i: int, j: int) -> list:
    """Slots (a, b, c), a < b < c, of the triangles that contain edge (i, j)."""
    if i > j:
        i, j = j, i
    return [
        (i, (i + 1, j), j),
        ((0, i), i, j),
        (i, j, (j + 1, n)),
    ]


def pattern_size(pattern, shape) -> int:
    tot = 1
    for c, s in zip(pattern, shape):
        tot *= len(_values(c, s))
    return tot


def derive_updates(protocol: str, token, n: int) -> list:
    """Wildcard patterns with deltas that one token triggers.

    token is a StreamUpdate, or for certificate-driven rules a tuple
    ('vertex', v), ('label', v, k), ('sep', v), ('fa', v, f_value).
    """
    if isinstance(token, StreamUpdate):
        if not (0 <= token.i < n and 0 <= token.j < n):
            raise DomainError("edge endpoint outside [n]")
        if protocol == "triangles":
            return [(p, token.delta) for p in triangle_patterns(n, token.i, token.j)]
        if protocol in ("vertex-cover", "maximality-b", "pairs"):
            return [((token.i, token.j), token.delta)]
        if protocol in ("maximality-a", "forest-maximality"):
            return [((token.i, token.j, None), token.delta)]
        raise DomainError(f"no edge rule for protocol {protocol!r}")
    kind, v, *rest = token
    if not 0 <= v < n:
        raise DomainError("vertex outside [n]")
    if protocol == "vertex-cover" and kind == "vertex":
        return [((v, None), -1), ((None, v), -1)]
    if protocol in ("maximality-a", "forest-maximality") and kind == "label":
        k = rest[0]
        return [((v, None, k), -2), ((None, v, k), -2)]
    if protocol == "maximality-a" and kind == "sep":
        return [((v, None, None), 2), ((None, v, None), 2)]
    if protocol == "maximality-b" and kind == "fa":
        f = rest[0]
        return [((v, None), -f), ((None, v), -f)]
    raise DomainError(f"no rule for token {token!r} in {protocol!r}")


def replay_canonical_check(keys: Iterable) -> tuple:
    """(True, None) when keys strictly increase, else (False, position)."""
    prev = None
    for pos, k in enumerate(keys):
        if prev is not None and not k > prev:
            return False, pos
        prev = k
    return True, None


# ---- cost accounting --------------------------------------------------------

class CostMeter:
    """Peak verifier space and per-direction communication, in bits."""

    def __init__(self):
        self._held: dict = {}
        self._current = 0
        self.verifier_space_bits = 0
        self.comm_bits_p2v = 0
        self.comm_bits_v2p = 0
        self.rounds = 0

    def hold(self, name: str, words: int):
        self._current += words - self._held.get(name, 0)
        self._held[name] = words
        self.verifier_space_bits = max(self.verifier_space_bits, self._current * WORD_BITS)

    def release(self, name: str):
        self._current -= self._held.pop(name, 0)

    def held_words(self) -> int:
        return self._current

    def p2v(self, words: int):
        self.comm_bits_p2v += words * WORD_BITS

    def v2p(self, words: int):
        self.comm_bits_v2p += words * WORD_BITS

    def add_round(self):
        self.rounds += 1

    def as_dict(self) -> dict:
        return {
            "verifier_space_bits": self.verifier_space_bits,
            "comm_bits_p2v": self.comm_bits_p2v,
            "comm_bits_v2p": self.comm_bits_v2p,
            "rounds": self.rounds,
        }
