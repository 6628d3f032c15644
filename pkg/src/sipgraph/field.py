"""Arithmetic over the Mersenne prime field and low-degree-extension sketches.

Scalars are plain Python ints in [0, P).  Bulk work (prover folds, verifier
enumerated updates) runs on numpy uint64 arrays through `mulmod`.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Iterable, Mapping, Sequence

import numpy as np

P = (1 << 61) - 1
WORD_BITS = 61  # ceil(log2 P): every field element or counter costs one word

_LO32 = np.uint64(0xFFFFFFFF)
_MASK29 = np.uint64((1 << 29) - 1)
_PU = np.uint64(P)


class DomainError(ValueError):
    pass


def norm(x: int) -> int:
    return x % P


def inv(x: int) -> int:
    x %= P
    if x == 0:
        raise ZeroDivisionError("zero has no inverse in F_p")
    return pow(x, P - 2, P)


def signed(x: int) -> int:
    """Map a field element back to the nearest signed integer."""
    x %= P
    return x - P if x > P // 2 else x


class FieldElem:
    """Thin value wrapper; protocol code mostly uses bare ints."""

    __slots__ = ("value",)

    def __init__(self, value: int):
        self.value = value % P

    def __add__(self, o):
        return FieldElem(self.value + _v(o))

    __radd__ = __add__

    def __sub__(self, o):
        return FieldElem(self.value - _v(o))

    def __rsub__(self, o):
        return FieldElem(_v(o) - self.value)

    def __mul__(self, o):
        return FieldElem(self.value * _v(o))

    __rmul__ = __mul__

    def __truediv__(self, o):
        return FieldElem(self.value * inv(_v(o)))

    def __neg__(self):
        return FieldElem(-self.value)

    def __pow__(self, e: int):
        return FieldElem(pow(self.value, e, P))

    def __eq__(self, o):
        if isinstance(o, (FieldElem, int)):
            return self.value == _v(o) % P
        return NotImplemented

    def __hash__(self):
        return hash(self.value)

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"FieldElem({self.value})"


def _v(o) -> int:
    return o.value if isinstance(o, FieldElem) else int(o)


# ---- vectorised arithmetic -------------------------------------------------

def to_field_array(a) -> np.ndarray:
    """Signed int64 array -> uint64 residues."""
    a = np.asarray(a, dtype=np.int64)
    return np.mod(a, P).astype(np.uint64)


def _fold(s: np.ndarray) -> np.ndarray:
    s = (s & _PU) + (s >> np.uint64(61))
    return np.where(s >= _PU, s - _PU, s)


def mulmod(a, b) -> np.ndarray:
    """Elementwise a*b mod P for uint64 inputs already reduced below P.

    Splits into 32-bit limbs; uses 2^61 = 1 and 2^64 = 8 (mod P).
    """
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    ah, al = a >> np.uint64(32), a & _LO32
    bh, bl = b >> np.uint64(32), b & _LO32
    hh = (ah * bh) << np.uint64(3)
    mid = ah * bl + al * bh
    mid = (mid >> np.uint64(29)) + ((mid & _MASK29) << np.uint64(32))
    lo = al * bl
    lo = (lo >> np.uint64(61)) + (lo & _PU)
    return _fold(hh + mid + lo)


def addmod(a, b) -> np.ndarray:
    s = np.asarray(a, dtype=np.uint64) + np.asarray(b, dtype=np.uint64)
    return np.where(s >= _PU, s - _PU, s)


def sum_mod(a, axis=None):
    """Sum of residues mod P without uint64 overflow."""
    a = np.asarray(a, dtype=np.uint64)
    hi = (a >> np.uint64(32)).sum(axis=axis, dtype=np.uint64)
    lo = (a & _LO32).sum(axis=axis, dtype=np.uint64)
    if axis is None:
        return ((int(hi) << 32) + int(lo)) % P
    return addmod(mulmod(_fold(hi), np.uint64(1 << 32)), _fold(lo))


_LIMB = 21
_LIMB_MASK = (1 << _LIMB) - 1


def _limbs(x: np.ndarray):
    x = x.astype(np.int64)
    return [x & _LIMB_MASK, (x >> _LIMB) & _LIMB_MASK, x >> (2 * _LIMB)]


def matmul_mod(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """(A @ B) mod P for uint64 residue matrices with inner dim < 2^20."""
    A = np.asarray(A, dtype=np.uint64)
    B = np.asarray(B, dtype=np.uint64)
    la, lb = _limbs(A), _limbs(B)
    out = np.zeros((A.shape[0], B.shape[1]), dtype=np.uint64)
    for s in range(5):
        acc = None
        for i in range(3):
            k = s - i
            if 0 <= k < 3:
                t = la[i] @ lb[k]
                acc = t if acc is None else acc + t  # each < 2^62 for inner < 2^20
        # acc < 2^63; reduce then scale by 2^(21 s)
        acc = _fold(acc.astype(np.uint64))
        out = addmod(out, mulmod(acc, np.uint64(pow(2, _LIMB * s, P))))
    return out


def poly_eval_array(coeffs: Sequence[int], x: np.ndarray) -> np.ndarray:
    """Horner evaluation of a field polynomial at every entry of x."""
    x = np.asarray(x, dtype=np.uint64)
    acc = np.zeros_like(x)
    for c in reversed(coeffs):
        acc = addmod(mulmod(acc, x), np.uint64(c % P))
    return acc


# ---- univariate polynomials (scalar) ---------------------------------------

def poly_eval(coeffs: Sequence[int], x: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % P
    return acc


def interpolate(xs: Sequence[int], ys: Sequence[int]) -> list[int]:
    """Coefficients (low to high) of the unique poly through the points."""
    n = len(xs)
    xs = [x % P for x in xs]
    # Newton divided differences, then expand
    coef = [y % P for y in ys]
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) * inv(xs[i] - xs[i - j]) % P
    out = [0] * n
    for i in range(n - 1, -1, -1):
        # out = out * (X - xs[i]) + coef[i]
        nxt = [0] * n
        for k in range(n - 1):
            nxt[k + 1] = out[k]
        for k in range(n):
            nxt[k] = (nxt[k] - xs[i] * out[k]) % P
        nxt[0] = (nxt[0] + coef[i]) % P
        out = nxt
    return out


def interpolate_consecutive(ys: Sequence[int]) -> list[int]:
    """Interpolate values given at x = 0, 1, ..., len(ys)-1."""
    n = len(ys)
    if n == 0:
        return []
    # forward differences are cheaper than general divided differences here
    diffs = [y % P for y in ys]
    newton = []
    for j in range(n):
        newton.append(diffs[0])
        diffs = [(diffs[i + 1] - diffs[i]) % P for i in range(len(diffs) - 1)]
    # newton form: sum_j newton[j] * C(x, j)
    out = [0] * n
    basis = [1]  # coefficients of x(x-1)...(x-j+1)/j!
    fact_inv = 1
    for j in range(n):
        if j > 0:
            nb = [0] * (len(basis) + 1)
            for k, c in enumerate(basis):
                nb[k + 1] = (nb[k + 1] + c) % P
                nb[k] = (nb[k] - (j - 1) * c) % P
            basis = nb
            fact_inv = fact_inv * inv(j) % P
        s = newton[j] * fact_inv % P
        if s:
            for k, c in enumerate(basis):
                out[k] = (out[k] + s * c) % P
    return out


# ---- Lagrange basis over [ell] ----------------------------------------------

def chi(k: int, x: int, ell: int) -> int:
    """Lagrange basis polynomial for node k over nodes 0..ell-1, at x."""
    if not 0 <= k < ell:
        raise DomainError(f"node {k} outside [0, {ell})")
    num, den = 1, 1
    for m in range(ell):
        if m != k:
            num = num * (x - m) % P
            den = den * (k - m) % P
    return num * inv(den) % P


def chi_table(x: int, ell: int) -> list[int]:
    """[chi(k, x, ell) for k in range(ell)] in O(ell) inversions."""
    x %= P
    if x < ell:
        return [1 if k == x else 0 for k in range(ell)]
    total = 1
    for m in range(ell):
        total = total * (x - m) % P
    fact = [1] * ell
    for i in range(1, ell):
        fact[i] = fact[i - 1] * i % P
    out = []
    for k in range(ell):
        den = fact[k] * fact[ell - 1 - k] % P
        if (ell - 1 - k) % 2:
            den = P - den
        out.append(total * inv((x - k) * den) % P)
    return out


def chi_vec(v: Sequence[int], r: Sequence[int], ell: int) -> int:
    if len(v) != len(r):
        raise DomainError("index vector and point differ in dimension")
    acc = 1
    for vj, rj in zip(v, r):
        acc = acc * chi(vj, rj, ell) % P
    return acc


# ---- grids and sketches -----------------------------------------------------

@dataclass(frozen=True)
class GridParams:
    ell: int
    d: int
    u: int

    def __post_init__(self):
        if self.ell < 2 or self.d < 1:
            raise DomainError("grid needs ell >= 2 and d >= 1")
        if self.ell ** self.d < self.u:
            raise DomainError("grid too small for universe")

    @property
    def size(self) -> int:
        return self.ell ** self.d

    def digits(self, i: int) -> list[int]:
        """Little-endian base-ell digits; coordinate 1 is least significant."""
        out = []
        for _ in range(self.d):
            i, rem = divmod(i, self.ell)
            out.append(rem)
        return out

    def digit_arrays(self, idx: np.ndarray) -> list[np.ndarray]:
        idx = np.asarray(idx, dtype=np.int64)
        out = []
        for _ in range(self.d):
            out.append(idx % self.ell)
            idx = idx // self.ell
        return out

    def embed(self, i: int) -> list[int]:
        return self.digits(i)


@dataclass
class LdeSketch:
    """Running value of f_a(r) at a point fixed before the stream."""

    params: GridParams
    r: tuple
    acc: int = 0
    _tables: list = dc_field(default=None, repr=False)
    _prefix: list = dc_field(default=None, repr=False)

    def __post_init__(self):
        if len(self.r) != self.params.d:
            raise DomainError("point dimension does not match grid")
        self.r = tuple(int(x) % P for x in self.r)
        ell = self.params.ell
        self._tables = [chi_table(x, ell) for x in self.r]
        self._prefix = []
        for t in self._tables:
            run, pre = 0, []
            for c in t:
                run = (run + c) % P
                pre.append(run)
            self._prefix.append(pre)
        self._np_tables = [np.array(t, dtype=np.uint64) for t in self._tables]

    def words(self) -> int:
        # point, accumulator, and the cached per-coordinate partial sums
        return self.params.d + 1 + self.params.d * self.params.ell

    def range_sum(self, j: int, lo: int, hi: int) -> int:
        """sum_{x=lo}^{hi-1} chi_x(r_j) from the prefix cache."""
        if hi <= lo:
            return 0
        pre = self._prefix[j]
        return (pre[hi - 1] - (pre[lo - 1] if lo > 0 else 0)) % P

    def weights(self, idx: np.ndarray) -> np.ndarray:
        """chi_v(r) for every index in idx, vectorised."""
        idx = np.asarray(idx, dtype=np.int64)
        out = np.ones(idx.shape, dtype=np.uint64)
        for j, dig in enumerate(self.params.digit_arrays(idx)):
            out = mulmod(out, self._np_tables[j][dig])
        return out

    def update(self, i: int, delta: int) -> "LdeSketch":
        return sketch_update(self, i, delta)

    def update_many(self, idx, delta: int) -> "LdeSketch":
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size == 0 or delta == 0:
            return self
        if idx.min() < 0 or idx.max() >= self.params.u:
            raise DomainError("index outside universe")
        w = sum_mod(self.weights(idx))
        self.acc = (self.acc + delta * w) % P
        return self

    def update_wildcard(self, pattern, delta: int) -> "LdeSketch":
        return sketch_update_wildcard(self, pattern, delta)


def sketch_update(s: LdeSketch, i: int, delta: int) -> LdeSketch:
    if not 0 <= i < s.params.u:
        raise DomainError(f"index {i} outside universe of size {s.params.u}")
    w = 1
    for j, dig in enumerate(s.params.digits(i)):
        w = w * s._tables[j][dig] % P
    s.acc = (s.acc + delta * w) % P
    return s


def _coord_range(c, ell: int):
    if c is None:
        return 0, ell
    if isinstance(c, range):
        if c.step != 1:
            raise DomainError("wildcard ranges must be contiguous")
        return max(c.start, 0), min(c.stop, ell)
    if isinstance(c, tuple):
        return max(c[0], 0), min(c[1], ell)
    c = int(c)
    if not 0 <= c < ell:
        raise DomainError(f"digit {c} outside [0, {ell})")
    return c, c + 1


def sketch_update_wildcard(s: LdeSketch, pattern: Sequence, delta: int) -> LdeSketch:
    """Add delta to every grid point matching the per-coordinate pattern.

    Each coordinate is a fixed digit, None (full range) or a contiguous
    range / (lo, hi) half-open pair.  Costs O(d) via the prefix cache.
    """
    if len(pattern) != s.params.d:
        raise DomainError("pattern dimension does not match grid")
    w = 1
    for j, c in enumerate(pattern):
        lo, hi = _coord_range(c, s.params.ell)
        if hi <= lo:
            return s
        w = w * s.range_sum(j, lo, hi) % P
    s.acc = (s.acc + delta * w) % P
    return s


def lde_eval_sparse(entries: Mapping[int, int], point: Sequence[int], params: GridParams) -> int:
    """sum_v a_v chi_v(point) over the nonzero entries."""
    if len(point) != params.d:
        raise DomainError("point dimension does not match grid")
    tables = [chi_table(int(x), params.ell) for x in point]
    total = 0
    for i, cnt in entries.items():
        if not 0 <= i < params.u:
            raise DomainError(f"index {i} outside universe")
        w = cnt
        for j, dig in enumerate(params.digits(i)):
            w = w * tables[j][dig] % P
        total = (total + w) % P
    return total


def lde_eval_dense(a: Iterable[int], point: Sequence[int], params: GridParams) -> int:
    return lde_eval_sparse({i: v for i, v in enumerate(a) if v}, point, params)
