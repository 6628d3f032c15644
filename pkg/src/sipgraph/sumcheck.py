"""Sum-check over an LDE sketch, in log-round and constant-round shapes.

The verifier side only ever touches its sketch (the secret point r and
f_a(r)) and the polynomials it receives.  The honest prover keeps the
whole frequency vector densely and folds one coordinate per round.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Sequence

import numpy as np

from .field import (P, DomainError, GridParams, LdeSketch, addmod, chi_table, interpolate,
                    interpolate_consecutive, matmul_mod, mulmod, poly_eval,
                    poly_eval_array, sum_mod, to_field_array)

_PU = np.uint64(P)


class SumcheckReject(Exception):
    def __init__(self, round_index: int, reason: str):
        super().__init__(f"round {round_index}: {reason}")
        self.round_index = round_index
        self.reason = reason


def iroot_ceil(u: int, k: int) -> int:
    """Smallest integer x with x**k >= u."""
    if u <= 1:
        return 1
    x = int(round(u ** (1.0 / k)))
    while x ** k < u:
        x += 1
    while x > 1 and (x - 1) ** k >= u:
        x -= 1
    return x


@dataclass(frozen=True)
class Mode:
    kind: str = "log"   # 'log' or 'const'
    gamma: int = 0

    @staticmethod
    def parse(text: str) -> "Mode":
        text = text.strip().lower()
        if text == "log":
            return Mode("log")
        if text.startswith("const"):
            _, _, g = text.partition(":")
            try:
                gamma = int(g) if g else 2
            except ValueError:
                raise DomainError(f"bad round count in mode {text!r}") from None
            if gamma < 1:
                raise DomainError("gamma must be positive")
            return Mode("const", gamma)
        raise DomainError(f"unknown mode {text!r}; use 'log' or 'const:<gamma>'")

    def grid(self, u: int) -> GridParams:
        u = max(u, 1)
        if self.kind == "log":
            d = max(1, (u - 1).bit_length())
            return GridParams(2, d, u)
        ell = max(2, iroot_ceil(u, self.gamma))
        return GridParams(ell, self.gamma, u)

    def __str__(self):
        return "log" if self.kind == "log" else f"const:{self.gamma}"


@dataclass(frozen=True)
class FreqWindow:
    """Every frequency the derived vector can take lies in `points`."""

    lo: int
    hi: int
    extra: tuple = ()

    @staticmethod
    def of_points(points: Iterable[int]) -> "FreqWindow":
        pts = sorted(set(int(p) for p in points))
        return FreqWindow(pts[0], pts[-1], tuple(pts))

    @property
    def points(self) -> list:
        if self.extra:
            return list(self.extra)
        return list(range(self.lo, self.hi + 1))

    @property
    def degree(self) -> int:
        return len(self.points) - 1

    def __contains__(self, k: int) -> bool:
        return k in self.points


def indicator_poly(targets: Iterable[int], window: FreqWindow) -> list:
    """Coefficients of h with h(w) = [w in targets] for every window point w."""
    tset = set(targets)
    pts = window.points
    missing = tset - set(pts)
    if missing:
        raise ValueError(f"targets {sorted(missing)} outside the frequency window")
    coeffs = interpolate(pts, [1 if w in tset else 0 for w in pts])
    return coeffs + [0] * (window.degree + 1 - len(coeffs))


def round_length(h_degree: int, ell: int) -> int:
    return h_degree * (ell - 1) + 1


@lru_cache(maxsize=64)
def _power_sums(ell: int, length: int) -> tuple:
    """S_k = sum_{x<ell} x^k for k < length."""
    out = [0] * length
    for x in range(ell):
        p = 1
        for k in range(length):
            out[k] = (out[k] + p) % P
            p = p * x % P
    return tuple(out)


def sum_over_nodes(coeffs: Sequence[int], ell: int) -> int:
    s = _power_sums(ell, len(coeffs))
    return sum(c * sk for c, sk in zip(coeffs, s)) % P


@lru_cache(maxsize=64)
def _eval_matrix(ell: int, npts: int) -> np.ndarray:
    """M[k, t] = chi_k(t) for t in 0..npts-1."""
    cols = [chi_table(t, ell) for t in range(npts)]
    return np.array(cols, dtype=np.uint64).T.copy()


class DenseVector:
    """The prover's exact frequency vector, padded to the full grid."""

    def __init__(self, grid: GridParams):
        self.grid = grid
        self.a = np.zeros(grid.size, dtype=np.int64)

    def add(self, idx, delta: int):
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size:
            np.add.at(self.a, idx, delta)

    def count(self, targets: Iterable[int], u: Optional[int] = None) -> int:
        t = np.array(sorted(set(targets)), dtype=np.int64)
        a = self.a if u is None else self.a[:u]
        return int(np.isin(a, t).sum())


class HonestSumcheck:
    """Round-by-round messages of the honest prover for sum_x h(f_a(x))."""

    def __init__(self, vec: DenseVector, h: Sequence[int], h_degree: Optional[int] = None):
        self.grid = vec.grid
        self.h = list(h)
        self.h_degree = len(self.h) - 1 if h_degree is None else h_degree
        self.raw = vec.a  # exact integers until the first challenge is bound
        self.cur = to_field_array(vec.a)
        self.npts = round_length(self.h_degree, self.grid.ell)
        self.j = 0

    def _h_small(self, ints: np.ndarray, axis=None):
        # h over small integers: evaluate once per distinct value
        vals, inv_idx = np.unique(ints, return_inverse=True)
        hv = poly_eval_array(self.h, to_field_array(vals))[inv_idx.reshape(ints.shape)]
        return sum_mod(hv, axis=axis)

    def total(self) -> int:
        if self.raw is not None:
            return int(self._h_small(self.raw))
        return sum_mod(poly_eval_array(self.h, self.cur))

    def _small_lines(self):
        """Exact integer line values in the first round, or None on overflow risk."""
        if self.raw is None:
            return None
        ell = self.grid.ell
        M = _int_eval_matrix(ell, self.npts)
        big = max(abs(v) for row in M for v in row) * ell * (int(np.abs(self.raw).max(initial=0)) + 1)
        if big >= 1 << 62:
            return None
        return self.raw.reshape(-1, ell) @ np.array(M, dtype=np.int64)

    def _lines(self) -> np.ndarray:
        ell = self.grid.ell
        A = self.cur.reshape(-1, ell)
        if ell == 2:
            a0, diff = A[:, 0], addmod(A[:, 1], (_PU - A[:, 0]) % _PU)
            cols = [a0]
            for _ in range(1, self.npts):
                cols.append(addmod(cols[-1], diff))
            return np.stack(cols, axis=1)
        return matmul_mod(A, _eval_matrix(ell, self.npts))

    def round_poly(self) -> list:
        F = self._small_lines()
        if F is not None:
            evals = self._h_small(F, axis=0)
        else:
            evals = sum_mod(poly_eval_array(self.h, self._lines()), axis=0)
        coeffs = interpolate_consecutive([int(v) for v in evals])
        return coeffs + [0] * (self.npts - len(coeffs))

    def bind(self, r: int):
        ell = self.grid.ell
        A = self.cur.reshape(-1, ell)
        if ell == 2:
            diff = addmod(A[:, 1], (_PU - A[:, 0]) % _PU)
            self.cur = addmod(A[:, 0], mulmod(diff, np.uint64(r % P)))
        else:
            col = np.array(chi_table(r, ell), dtype=np.uint64).reshape(ell, 1)
            self.cur = matmul_mod(A, col).ravel()
        self.raw = None
        self.j += 1


@lru_cache(maxsize=64)
def _int_eval_matrix(ell: int, npts: int) -> tuple:
    """Integer Lagrange weights chi_k(t) for nodes 0..ell-1 at t = 0..npts-1."""
    from fractions import Fraction

    rows = []
    for k in range(ell):
        row = []
        for t in range(npts):
            v = Fraction(1)
            for m in range(ell):
                if m != k:
                    v *= Fraction(t - m, k - m)
            row.append(int(v))
        rows.append(tuple(row))
    return tuple(rows)


def verify_rounds(claimed: int, h: Sequence[int], h_degree: int, sketch: LdeSketch,
                  next_poly, send_challenge, hold=None) -> int:
    """Verifier half of sum-check.  Returns the verified padded-grid total.

    next_poly(j) yields the prover's round-j coefficient list; send_challenge
    (j, r_j) reveals r_j only after round j's polynomial has been checked.
    Raises SumcheckReject with the 1-based failing round.
    """
    grid = sketch.params
    ell, d = grid.ell, grid.d
    need = round_length(h_degree, ell)
    prev = claimed % P
    last = None
    for j in range(d):
        g = [int(c) % P for c in next_poly(j)]
        if hold is not None:
            hold(len(g))
        if len(g) != need:
            raise SumcheckReject(j + 1, f"polynomial has {len(g)} coefficients, expected {need}")
        if sum_over_nodes(g, ell) != prev:
            raise SumcheckReject(j + 1, "round sum does not match previous claim")
        prev = poly_eval(g, sketch.r[j])
        if j < d - 1:
            send_challenge(j, sketch.r[j])
        last = prev
    if last != poly_eval(h, sketch.acc):
        raise SumcheckReject(d, "final evaluation disagrees with the sketch")
    return claimed % P


def padded_correction(h: Sequence[int], grid: GridParams) -> int:
    """Contribution of the zero padding entries beyond the universe."""
    return (grid.size - grid.u) * poly_eval(h, 0) % P


def sumcheck_run(claimed: int, h: Sequence[int], sketch: LdeSketch, prover: HonestSumcheck,
                 h_degree: Optional[int] = None):
    """Run both halves in-process.  Returns (accepted, total or failing round)."""
    deg = len(h) - 1 if h_degree is None else h_degree
    try:
        verify_rounds(claimed, h, deg, sketch,
                      lambda j: prover.round_poly(),
                      lambda j, r: prover.bind(r))
    except SumcheckReject as exc:
        return False, exc.round_index
    total = (claimed - padded_correction(h, sketch.params)) % P
    return True, total
