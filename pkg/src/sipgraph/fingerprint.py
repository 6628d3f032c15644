"""Reed-Solomon fingerprints for multiset equality."""
from __future__ import annotations

from .field import P, DomainError


class ContractError(RuntimeError):
    """Two fingerprints built with different evaluation points were mixed."""


class Fingerprint:
    """acc = sum_i a_i * alpha^i over the multiset's frequency vector."""

    __slots__ = ("alpha", "acc", "max_index")

    def __init__(self, alpha: int, max_index: int, acc: int = 0):
        self.alpha = alpha % P
        self.max_index = max_index
        self.acc = acc % P

    def update(self, item: int, delta: int = 1) -> "Fingerprint":
        return fp_update(self, item, delta)

    def copy(self) -> "Fingerprint":
        return Fingerprint(self.alpha, self.max_index, self.acc)

    def __eq__(self, other):
        if not isinstance(other, Fingerprint):
            return NotImplemented
        return fp_equal(self, other)

    def __repr__(self):
        return f"Fingerprint(acc={self.acc}, max_index={self.max_index})"


def fp_update(f: Fingerprint, item: int, delta: int = 1) -> Fingerprint:
    if not 0 <= item < f.max_index:
        raise DomainError(f"item {item} outside [0, {f.max_index})")
    f.acc = (f.acc + delta * pow(f.alpha, item, P)) % P
    return f


def _check(f: Fingerprint, g: Fingerprint):
    if f.alpha != g.alpha or f.max_index != g.max_index:
        raise ContractError("fingerprints use different evaluation points")


def fp_equal(f: Fingerprint, g: Fingerprint) -> bool:
    _check(f, g)
    return f.acc == g.acc


def fp_merge(f: Fingerprint, g: Fingerprint) -> Fingerprint:
    _check(f, g)
    return Fingerprint(f.alpha, f.max_index, f.acc + g.acc)
