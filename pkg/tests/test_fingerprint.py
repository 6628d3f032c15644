import numpy as np
import pytest
from hypothesis import given, strategies as st

from sipgraph.field import P, DomainError
from sipgraph.fingerprint import ContractError, Fingerprint, fp_equal, fp_merge, fp_update


def test_insert_delete_returns_to_zero():
    f = Fingerprint(123456789, 100)
    fp_update(f, 7, 1)
    fp_update(f, 7, -1)
    assert f.acc == 0


@given(st.lists(st.integers(min_value=0, max_value=99), max_size=40), st.randoms())
def test_permutation_invariance(items, rnd):
    f, g = Fingerprint(987654321, 100), Fingerprint(987654321, 100)
    for x in items:
        f.update(x)
    shuffled = list(items)
    rnd.shuffle(shuffled)
    for x in shuffled:
        g.update(x)
    assert fp_equal(f, g)


def test_matches_dense_polynomial():
    alpha = 55555
    rng = np.random.default_rng(0)
    a = rng.integers(-3, 4, size=1000)
    f = Fingerprint(alpha, 1000)
    for i, v in enumerate(a):
        if v:
            f.update(i, int(v))
    assert f.acc == sum(int(v) * pow(alpha, i, P) for i, v in enumerate(a)) % P


def test_out_of_range_and_contract_errors():
    f = Fingerprint(3, 10)
    with pytest.raises(DomainError):
        f.update(10)
    with pytest.raises(ContractError):
        fp_equal(f, Fingerprint(4, 10))
    with pytest.raises(ContractError):
        fp_merge(f, Fingerprint(3, 11))


def test_empty_and_merge():
    assert fp_equal(Fingerprint(9, 5), Fingerprint(9, 5))
    f = Fingerprint(9, 5).update(1).update(2)
    assert fp_merge(f, Fingerprint(9, 5)) == f
    d, o, both = Fingerprint(9, 5), Fingerprint(9, 5), Fingerprint(9, 5)
    for x in (0, 3):
        d.update(x)
        both.update(x)
    for x in (1, 2, 4):
        o.update(x)
        both.update(x)
    assert fp_merge(d, o) == both


def test_unequal_vectors_distinguished():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        alpha = int(rng.integers(0, P, dtype=np.int64))
        f, g = Fingerprint(alpha, 50), Fingerprint(alpha, 50)
        f.update(3)
        g.update(4)
        assert not f == g
