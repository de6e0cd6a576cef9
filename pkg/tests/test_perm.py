from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from soficlab.errors import DegreeMismatch
from soficlab.perm import Permutation, compose, fixed_fraction_joint, hamming, inverse


def perms(d):
    return st.permutations(list(range(d))).map(Permutation)


def test_compose_convention():
    p = Permutation([1, 2, 0])
    q = Permutation([0, 2, 1])
    assert compose(p, q).tolist() == [p(q(j)) for j in range(3)]


def test_hamming_example():
    assert hamming(Permutation([0, 1, 2, 3]), Permutation([1, 0, 2, 3])) == Fraction(1, 2)


def test_rejects_non_bijection():
    with pytest.raises(ValueError):
        Permutation([0, 0, 1])
    with pytest.raises(ValueError):
        Permutation([0, 3])


def test_degree_mismatch():
    with pytest.raises(DegreeMismatch):
        hamming(Permutation.identity(2), Permutation.identity(3))


def test_fixed_fraction_joint():
    assert fixed_fraction_joint([]) == 1
    p = Permutation.from_cycles(4, [[0, 1]])
    q = Permutation.from_cycles(4, [[1, 2]])
    assert fixed_fraction_joint([p, q]) == Fraction(1, 4)


def test_immutable():
    p = Permutation.identity(3)
    with pytest.raises(ValueError):
        p.img[0] = 2


@given(st.data())
def test_bi_invariance(data):
    d = data.draw(st.integers(1, 7))
    p, q, r = (data.draw(perms(d)) for _ in range(3))
    assert hamming(r * p, r * q) == hamming(p, q) == hamming(p * r, q * r)


@given(st.data())
def test_group_laws(data):
    d = data.draw(st.integers(1, 7))
    p, q, r = (data.draw(perms(d)) for _ in range(3))
    assert (p * q) * r == p * (q * r)
    assert (p * inverse(p)).is_identity()
    assert hamming(p, q) <= hamming(p, r) + hamming(r, q)
