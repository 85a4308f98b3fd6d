import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from logan.boolmat import (ancestors, bool_add, bool_mult, bool_star, path_oracle,
                           threshold_binary)

from conftest import cancel_w, random_dag


def brute_mult(a, b):
    n, k = a.shape
    m = b.shape[1]
    return np.array([[max(min(a[i, t], b[t, j]) for t in range(k)) for j in range(m)]
                     for i in range(n)])


nonneg = st.integers(1, 5).flatmap(
    lambda n: arrays(float, (n, n), elements=st.floats(0, 10, allow_nan=False)))


def test_mult_examples():
    assert np.array_equal(bool_mult(np.zeros((2, 2)), [[3, 1], [2, 7]]), np.zeros((2, 2)))
    assert np.array_equal(bool_mult([[1, 2], [3, 4]], [[5, 0], [0, 1]]), [[1, 1], [3, 1]])


def test_mult_binary_is_boolean_product():
    rng = np.random.default_rng(1)
    for _ in range(20):
        a = (rng.random((6, 6)) < 0.4).astype(float)
        b = (rng.random((6, 6)) < 0.4).astype(float)
        expect = ((a.astype(int) @ b.astype(int)) > 0).astype(float)
        assert np.array_equal(bool_mult(a, b), expect)


def test_mult_shape_error():
    with pytest.raises(ValueError, match="shape"):
        bool_mult(np.zeros((2, 3)), np.zeros((2, 3)))


def test_add_examples():
    a = np.array([[1.0, 0], [0, 2]])
    assert np.array_equal(bool_add(a, [[0, 3], [1, 0]]), [[1, 3], [1, 2]])
    assert np.array_equal(bool_add(a, a), a)
    assert np.array_equal(bool_add(a, np.zeros((2, 2))), a)
    with pytest.raises(ValueError):
        bool_add(a, np.zeros((3, 3)))


@settings(max_examples=60, deadline=None)
@given(nonneg)
def test_mult_matches_brute_force(a):
    assert np.array_equal(bool_mult(a, a.T), brute_mult(a, a.T))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**31 - 1))
def test_mult_associative_add_commutative(n, seed):
    rng = np.random.default_rng(seed)
    a, b, c = (rng.integers(0, 5, (n, n)).astype(float) for _ in range(3))
    assert np.array_equal(bool_mult(bool_mult(a, b), c), bool_mult(a, bool_mult(b, c)))
    assert np.array_equal(bool_add(a, b), bool_add(b, a))
    assert np.array_equal(bool_add(bool_add(a, b), c), bool_add(a, bool_add(b, c)))


def test_star_cancel():
    star = bool_star(np.abs(cancel_w()))
    assert star[4, 0] == 1 and star[2, 0] == 1 and star[4, 2] == 1
    assert star[3, 0] == 1 and star[0, 4] == 0
    assert np.array_equal(bool_star(np.zeros((4, 4))), np.zeros((4, 4)))


def test_star_rejects_negative():
    with pytest.raises(ValueError):
        bool_star(cancel_w())


def _power_path_exists(w, q1, q2):
    a = (np.abs(w) > 0).astype(float)
    p = w.shape[0]
    power = np.eye(p)
    for _ in range(p - 2):
        power = power @ a
        if power[q2, q1] != 0:
            return True
    return False


@pytest.mark.parametrize("seed", range(10))
def test_star_against_oracle(seed):
    rng = np.random.default_rng(seed)
    p = int(rng.integers(3, 11))
    w = random_dag(rng, p)
    star = bool_star(np.abs(w))
    bstar = bool_star(threshold_binary(w, 0.0))
    for q1 in range(p):
        for q2 in range(p):
            if q1 == q2:
                continue
            exists, best, _ = path_oracle(w, q1, q2)
            assert (star[q2, q1] > 0) == exists == (bstar[q2, q1] == 1)
            assert star[q2, q1] == best
            assert _power_path_exists(w, q1, q2) == exists


def test_star_hamiltonian_path():
    p = 9
    w = np.zeros((p, p))
    for j in range(1, p):
        w[j, j - 1] = 0.5 + j
    assert bool_star(np.abs(w))[p - 1, 0] == 1.5
    assert bool_star(np.abs(w), n_terms=p - 2)[p - 1, 0] == 0.0


def test_star_fixed_point():
    rng = np.random.default_rng(3)
    for _ in range(20):
        p = int(rng.integers(3, 10))
        w = np.abs(random_dag(rng, p))
        star = bool_star(w)
        power = w.copy()
        for _ in range(p - 2):
            power = bool_mult(power, w)
        assert np.array_equal(bool_add(star, power), star)
        assert np.array_equal(bool_star(w, n_terms=p + 3), star)


def test_threshold_examples():
    assert np.array_equal(threshold_binary([[0, 0.5], [1.5, 0]], 1.0), [[0, 0], [1, 0]])
    assert threshold_binary(cancel_w(), 0.0).sum() == 4
    assert np.array_equal(threshold_binary([[1.0, 2.0]], 1.0), [[0, 1]])
    with pytest.raises(ValueError):
        threshold_binary([[1.0]], -1)


def test_ancestors_examples():
    star = bool_star(threshold_binary(cancel_w()))
    assert ancestors(star, 4) == {0, 2, 3}
    assert ancestors(np.zeros((3, 3)), 2) == set()
    chain = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float)
    assert ancestors(bool_star(chain), 2) == {0, 1}
    assert ancestors(bool_star(chain, n_terms=1), 2) == {1}
    with pytest.raises(IndexError):
        ancestors(star, 9)


def test_path_oracle_cancel_cancellation():
    exists, best, effects = path_oracle(cancel_w(), 0, 4)
    assert exists and best == 1.0
    assert sorted(effects) == [-1.0, 1.0]
    assert sum(effects) == 0.0
    assert path_oracle(np.zeros((4, 4)), 0, 3) == (False, 0.0, [])


def test_path_oracle_guard():
    with pytest.raises(ValueError, match="refused"):
        path_oracle(np.zeros((13, 13)), 0, 1)


def test_star_speed_oracle_batch():
    rng = np.random.default_rng(11)
    start = time.perf_counter()
    for _ in range(50):
        w = random_dag(rng, 8)
        star = bool_star(np.abs(w))
        exists, best, _ = path_oracle(w, 0, 7)
        assert star[7, 0] == best and (best > 0) == exists
    assert time.perf_counter() - start < 5
