import numpy as np
import pytest
from scipy.linalg import block_diag

from pg3.errors import IllConditioned
from pg3.jordan import jordan_structure

from conftest import random_conditioned


def jblock(lam, k):
    return lam * np.eye(k) + np.diag(np.ones(k - 1), 1)


def structure(A):
    return [(np.round(c.value, 6), c.sizes) for c in jordan_structure(A)]


def test_diagonal():
    assert structure(np.diag([1.0, 2.0, 2.0, 3.0])) == [(1, (1,)), (2, (1, 1)), (3, (1,))]


def test_single_block():
    assert structure(jblock(1.0, 4)) == [(1, (4,))]


def test_mixed_blocks_under_conjugation(rng):
    A = block_diag(jblock(2.0, 2), jblock(2.0, 1), [[0.5]])
    for _ in range(20):
        T = random_conditioned(rng)
        assert structure(T @ A @ np.linalg.inv(T)) == [(0.5, (1,)), (2, (2, 1))]


def test_complex_pair_reports_upper_member():
    R = np.array([[0.0, -1.0], [1.0, 0.0]])
    clusters = jordan_structure(block_diag(R, np.diag([2.0, 3.0])))
    assert [c.value for c in clusters if not c.is_real] == [1j]


def test_complex_jordan_block(rng):
    R = np.array([[0.6, -0.8], [0.8, 0.6]])
    A = np.block([[R, np.eye(2)], [np.zeros((2, 2)), R]])
    T = random_conditioned(rng)
    (c,) = jordan_structure(T @ A @ np.linalg.inv(T))
    assert abs(c.value - (0.6 + 0.8j)) < 1e-6 and c.sizes == (2,)


def test_3x3():
    assert structure(jblock(1.0, 3)) == [(1, (3,))]


def test_ambiguous_raises():
    # a Jordan block perturbed right at the clustering scale is undecidable
    A = jblock(1.0, 2)
    A[1, 0] = 1e-7
    with pytest.raises(IllConditioned):
        jordan_structure(block_diag(A, np.eye(2) * 3))


def test_close_conjugate_pair_is_resolved():
    # eigenvalues e^{+-0.0045 i} fall inside the loosest clustering threshold
    t = 0.0045
    R = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
    A = np.zeros((4, 4))
    A[:2, :2], A[2:, 2:] = R, -np.eye(2)
    clusters = jordan_structure(A)
    assert len(clusters) == 2
    assert any(abs(c.value - np.exp(1j * t)) < 1e-12 and c.sizes == (1,) for c in clusters)
