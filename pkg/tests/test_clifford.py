import numpy as np
import pytest

from pg3.clifford import (
    Chirality,
    Quaternion,
    class_invariant,
    class_sample,
    clifford_parallel,
    invariant_distance,
    is_parallel,
    left_matrix,
    orbit_oracle,
    pso4_matrix,
    qmul,
    random_unit_quaternions,
    right_matrix,
    s3_grid,
    split_vector,
    translate_line,
)
from pg3.errors import NonUnitQuaternion
from pg3.geometry import ProjLine, ProjPoint, incidence_residual, line_distance, meet

ONE, I, J, K = np.eye(4)
SIDES = (Chirality.LEFT, Chirality.RIGHT)


def line(*vs):
    return ProjLine.span(*vs)


def test_hamilton_table():
    assert np.allclose(qmul(I, J), K)
    assert np.allclose(qmul(J, I), -K)
    assert np.allclose(qmul(J, K), I)
    assert np.allclose(qmul(K, I), J)
    assert np.allclose(qmul(I, I), -ONE)


def test_quaternion_norm_and_inverse(rng):
    for _ in range(100):
        p = Quaternion.from_array(rng.normal(size=4))
        q = Quaternion.from_array(rng.normal(size=4))
        assert abs((p * q).norm() - p.norm() * q.norm()) < 1e-12
        assert np.allclose((q * q.inverse()).array, ONE, atol=1e-12)
        r = Quaternion.from_array(rng.normal(size=4))
        assert np.allclose(((p * q) * r).array, (p * (q * r)).array, atol=1e-12)


def test_multiplication_matrices(rng):
    u, v = rng.normal(size=4), rng.normal(size=4)
    assert np.allclose(left_matrix(u) @ v, qmul(u, v))
    assert np.allclose(right_matrix(u) @ v, qmul(v, u))


def test_translate_examples():
    L = line(ONE, I)
    assert line_distance(translate_line(J, L, "left"), line(J, K)) < 1e-12
    assert line_distance(translate_line(ONE, L, "left"), L) < 1e-12
    assert line_distance(translate_line(J, L, "right"), line(J, K)) < 1e-12
    with pytest.raises(NonUnitQuaternion):
        translate_line(2 * J, L, "left")


def test_parallel_examples():
    L = line(ONE, I)
    assert line_distance(clifford_parallel(ProjPoint(J), L, "left"), line(J, K)) < 1e-12
    assert line_distance(clifford_parallel(ProjPoint(ONE + J), L, "left"), line(ONE + J, I - K)) < 1e-12
    p = ProjPoint(0.3 * ONE + 0.8 * I)
    assert line_distance(clifford_parallel(p, L, "right"), L) < 1e-12


def test_class_invariant_examples():
    inv = class_invariant(line(ONE, I), "left").array
    assert np.allclose(np.abs(inv), [1, 0, 0])
    assert np.allclose(np.abs(class_invariant(line(J, K), "left").array), [1, 0, 0])
    assert np.allclose(np.abs(class_invariant(line(ONE, J), "left").array), [0, 1, 0])


def test_is_parallel_examples():
    assert is_parallel(line(ONE, I), line(ONE, I), "left")
    assert is_parallel(line(ONE, I), line(J, K), "left")
    assert not is_parallel(line(ONE, I), line(ONE, J), "left")


def test_oracle_examples():
    L = line(ONE, I)
    assert orbit_oracle(L, L, "left")
    assert orbit_oracle(L, line(J, K), "left")
    assert not orbit_oracle(L, line(ONE, J), "left")
    with pytest.raises(ValueError):
        orbit_oracle(L, L, "left", grid=100)


def test_chirality_calibration(rng):
    # The split p[:3] - p[3:] must be the left invariant: it is preserved by left
    # multiplication and distinguishes classes exactly where the oracle does.
    for side in SIDES:
        for _ in range(40):
            L = ProjLine(rng.normal(size=(4, 2)))
            M = clifford_parallel(ProjPoint(rng.normal(size=4)), L, side)
            N = ProjLine(rng.normal(size=(4, 2)))
            assert orbit_oracle(L, M, side)
            assert not orbit_oracle(L, N, side)
            assert is_parallel(L, M, side)
            assert not is_parallel(L, N, side)
    u = random_unit_quaternions(rng)
    L = ProjLine(rng.normal(size=(4, 2)))
    uL = ProjLine(left_matrix(u) @ L.basis)
    d_minus = np.linalg.norm(np.abs(split_vector(uL.plucker, "left")) - np.abs(split_vector(L.plucker, "left")))
    assert d_minus < 1e-12
    # the other split is not preserved by left translation in general
    assert invariant_distance(uL, L, "right") > 1e-3


def test_spread_property(rng):
    for _ in range(300):
        side = SIDES[rng.integers(2)]
        L = ProjLine(rng.normal(size=(4, 2)))
        p = ProjPoint(rng.normal(size=4))
        P = clifford_parallel(p, L, side)
        assert incidence_residual(P, p) < 1e-10
        assert invariant_distance(P, L, side) < 1e-9
        q = ProjPoint(P.basis @ rng.normal(size=2))
        assert line_distance(clifford_parallel(q, L, side), P) < 1e-9


def test_basis_independence(rng):
    for side in SIDES:
        L = ProjLine(rng.normal(size=(4, 2)))
        L2 = ProjLine(L.basis @ rng.normal(size=(2, 2)))
        p = ProjPoint(rng.normal(size=4))
        assert line_distance(clifford_parallel(p, L, side), clifford_parallel(p, L2, side)) < 1e-10


def test_translation_preserves_own_invariant(rng):
    for side in SIDES:
        for _ in range(50):
            L = ProjLine(rng.normal(size=(4, 2)))
            u = random_unit_quaternions(rng)
            assert invariant_distance(translate_line(u, L, side), L, side) < 1e-9


def test_other_factor_permutes_classes(rng):
    for side in SIDES:
        other = Chirality.RIGHT if side is Chirality.LEFT else Chirality.LEFT
        for _ in range(50):
            L = ProjLine(rng.normal(size=(4, 2)))
            M = clifford_parallel(ProjPoint(rng.normal(size=4)), L, side)
            u = random_unit_quaternions(rng)
            assert is_parallel(translate_line(u, L, other), translate_line(u, M, other), side)


def test_class_sample_is_a_spread():
    L = ProjLine.span(ONE + 0.2 * K, I - J)
    sample = class_sample(L, "left", 100)
    assert all(is_parallel(S, L, "left") for S in sample)
    for a in range(0, 100, 7):
        for b in range(a + 1, 100, 11):
            if line_distance(sample[a], sample[b]) > 1e-6:
                assert meet(sample[a], sample[b]) is None


def test_s3_grid_unit_and_seeded():
    U = s3_grid(2000, seed=3)
    assert np.allclose(np.linalg.norm(U, axis=1), 1)
    assert np.array_equal(U, s3_grid(2000, seed=3))


def test_pso4_is_special_orthogonal(rng):
    u, w = random_unit_quaternions(rng, 2)
    A = pso4_matrix(u, w)
    assert np.allclose(A.T @ A, np.eye(4), atol=1e-12)
    assert abs(np.linalg.det(A) - 1) < 1e-12
