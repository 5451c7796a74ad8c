"""Quaternions and the two Clifford parallelisms of PG(3,R).

R^4 is identified with the quaternions via (v0, v1, v2, v3) <-> v0 + v1 i +
v2 j + v3 k. The left Clifford parallelism has as classes the orbits of
lines under left multiplication by unit quaternions; the right one uses
right multiplication.

Class invariants come from the splitting of the Plücker vector
``p = (p01, p02, p03, p23, p31, p12)`` into ``p[:3] - p[3:]`` and
``p[:3] + p[3:]``. Under the coordinate conventions above, left
multiplication fixes the difference and right multiplication fixes the sum
(calibrated against :func:`orbit_oracle`, see ``tests/test_clifford.py``).
Each invariant is a point of the real projective plane.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .config import DEFAULT_SEED, TOL_INVARIANT
from .errors import NonUnitQuaternion
from .geometry import ProjLine, ProjPoint, canonical_sign

ORACLE_THRESHOLD = 0.05


def qmul(p, q) -> np.ndarray:
    """Hamilton product of quaternion arrays, broadcasting over leading axes."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    w1, x1, y1, z1 = np.moveaxis(p, -1, 0)
    w2, x2, y2, z2 = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ],
        axis=-1,
    )


def qconj(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def qinv(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return qconj(q) / np.sum(q * q, axis=-1, keepdims=True)


def left_matrix(u) -> np.ndarray:
    """4x4 matrix of v -> u v."""
    return qmul(np.asarray(u, dtype=float)[..., None, :], np.eye(4)).swapaxes(-1, -2)


def right_matrix(u) -> np.ndarray:
    """4x4 matrix of v -> v u."""
    return qmul(np.eye(4), np.asarray(u, dtype=float)[..., None, :]).swapaxes(-1, -2)


@dataclass(frozen=True)
class Quaternion:
    w: float
    x: float
    y: float
    z: float

    @classmethod
    def from_array(cls, a) -> "Quaternion":
        a = np.asarray(a, dtype=float).reshape(-1)
        if a.shape != (4,):
            raise ValueError("a quaternion has 4 components")
        return cls(*map(float, a))

    @property
    def array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def __mul__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion.from_array(qmul(self.array, other.array))

    def conjugate(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm(self) -> float:
        return float(np.linalg.norm(self.array))

    def inverse(self) -> "Quaternion":
        n2 = self.norm() ** 2
        if n2 == 0.0:
            raise ZeroDivisionError("zero quaternion has no inverse")
        return Quaternion.from_array(qconj(self.array) / n2)

    def to_json(self) -> list:
        return [self.w, self.x, self.y, self.z]


class Chirality(enum.Enum):
    LEFT = "left"
    RIGHT = "right"

    @classmethod
    def parse(cls, value) -> "Chirality":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


@dataclass(frozen=True)
class ClassInvariant:
    """Sign-canonical unit 3-vector labelling a parallel class."""

    axis: tuple

    @classmethod
    def from_vector(cls, v) -> "ClassInvariant":
        v = np.asarray(v, dtype=float)
        v = canonical_sign(v / np.linalg.norm(v))
        return cls(tuple(float(c) for c in v))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.axis)

    def distance(self, other: "ClassInvariant") -> float:
        """Chordal distance between the two points of the projective plane."""
        a, b = self.array, other.array
        return float(min(np.linalg.norm(a - b), np.linalg.norm(a + b)))


def _as_quaternion(u) -> np.ndarray:
    return u.array if isinstance(u, Quaternion) else np.asarray(u, dtype=float)


def translate_line(u, L: ProjLine, side: Chirality) -> ProjLine:
    """Image of L under v -> u v (LEFT) or v -> v u (RIGHT) for a unit quaternion u."""
    u = _as_quaternion(u)
    if abs(np.linalg.norm(u) - 1.0) > 1e-9:
        raise NonUnitQuaternion(f"|u| = {np.linalg.norm(u)!r}")
    side = Chirality.parse(side)
    M = left_matrix(u) if side is Chirality.LEFT else right_matrix(u)
    return ProjLine(M @ L.basis)


def clifford_parallel(p: ProjPoint, L: ProjLine, side: Chirality) -> ProjLine:
    """The line through p in the class of L."""
    side = Chirality.parse(side)
    v = p.coords
    x, y = L.basis[:, 0], L.basis[:, 1]
    if side is Chirality.LEFT:
        w = qmul(qmul(v, qinv(x)), y)
    else:
        w = qmul(qmul(y, qinv(x)), v)
    return ProjLine(np.column_stack([v, w]))


def split_vector(plucker, side: Chirality) -> np.ndarray:
    p = np.asarray(plucker, dtype=float)
    if Chirality.parse(side) is Chirality.LEFT:
        return p[..., :3] - p[..., 3:]
    return p[..., :3] + p[..., 3:]


def class_invariant(L: ProjLine, side: Chirality) -> ClassInvariant:
    return ClassInvariant.from_vector(split_vector(L.plucker, side))


def invariant_distance(L: ProjLine, M: ProjLine, side: Chirality) -> float:
    return class_invariant(L, side).distance(class_invariant(M, side))


def is_parallel(L: ProjLine, M: ProjLine, side: Chirality, tol: float = TOL_INVARIANT) -> bool:
    return invariant_distance(L, M, side) < tol


def s3_grid(n: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    """``n`` quasi-uniform unit quaternions (scrambled Halton points, Shoemake map)."""
    h = qmc.Halton(d=3, scramble=True, seed=seed).random(n)
    a, b, c = h[:, 0], 2 * np.pi * h[:, 1], 2 * np.pi * h[:, 2]
    r1, r2 = np.sqrt(1.0 - a), np.sqrt(a)
    return np.column_stack([r2 * np.cos(c), r1 * np.sin(b), r1 * np.cos(b), r2 * np.sin(c)])


def orbit_oracle(
    L: ProjLine,
    M: ProjLine,
    side: Chirality,
    grid: int = 10_000,
    seed: int = DEFAULT_SEED,
    threshold: float = ORACLE_THRESHOLD,
) -> bool:
    """Brute-force parallelism: does some grid quaternion carry L within ``threshold`` of M?

    Independent of the Plücker invariants; used as a test oracle.
    """
    if grid < 1000:
        raise ValueError("orbit oracle needs a grid of at least 1000 quaternions")
    side = Chirality.parse(side)
    U = s3_grid(grid, seed)
    mats = left_matrix(U) if side is Chirality.LEFT else right_matrix(U)
    # unit quaternion multiplication is orthogonal, images stay orthonormal
    B = mats @ L.basis
    P = B @ B.swapaxes(-1, -2)
    d = np.linalg.norm(P - M.projector, axis=(1, 2))
    return bool(d.min() < threshold)


def class_sample(L: ProjLine, side: Chirality, n: int, seed: int = DEFAULT_SEED) -> list:
    """``n`` members of the class of L, parallels through quasi-uniform points."""
    if n < 1:
        raise ValueError("n must be positive")
    return [clifford_parallel(ProjPoint(v), L, side) for v in s3_grid(n, seed)]


def pso4_matrix(u, w) -> np.ndarray:
    """Matrix of x -> u x w^{-1}; these maps make up SO(4)."""
    return left_matrix(_as_quaternion(u)) @ right_matrix(qinv(_as_quaternion(w)))


def random_unit_quaternions(rng: np.random.Generator, n: int | None = None) -> np.ndarray:
    shape = (4,) if n is None else (n, 4)
    q = rng.normal(size=shape)
    return q / np.linalg.norm(q, axis=-1, keepdims=True)
