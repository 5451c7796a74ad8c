"""Points, lines and hyperplanes of real projective 3-space.

Points and lines are 1- and 2-dimensional subspaces of R^4. Every object is
stored in a canonical numerical form so that equal subspaces compare equal
up to floating point noise:

* a point is a unit vector whose first component above ``1e-12`` in
  absolute value is positive;
* a line carries an orthonormal basis (4x2) and its unit Plücker vector
  ``(p01, p02, p03, p23, p31, p12)`` with the same sign rule;
* a hyperplane is represented by its canonical unit normal.

Distances on the line Grassmannian use the projector (gap) metric
``||P_L - P_M||_F`` which ranges over ``[0, 2]``.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .config import CONVERGENCE_WINDOW, TOL_CONVERGENCE, TOL_INCIDENCE, TOL_MEET_ANGLE
from .errors import (
    DegenerateJoin,
    EmptySet,
    GeometryError,
    IdenticalLines,
    InsufficientData,
)

SIGN_TOL = 1e-12
PLUCKER_INDEX = ((0, 1), (0, 2), (0, 3), (2, 3), (3, 1), (1, 2))


def canonical_sign(v: np.ndarray) -> np.ndarray:
    """Flip ``v`` so that its first non-negligible component is positive."""
    v = np.asarray(v, dtype=float)
    for x in v:
        if abs(x) > SIGN_TOL:
            return -v if x < 0 else v.copy()
    return v.copy()


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(-1)
    n = np.linalg.norm(v)
    if not np.isfinite(n) or n == 0.0:
        raise GeometryError("zero or non-finite vector does not define a subspace")
    return v / n


class ProjPoint:
    """A point of PG(3,R): the span of a nonzero vector of R^4."""

    __slots__ = ("coords",)

    def __init__(self, v):
        v = np.asarray(v, dtype=float).reshape(-1)
        if v.shape != (4,):
            raise GeometryError(f"a point needs 4 homogeneous coordinates, got {v.shape}")
        object.__setattr__(self, "coords", _frozen(canonical_sign(_unit(v))))

    def __setattr__(self, name, value):
        raise AttributeError("ProjPoint is immutable")

    def __repr__(self):
        return f"ProjPoint({np.array2string(self.coords, precision=6)})"

    def to_json(self) -> list:
        return [float(x) for x in self.coords]

    def distance(self, other: "ProjPoint") -> float:
        """Sine of the angle between the two 1-dimensional subspaces."""
        c = float(np.dot(self.coords, other.coords))
        r = other.coords - c * self.coords
        return float(np.linalg.norm(r))


def basis_point(i: int) -> ProjPoint:
    """The coordinate point <e_i> (0-based index)."""
    e = np.zeros(4)
    e[i] = 1.0
    return ProjPoint(e)


def orthonormal_basis(vectors, rank: int, tol: float = TOL_INCIDENCE) -> np.ndarray:
    """Orthonormal basis of the span of the columns, which must have ``rank``."""
    A = np.asarray(vectors, dtype=float)
    if A.shape[0] != 4:
        A = A.T
    scale = np.max(np.abs(A)) if A.size else 0.0
    if scale == 0.0 or not np.isfinite(scale):
        raise GeometryError("degenerate spanning set")
    U, s, _ = np.linalg.svd(A / scale, full_matrices=False)
    if len(s) < rank or s[rank - 1] <= tol * s[0]:
        raise GeometryError(f"spanning set has rank < {rank}")
    if len(s) > rank and s[rank] > tol * s[0]:
        raise GeometryError(f"spanning set has rank > {rank}")
    return U[:, :rank]


def plucker_of(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.array([x[i] * y[j] - x[j] * y[i] for i, j in PLUCKER_INDEX])


def klein_residual(p: Sequence[float]) -> float:
    return float(p[0] * p[3] + p[1] * p[4] + p[2] * p[5])


def plucker_matrix(p: Sequence[float]) -> np.ndarray:
    """Antisymmetric 4x4 matrix x y^T - y x^T of a Plücker vector."""
    P = np.zeros((4, 4))
    for value, (i, j) in zip(p, PLUCKER_INDEX):
        P[i, j] = value
        P[j, i] = -value
    return P


class ProjLine:
    """A line of PG(3,R): a 2-dimensional subspace of R^4."""

    __slots__ = ("basis", "plucker")

    def __init__(self, vectors):
        B = orthonormal_basis(vectors, 2)
        # one more Gram-Schmidt pass pins orthonormality at machine precision
        B, _ = np.linalg.qr(B)
        p = plucker_of(B[:, 0], B[:, 1])
        object.__setattr__(self, "basis", _frozen(B))
        object.__setattr__(self, "plucker", _frozen(canonical_sign(p / np.linalg.norm(p))))

    def __setattr__(self, name, value):
        raise AttributeError("ProjLine is immutable")

    def __repr__(self):
        return f"ProjLine(plucker={np.array2string(self.plucker, precision=6)})"

    @classmethod
    def span(cls, *vectors) -> "ProjLine":
        return cls(np.column_stack([np.asarray(v, dtype=float) for v in vectors]))

    @classmethod
    def from_plucker(cls, p, tol: float = 1e-8) -> "ProjLine":
        p = _unit(p)
        if p.shape != (6,):
            raise GeometryError("a Plücker vector has 6 coordinates")
        if abs(klein_residual(p)) > tol:
            raise GeometryError("vector does not lie on the Klein quadric")
        U, _, _ = np.linalg.svd(plucker_matrix(p))
        return cls(U[:, :2])

    @property
    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def points(self, thetas) -> np.ndarray:
        """Unit vectors cos(t) x + sin(t) y of the point circle, one row per angle."""
        thetas = np.asarray(thetas, dtype=float)
        return np.cos(thetas)[:, None] * self.basis[:, 0] + np.sin(thetas)[:, None] * self.basis[:, 1]

    def to_json(self) -> dict:
        return {"basis": self.basis.tolist(), "plucker": self.plucker.tolist()}


class Hyperplane:
    """A plane of PG(3,R), stored by its unit normal vector."""

    __slots__ = ("normal",)

    def __init__(self, normal):
        object.__setattr__(self, "normal", _frozen(canonical_sign(_unit(normal))))

    def __setattr__(self, name, value):
        raise AttributeError("Hyperplane is immutable")

    def __repr__(self):
        return f"Hyperplane(normal={np.array2string(self.normal, precision=6)})"

    @classmethod
    def spanned_by(cls, *vectors) -> "Hyperplane":
        A = np.column_stack([np.asarray(v, dtype=float) for v in vectors])
        orthonormal_basis(A, 3)
        U, _, _ = np.linalg.svd(A)
        return cls(U[:, 3])

    def contains_point(self, p: ProjPoint, tol: float = TOL_INCIDENCE) -> bool:
        return abs(float(self.normal @ p.coords)) < tol

    def contains_line(self, L: ProjLine, tol: float = TOL_INCIDENCE) -> bool:
        return float(np.linalg.norm(self.normal @ L.basis)) < tol

    def basis(self) -> np.ndarray:
        """Orthonormal 4x3 basis of the underlying 3-dimensional subspace."""
        U, _, _ = np.linalg.svd(self.normal.reshape(4, 1))
        return U[:, 1:]


def join(p: ProjPoint, q: ProjPoint, tol: float = TOL_INCIDENCE) -> ProjLine:
    """The line p ∨ q through two distinct points."""
    if p.distance(q) <= tol:
        raise DegenerateJoin("points coincide; no unique joining line")
    return ProjLine(np.column_stack([p.coords, q.coords]))


def contains(L: ProjLine, p: ProjPoint, tol: float = TOL_INCIDENCE) -> bool:
    return incidence_residual(L, p) < tol


def incidence_residual(L: ProjLine, p: ProjPoint) -> float:
    """``||(I - P_L) p||``, zero exactly when p lies on L."""
    v = p.coords
    return float(np.linalg.norm(v - L.basis @ (L.basis.T @ v)))


def principal_sines(L: ProjLine, M: ProjLine) -> np.ndarray:
    """Sines of the two principal angles between L and M, ascending.

    Computed from the component of M orthogonal to L, which stays accurate
    for tiny angles where cosines would round to 1.
    """
    R = M.basis - L.basis @ (L.basis.T @ M.basis)
    return np.sort(np.linalg.svd(R, compute_uv=False))


def meet_residual(L: ProjLine, M: ProjLine) -> float:
    """Sine of the smallest principal angle; zero iff L and M share a point."""
    return float(principal_sines(L, M)[0])


def line_distance(L: ProjLine, M: ProjLine) -> float:
    return float(np.linalg.norm(L.projector - M.projector))


def meet(L: ProjLine, M: ProjLine, tol: float = TOL_MEET_ANGLE) -> ProjPoint | None:
    """Common point of two lines, or ``None`` when they are skew."""
    if line_distance(L, M) < TOL_INCIDENCE:
        raise IdenticalLines("meet of a line with itself is not a point")
    R = M.basis - L.basis @ (L.basis.T @ M.basis)
    _, s, Vt = np.linalg.svd(R)
    if s[-1] >= tol:
        return None
    v = M.basis @ Vt[-1]
    # average with the projection onto L so the point sits on both lines
    w = L.basis @ (L.basis.T @ v)
    return ProjPoint(v + w)


def hausdorff_distance(A: Iterable[ProjLine], B: Iterable[ProjLine]) -> float:
    A, B = list(A), list(B)
    if not A or not B:
        raise EmptySet("Hausdorff distance needs two nonempty sets")
    PA = np.stack([L.projector for L in A])
    PB = np.stack([L.projector for L in B])
    D = np.linalg.norm(PA[:, None] - PB[None, :], axis=(2, 3))
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


def limit_detect(
    trace: Sequence[ProjLine],
    window: int = CONVERGENCE_WINDOW,
    tol: float = TOL_CONVERGENCE,
) -> ProjLine | None:
    """Last element of ``trace`` if the final ``window`` lines are mutually ``tol``-close."""
    if window < 1 or len(trace) < window:
        raise InsufficientData(f"need at least {window} lines, got {len(trace)}")
    tail = trace[len(trace) - window:]
    for i in range(window):
        for j in range(i + 1, window):
            if line_distance(tail[i], tail[j]) >= tol:
                return None
    return tail[-1]


def coordinate_line(i: int, j: int) -> ProjLine:
    """The line <e_i, e_j> (0-based indices)."""
    E = np.eye(4)
    return ProjLine(E[:, [i, j]])


# JSON ingest -----------------------------------------------------------------

def point_from_json(data) -> ProjPoint:
    v = np.asarray(data, dtype=float)
    if v.shape != (4,):
        raise GeometryError("a point is an array of 4 reals")
    return ProjPoint(v)


def line_from_json(data) -> ProjLine:
    if not isinstance(data, dict):
        raise GeometryError("a line is an object with 'basis', 'span_points' or 'plucker'")
    if "basis" in data:
        B = np.asarray(data["basis"], dtype=float)
        if B.shape != (4, 2):
            raise GeometryError("'basis' must be a 4x2 array")
        return ProjLine(B)
    if "span_points" in data:
        pts = data["span_points"]
        if len(pts) != 2:
            raise GeometryError("'span_points' needs exactly two points")
        return join(point_from_json(pts[0]), point_from_json(pts[1]))
    if "plucker" in data:
        return ProjLine.from_plucker(data["plucker"])
    raise GeometryError("unrecognized line encoding")
