"""Constructive versions of three tools about topological parallelisms.

* :func:`avoiding_parallel` finds a line in a given class missing finitely
  many obstacle lines. Each obstacle not in the class meets only a circle's
  worth of class members, so random draws succeed almost surely.
* :func:`common_transversal_parallels` finds two distinct parallel lines
  that both meet two skew lines. The map from the torus of transversals to
  the projective plane of classes cannot be injective, so collisions exist;
  they are located on a grid and polished by damped Gauss-Newton steps.
* :func:`pencil_equivariance_check` measures how far ``L -> Pi(q, L)`` is
  from intertwining the actions of g on the pencils through two fixed
  points, and :func:`quotient_signature` gives the topological data
  (fixed components and their attracting/repelling role) that any such
  intertwining homeomorphism would have to preserve.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .clifford import (
    Chirality,
    class_invariant,
    clifford_parallel,
    invariant_distance,
    is_parallel,
    split_vector,
)
from .config import DEFAULT_SEED, TOL_INVARIANT
from .errors import CollisionNotFound, IdenticalLines, NotDisjoint, NotFixed, SearchExhausted
from .geometry import (
    PLUCKER_INDEX,
    ProjLine,
    ProjPoint,
    join,
    line_distance,
    meet_residual,
)
from .collineation import apply_line, apply_point, as_collineation
from .jordan import jordan_structure

MEET_MARGIN = 1e-3
REFINE_TARGET = 1e-11


def random_point(rng: np.random.Generator) -> ProjPoint:
    return ProjPoint(rng.normal(size=4))


def random_line(rng: np.random.Generator) -> ProjLine:
    return ProjLine(rng.normal(size=(4, 2)))


def avoiding_parallel(
    M: ProjLine,
    obstacles=(),
    side=Chirality.LEFT,
    seed: int = DEFAULT_SEED,
    max_tries: int = 1000,
    margin: float = MEET_MARGIN,
) -> ProjLine:
    """A line parallel to M that meets none of ``obstacles``.

    Candidates are parallels to M through random points. A candidate is
    kept when the smallest principal angle to every obstacle has sine above
    ``margin``, which keeps the result clear of near-intersections.
    """
    obstacles = list(obstacles)
    if len(obstacles) > 16:
        raise ValueError("at most 16 obstacles are supported")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        N = clifford_parallel(random_point(rng), M, side)
        if all(meet_residual(N, L) > margin for L in obstacles):
            return N
    raise SearchExhausted(f"no parallel avoiding {len(obstacles)} obstacles in {max_tries} draws")


@dataclass(frozen=True)
class TransversalPair:
    M: ProjLine
    N: ProjLine
    anchors: tuple  # ((p, q), (p2, q2)) with M = p v q, N = p2 v q2
    params: tuple  # angles (theta, phi, theta2, phi2)
    defect: float
    history: tuple = field(default=())

    def check(self, K: ProjLine, L: ProjLine, side) -> dict:
        """Evaluate every type invariant; returns name -> bool."""
        return {
            "distinct": line_distance(self.M, self.N) > 1e-6,
            "M_meets_K": meet_residual(self.M, K) < 1e-8,
            "M_meets_L": meet_residual(self.M, L) < 1e-8,
            "N_meets_K": meet_residual(self.N, K) < 1e-8,
            "N_meets_L": meet_residual(self.N, L) < 1e-8,
            "parallel": is_parallel(self.M, self.N, side),
        }

    def to_json(self) -> dict:
        (p, q), (p2, q2) = self.anchors
        return {
            "M": self.M.to_json(),
            "N": self.N.to_json(),
            "anchors": [[p.to_json(), q.to_json()], [p2.to_json(), q2.to_json()]],
            "params": list(self.params),
            "defect": self.defect,
        }


def _circle(L: ProjLine, t):
    x, y = L.basis[:, 0], L.basis[:, 1]
    t = np.asarray(t, dtype=float)
    p = np.cos(t)[..., None] * x + np.sin(t)[..., None] * y
    dp = -np.sin(t)[..., None] * x + np.cos(t)[..., None] * y
    return p, dp


def _wedge(P, Q):
    return np.stack([P[..., i] * Q[..., j] - P[..., j] * Q[..., i] for i, j in PLUCKER_INDEX], axis=-1)


def _invariant_field(K, L, theta, phi, side):
    """Unit split vector of p(theta) v q(phi) and its derivatives in both angles."""
    p, dp = _circle(K, theta)
    q, dq = _circle(L, phi)
    w = split_vector(_wedge(p, q), side)
    n = np.linalg.norm(w)
    v = w / n
    proj = (np.eye(3) - np.outer(v, v)) / n
    dv_theta = proj @ split_vector(_wedge(dp, q), side)
    dv_phi = proj @ split_vector(_wedge(p, dq), side)
    return v, dv_theta, dv_phi


def _refine(K, L, x0, sign, side, target=REFINE_TARGET, max_iter=60):
    """Damped Gauss-Newton on v(t1, f1) - sign v(t2, f2) = 0.

    Every accepted step strictly decreases the residual norm; the step is
    halved until it does.
    """

    def residual(x):
        v1, a1, b1 = _invariant_field(K, L, x[0], x[1], side)
        v2, a2, b2 = _invariant_field(K, L, x[2], x[3], side)
        r = v1 - sign * v2
        J = np.column_stack([a1, b1, -sign * a2, -sign * b2])
        return r, J

    x = np.asarray(x0, dtype=float)
    r, J = residual(x)
    f = float(np.linalg.norm(r))
    history = [f]
    for _ in range(max_iter):
        if f < target:
            break
        step = -np.linalg.lstsq(J, r, rcond=None)[0]
        t = 1.0
        for _ in range(40):
            xn = x + t * step
            rn, Jn = residual(xn)
            fn = float(np.linalg.norm(rn))
            if fn < f:
                break
            t *= 0.5
        else:
            break
        x, r, J, f = xn, rn, Jn, fn
        history.append(f)
    return x, f, history


def _torus_gap(a, b):
    d = np.abs(a - b) % np.pi
    return np.minimum(d, np.pi - d)


def common_transversal_parallels(
    K: ProjLine,
    L: ProjLine,
    side=Chirality.LEFT,
    grid: int = 64,
    seed: int = DEFAULT_SEED,
    max_grid: int = 256,
    candidates: int = 8,
) -> TransversalPair:
    """Two distinct parallel lines, each meeting both of the skew lines K and L."""
    side = Chirality.parse(side)
    try:
        if meet_residual(K, L) < 1e-8:
            raise NotDisjoint("K and L intersect")
    except IdenticalLines:
        raise NotDisjoint("K and L coincide") from None
    rng = np.random.default_rng(seed)
    g = grid
    while g <= max_grid:
        pair = _search_grid(K, L, side, g, rng.uniform(0, np.pi / g, size=2), candidates)
        if pair is not None:
            return pair
        g *= 2
    raise CollisionNotFound(f"no parallel transversals found up to grid {max_grid}")


def _search_grid(K, L, side, grid, offset, candidates):
    t = np.arange(grid) * np.pi / grid
    theta, phi = np.meshgrid(t + offset[0], t + offset[1], indexing="ij")
    P, _ = _circle(K, theta.ravel())
    Q, _ = _circle(L, phi.ravel())
    W = split_vector(_wedge(P, Q), side)
    V = W / np.linalg.norm(W, axis=1, keepdims=True)
    n = len(V)
    tree = cKDTree(np.vstack([V, -V]))
    dist, idx = tree.query(V, k=min(24, 2 * n))
    th, ph = theta.ravel(), phi.ravel()
    exclusion = 4 * np.pi / grid
    jj = idx % n
    far = np.maximum(_torus_gap(th[:, None], th[jj]), _torus_gap(ph[:, None], ph[jj])) >= exclusion
    valid = far & (jj > np.arange(n)[:, None])
    has = valid.any(axis=1)
    first = np.argmax(valid, axis=1)
    found = [
        (dist[i, k], i, jj[i, k], 1.0 if idx[i, k] < n else -1.0)
        for i, k in zip(np.nonzero(has)[0], first[has])
    ]
    found.sort()
    for d, i, j, sign in found[:candidates]:
        x, f, history = _refine(K, L, [th[i], ph[i], th[j], ph[j]], sign, side)
        if f > 1e-9:
            continue
        if min(_torus_gap(x[0], x[2]), _torus_gap(x[1], x[3])) < 1e-3:
            continue
        p, _ = _circle(K, x[0])
        q, _ = _circle(L, x[1])
        p2, _ = _circle(K, x[2])
        q2, _ = _circle(L, x[3])
        anchors = ((ProjPoint(p), ProjPoint(q)), (ProjPoint(p2), ProjPoint(q2)))
        M, N = join(*anchors[0]), join(*anchors[1])
        pair = TransversalPair(M, N, anchors, tuple(float(a) for a in x),
                               invariant_distance(M, N, side), tuple(history))
        if all(pair.check(K, L, side).values()):
            return pair
    return None


# pencils through fixed points --------------------------------------------------

def _check_fixed(g, p: ProjPoint, tol=1e-9):
    if apply_point(g, p).distance(p) > tol:
        raise NotFixed(f"{p} is not fixed")


def pencil_equivariance_check(
    g,
    p: ProjPoint,
    q: ProjPoint,
    side=Chirality.LEFT,
    samples: int = 200,
    seed: int = DEFAULT_SEED,
) -> float:
    """Largest ``d(Pi(q, L)^g, Pi(q, L^g))`` over sampled lines L through p."""
    g = as_collineation(g)
    _check_fixed(g, p)
    _check_fixed(g, q)
    if p.distance(q) < 1e-9:
        raise ValueError("p and q must be distinct")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        L = join(p, random_point(rng))
        lhs = apply_line(g, clifford_parallel(q, L, side))
        rhs = clifford_parallel(q, apply_line(g, L), side)
        worst = max(worst, line_distance(lhs, rhs))
    return worst


def quotient_action(g, p: ProjPoint) -> np.ndarray:
    """3x3 matrix of the map induced by g on R^4 / p, in an orthonormal basis of p^perp."""
    g = as_collineation(g)
    _check_fixed(g, p)
    U, _, _ = np.linalg.svd(p.coords.reshape(4, 1))
    Q = U[:, 1:]
    return Q.T @ g.normalized @ Q


def quotient_signature(A, tol: float = 1e-7) -> tuple:
    """Fixed components of the projective map A with their dynamical role.

    One entry per real eigenvalue: (dimension of the eigenspace, role), with
    role ``attracting`` when its modulus strictly exceeds every other
    eigenvalue's, ``repelling`` when strictly below, ``saddle`` when
    strictly between, ``neutral`` otherwise. These are invariants of
    topological conjugacy.
    """
    clusters = jordan_structure(A, tol)
    out = []
    for c in clusters:
        if not c.is_real:
            continue
        mod = abs(c.value)
        others = [abs(o.value) for o in clusters if o is not c]
        rel = 1e-6 * mod
        if others and all(m < mod - rel for m in others):
            role = "attracting"
        elif others and all(m > mod + rel for m in others):
            role = "repelling"
        elif any(m < mod - rel for m in others) and any(m > mod + rel for m in others) \
                and not any(abs(m - mod) <= rel for m in others):
            role = "saddle"
        else:
            role = "neutral"
        out.append((len(c.sizes), role))
    return tuple(sorted(out))
