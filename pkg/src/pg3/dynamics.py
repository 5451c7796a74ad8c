"""Orbits of collineations on the line space and falsification experiments.

The experiments follow one pattern. Given a collineation g of an excluded
type, pick a pair of parallel lines (L, N) and a sequence of powers
``delta_k = g^{n(k)}``. If g preserved the parallelism, every image pair
``(delta_k L, delta_k N)`` would be parallel, and since a topological
parallelism is closed, so would the limits (X, Y) of the two image
sequences. A :class:`Witness` records limits that are distinct and meet in a
point, which no pair of parallel lines can do.

Powers are taken with exponentiation by squaring in extended precision
(mpmath), renormalizing by the largest entry. Long orbits of matrices with
eigenvalues of different moduli otherwise underflow the weaker eigenspaces,
which the experiments need to see.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .clifford import Chirality, clifford_parallel, invariant_distance, pso4_matrix
from .collineation import (
    Case,
    Collineation,
    JordanCaseData,
    apply_line,
    as_collineation,
    automorphism_verdict,
    canonical_matrix,
    classify_case,
)
from .config import CONVERGENCE_WINDOW, DEFAULT_EPS, DEFAULT_NMAX, DEFAULT_SEED, TOL_CONVERGENCE
from .errors import ScheduleNotFound, WitnessSearchFailed
from .geometry import (
    ProjLine,
    ProjPoint,
    basis_point,
    coordinate_line,
    incidence_residual,
    join,
    limit_detect,
    line_distance,
    meet,
    meet_residual,
)
from .lemmas import (
    avoiding_parallel,
    common_transversal_parallels,
    pencil_equivariance_check,
    quotient_action,
    quotient_signature,
    random_line,
    random_point,
)

MP_DPS = 60
PERSISTENCE_TOL = 1e-6
MEET_TOL = 1e-6
DISTINCT_TOL = 1e-3
# parabolic cases converge like 1/n; schedules for them begin here
LONG_START = 10**6


# powers ------------------------------------------------------------------------

def matrix_power(g, n: int):
    """g^n in double precision, renormalized by the largest entry at every step."""
    g = as_collineation(g)
    M = g.normalized if n >= 0 else np.linalg.inv(g.normalized)
    M = M / np.max(np.abs(M))
    n = abs(int(n))
    result = np.eye(4)
    while n:
        if n & 1:
            result = result @ M
            result /= np.max(np.abs(result))
        n >>= 1
        if n:
            M = M @ M
            M /= np.max(np.abs(M))
    return Collineation(result, check=False)


def _mp_matrix(A) -> mpmath.matrix:
    return mpmath.matrix([[mpmath.mpf(float(x)) for x in row] for row in np.asarray(A)])


def _mp_max(M) -> mpmath.mpf:
    return max(abs(M[i, j]) for i in range(M.rows) for j in range(M.cols))


def mp_power(g, n: int) -> mpmath.matrix:
    """g^n as a renormalized mpmath matrix (working precision ``MP_DPS``)."""
    g = as_collineation(g)
    with mpmath.workdps(MP_DPS):
        M = _mp_matrix(g.normalized)
        if n < 0:
            M = M ** -1
        n = abs(int(n))
        M = M / _mp_max(M)
        result = mpmath.eye(4)
        while n:
            if n & 1:
                result = result * M
                result = result / _mp_max(result)
            n >>= 1
            if n:
                M = M * M
                M = M / _mp_max(M)
        return result


def _mp_images(P, vectors) -> list:
    out = []
    with mpmath.workdps(MP_DPS):
        for v in vectors:
            w = P * mpmath.matrix([mpmath.mpf(float(x)) for x in v])
            out.append(w / mpmath.norm(w))
    return out


def _mp_orthonormalize(u, v):
    """Orthonormal pair spanning (u, v), computed before rounding to doubles."""
    with mpmath.workdps(MP_DPS):
        c = sum(u[i] * v[i] for i in range(4))
        w = v - c * u
        return [float(x) for x in u], [float(x) for x in w / mpmath.norm(w)]


def power_point(g, n: int, p: ProjPoint, power=None) -> ProjPoint:
    P = mp_power(g, n) if power is None else power
    (w,) = _mp_images(P, [p.coords])
    return ProjPoint([float(x) for x in w])


def power_line(g, n: int, L: ProjLine, power=None, basis=None) -> ProjLine:
    """Image of L under g^n. ``basis`` picks the spanning vectors to push forward."""
    P = mp_power(g, n) if power is None else power
    B = L.basis if basis is None else np.asarray(basis, dtype=float)
    u, v = _mp_images(P, [B[:, 0], B[:, 1]])
    x, y = _mp_orthonormalize(u, v)
    return ProjLine(np.column_stack([x, y]))


# recurrence schedules -------------------------------------------------------------

@dataclass(frozen=True)
class RecurrenceSchedule:
    """Exponents n(k) along which the unit-modulus part of g returns close to 1."""

    indices: tuple
    target_defect: float
    defects: tuple = ()

    def __iter__(self):
        return iter(self.indices)

    def __len__(self):
        return len(self.indices)


def _wrap(x):
    return np.mod(x + np.pi, 2 * np.pi) - np.pi


def recurrence_defect(units, n) -> np.ndarray:
    """max_j |u_j^n - 1| for an array of exponents n."""
    angles = np.angle(np.asarray(units, dtype=complex))
    n = np.atleast_1d(np.asarray(n, dtype=float))
    if not len(angles):
        return np.zeros(len(n))
    phase = _wrap(np.outer(n, angles))
    return np.max(2 * np.abs(np.sin(phase / 2)), axis=1)


def recurrence_schedule(
    units,
    K: int,
    eps: float = DEFAULT_EPS,
    nmax: int = DEFAULT_NMAX,
    growth: float = 1.0,
    start: int = 1,
) -> RecurrenceSchedule:
    """First K exponents start <= n <= nmax with every |u^n - 1| < eps.

    With ``growth > 1`` each index is at least ``growth`` times the previous
    one, which pushes the schedule out to large exponents quickly.

    The result equals that of a linear scan over n. Candidates are the
    returns of the first eigenvalue close to 1, enumerated by stepping
    through the short return times of its rotation; only these are tested
    against the remaining eigenvalues.
    """
    units = [complex(u) for u in units]
    if any(abs(abs(u) - 1.0) > 1e-9 for u in units):
        raise ValueError("recurrence needs unit-modulus eigenvalues")
    if K < 1 or eps <= 0:
        raise ValueError("K and eps must be positive")
    theta = float(np.angle(units[0])) if units else 0.0
    alpha = 2 * np.arcsin(min(eps / 2, 1.0)) * (1 + 1e-9) if eps < 2 else 4.0
    span = int(min(nmax, 40 * np.pi / alpha + 16))
    steps = np.arange(1, span + 1)
    returns = steps[np.abs(_wrap(steps * theta)) < 2 * alpha]
    best = [np.inf]

    def scan(start):
        chunk = 4096
        while start <= nmax:
            n = np.arange(start, min(start + chunk, nmax + 1))
            near = np.nonzero(np.abs(_wrap(n * theta)) < alpha)[0]
            best[0] = min(best[0], float(recurrence_defect(units, n).min()))
            if len(near):
                return int(n[near[0]])
            start += chunk
            chunk = min(chunk * 2, 1 << 20)
        return None

    indices, defects = [], []
    n = scan(max(1, int(start)))
    while n is not None and len(indices) < K:
        d = float(recurrence_defect(units, [n])[0])
        best[0] = min(best[0], d)
        if d < eps:
            indices.append(n)
            defects.append(d)
            nxt = max(n + 1, int(np.ceil(growth * n)))
            if nxt > n + 1:
                n = scan(nxt)
                continue
        phase = _wrap(n * theta)
        ok = returns[np.abs(_wrap(phase + returns * theta)) < alpha]
        n = n + int(ok[0]) if len(ok) else scan(n + span + 1)
        if n is not None and n > nmax:
            n = None
    if len(indices) < K:
        raise ScheduleNotFound(
            f"found {len(indices)} of {K} recurrence indices below {nmax}", best[0]
        )
    return RecurrenceSchedule(tuple(indices), eps, tuple(defects))


# traces -----------------------------------------------------------------------------

@dataclass
class TraceRecord:
    k: int
    n: int
    line: ProjLine
    distance: float = float("nan")
    class_defect: float | None = None


@dataclass
class ConvergenceTrace:
    records: list
    limit: ProjLine | None = None

    @property
    def lines(self) -> list:
        return [r.line for r in self.records]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "n", "distance_to_limit", "class_defect"])
        for r in self.records:
            cd = "" if r.class_defect is None else repr(r.class_defect)
            w.writerow([r.k, r.n, repr(r.distance), cd])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "records": [
                {"k": r.k, "n": r.n, "distance_to_limit": r.distance, "class_defect": r.class_defect}
                for r in self.records
            ],
            "limit": None if self.limit is None else self.limit.to_json(),
        }


def _finish_trace(lines, ns, window, tol, target=None) -> ConvergenceTrace:
    limit = limit_detect(lines, window, tol) if len(lines) >= window else None
    ref = target if target is not None else (limit if limit is not None else lines[-1])
    records = [TraceRecord(k, n, L, line_distance(L, ref)) for k, (n, L) in enumerate(zip(ns, lines))]
    return ConvergenceTrace(records, limit)


def line_orbit_trace(
    g,
    L: ProjLine,
    schedule,
    window: int = CONVERGENCE_WINDOW,
    tol: float = TOL_CONVERGENCE,
    target: ProjLine | None = None,
    basis=None,
) -> ConvergenceTrace:
    """Images of L under g^n for n in ``schedule``, with the detected limit.

    Distances are measured to ``target`` when given, otherwise to the
    detected limit (or the last image when none is detected).
    """
    ns = list(schedule)
    lines = [power_line(g, n, L, basis=basis) for n in ns]
    return _finish_trace(lines, ns, window, tol, target)


# certificates -----------------------------------------------------------------------

def _matrix_json(M):
    return np.asarray(M, dtype=float).tolist()


@dataclass
class Witness:
    """Two parallel lines whose image sequences converge to distinct meeting lines."""

    gamma: np.ndarray
    case: str
    proposition: str | None
    pair: tuple
    limits: tuple
    meet_point: ProjPoint | None
    meet_residual: float
    class_defect: float
    image_defect: float
    limit_separation: float
    traces: tuple
    schedule: tuple
    side: Chirality = Chirality.LEFT
    predicted: tuple = ()
    choices: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return (
            self.class_defect < PERSISTENCE_TOL
            and self.meet_residual < MEET_TOL
            and self.limit_separation > DISTINCT_TOL
        )

    def combined_trace(self) -> ConvergenceTrace:
        """Per-step trace: worst distance of either image to its limit, and the pair defect."""
        t1, t2 = self.traces
        recs = []
        for r1, r2 in zip(t1.records, t2.records):
            cd = r1.class_defect if r1.class_defect is not None else self.class_defect
            recs.append(TraceRecord(r1.k, r1.n, r1.line, max(r1.distance, r2.distance), cd))
        return ConvergenceTrace(recs, None)

    def to_json(self) -> dict:
        return {
            "kind": "limit-witness",
            "certified": self.certified,
            "case": self.case,
            "proposition": self.proposition,
            "side": self.side.value,
            "gamma": _matrix_json(self.gamma),
            "pair": [L.to_json() for L in self.pair],
            "limits": [L.to_json() for L in self.limits],
            "predicted_limits": [L.to_json() for L in self.predicted],
            "meet_point": None if self.meet_point is None else self.meet_point.to_json(),
            "meet_residual": self.meet_residual,
            "class_defect": self.class_defect,
            "image_defect": self.image_defect,
            "limit_separation": self.limit_separation,
            "schedule": list(self.schedule),
            "choices": self.choices,
        }


@dataclass
class FixedStructure:
    """Structural obstruction: a fixed configuration no invariant parallelism allows."""

    gamma: np.ndarray
    case: str
    proposition: str | None
    kind: str
    certified: bool
    data: dict

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "certified": self.certified,
            "case": self.case,
            "proposition": self.proposition,
            "gamma": _matrix_json(self.gamma),
            "data": self.data,
        }


# experiments ------------------------------------------------------------------------

W_LINE = coordinate_line(0, 1)
S_LINE = coordinate_line(2, 3)


def _geometric(start: int, count: int, ratio: int = 2) -> list:
    return [start * ratio**k for k in range(count)]


def _gap_start(ratio: float) -> int:
    """Exponent after which ``ratio**-n`` is below e^-40."""
    return max(8, int(np.ceil(40.0 / np.log(ratio))))


def _witness(gamma, data, pair, traces, schedule, side, predicted, choices, pair_defects=None):
    X, Y = traces[0].limit, traces[1].limit
    if X is None or Y is None:
        raise WitnessSearchFailed(
            "image sequences did not settle",
            {"last_distances": [t.records[-1].distance for t in traces]},
        )
    residual = meet_residual(X, Y)
    separation = line_distance(X, Y)
    point = None
    if separation > 1e-9:
        point = meet(X, Y, tol=max(MEET_TOL, residual * 2))
    if pair_defects is None:
        class_defect = invariant_distance(pair[0], pair[1], side)
    else:
        class_defect = max(pair_defects)
    image_defect = max(
        invariant_distance(r1.line, r2.line, side)
        for r1, r2 in zip(traces[0].records, traces[1].records)
    )
    w = Witness(
        gamma=np.asarray(gamma, dtype=float),
        case=data.label.value,
        proposition=_tag(data),
        pair=tuple(pair),
        limits=(X, Y),
        meet_point=point,
        meet_residual=residual,
        class_defect=class_defect,
        image_defect=image_defect,
        limit_separation=separation,
        traces=tuple(traces),
        schedule=tuple(schedule),
        side=side,
        predicted=tuple(predicted),
        choices=choices,
    )
    if not w.certified:
        raise WitnessSearchFailed(
            "limits do not certify a contradiction",
            {"meet_residual": residual, "class_defect": class_defect, "separation": separation},
        )
    return w


def _tag(data: JordanCaseData):
    from .collineation import EXCLUSION_TAG

    return EXCLUSION_TAG.get(data.label)


def _unit_schedule(units, K, eps, nmax, growth=1.0, start=1):
    try:
        sched = recurrence_schedule(units, K, eps=eps, nmax=nmax, growth=growth, start=start)
    except ScheduleNotFound as exc:
        raise WitnessSearchFailed(str(exc), {"best_defect": exc.best_defect}) from None
    return list(sched.indices)


def _trace_pair(G, L, N, ns, side, window, tol, targets=(None, None), bases=(None, None)):
    t1 = line_orbit_trace(G, L, ns, window, tol, targets[0], bases[0])
    t2 = line_orbit_trace(G, N, ns, window, tol, targets[1], bases[1])
    return t1, t2


def _complex_axes(rng):
    phi, psi = rng.uniform(0, 2 * np.pi, size=2)
    x = np.array([np.cos(phi), np.sin(phi), 0.0, 0.0])
    y = np.array([0.0, 0.0, np.cos(psi), np.sin(psi)])
    return x, y


def _experiment_a1(G, data, side, rng, seed, cfg):
    x, y = _complex_axes(rng)
    M = ProjLine.span(x, y)
    N = avoiding_parallel(M, [W_LINE], side, seed)
    a, c = data.params["a"], data.params["c"]
    units = [a, c / abs(c)]
    ns = _unit_schedule(units, cfg["K"], cfg["eps"], cfg["nmax"], start=_gap_start(abs(c)))
    t = _trace_pair(G, M, N, ns, side, cfg["window"], cfg["tol"], targets=(M, S_LINE),
                    bases=(np.column_stack([x, y]), None))
    return _witness(G, data, (M, N), t, ns, side, (M, S_LINE), {"x": x.tolist(), "y": y.tolist()})


def _experiment_a2(G, data, side, rng, seed, cfg):
    a = complex(data.params["a"])
    anchors = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, a.real, a.imag]]).T
    L = ProjLine(anchors)
    M = avoiding_parallel(L, [W_LINE], side, seed)
    ns = _unit_schedule([a], cfg["K"], cfg["eps"], cfg["nmax"], growth=2.0, start=LONG_START)
    t = _trace_pair(G, L, M, ns, side, cfg["window"], cfg["tol"], targets=(L, W_LINE),
                    bases=(anchors, None))
    return _witness(G, data, (L, M), t, ns, side, (L, W_LINE), {})


def _experiment_b1_equal(G, data, side, rng, seed, cfg):
    a, r = complex(data.params["a"]), float(data.params["r"])
    if r < 1:
        G = np.linalg.inv(G)
        a = a.conjugate()
    x, y = _complex_axes(rng)
    L = ProjLine.span(x, y)
    M = avoiding_parallel(L, [S_LINE, W_LINE], side, seed)
    ns = _unit_schedule([a], cfg["K"], cfg["eps"], cfg["nmax"], start=_gap_start(max(r, 1 / r)))
    t = _trace_pair(G, L, M, ns, side, cfg["window"], cfg["tol"], targets=(L, S_LINE),
                    bases=(np.column_stack([x, y]), None))
    return _witness(G, data, (L, M), t, ns, side, (L, S_LINE), {"inverted": r < 1})


def _experiment_top_two(G, data, side, rng, seed, cfg, units, extra, ratio):
    """Eigenvalue moduli increase strictly along e1 < e2 < e3 (e0 no larger than e1).

    K = e1 v e3 is fixed, M is parallel to K and misses <e1,e2> and <e0,e1>;
    points of M off the two hyperplanes flow to e3 and e2, so M tends to
    e2 v e3, which meets K.
    """
    K = coordinate_line(1, 3)
    L = coordinate_line(2, 3)
    G_plane = ProjLine.span([0, 1.0, 0, 0], [0, 0, 1.0, 0])  # e0^perp meet e3^perp
    M = avoiding_parallel(K, [G_plane, coordinate_line(0, 1)], side, seed)
    p = _line_hyperplane_point(M, 0)
    q = _line_hyperplane_point(M, 3)
    if units:
        ns = _unit_schedule(units, cfg["K"], cfg["eps"], cfg["nmax"], start=_gap_start(ratio))
    else:
        ns = _geometric(_gap_start(ratio), cfg["K"])
    t = _trace_pair(G, K, M, ns, side, cfg["window"], cfg["tol"], targets=(K, L),
                    bases=(None, np.column_stack([p.coords, q.coords])))
    choices = {"p": p.to_json(), "q": q.to_json(), **extra}
    return _witness(G, data, (K, M), t, ns, side, (K, L), choices)


def _line_hyperplane_point(M: ProjLine, i: int) -> ProjPoint:
    """The point of M with vanishing i-th coordinate."""
    row = M.basis[i]
    v = M.basis @ np.array([row[1], -row[0]])
    return ProjPoint(v)


def _experiment_b1_distinct(G, data, side, rng, seed, cfg):
    a = complex(data.params["a"])
    r, s = float(data.params["r"]), float(data.params["s"])
    sig3, sig4 = _pencil_signatures(G, 2, 3)
    if sig3 != sig4:
        return _pencil_certificate(G, data, side, seed, 2, 3, cfg)
    inverted = s < 1
    if inverted:
        a, r, s = a.conjugate(), 1.0 / s, 1.0 / r
        G = canonical_matrix(Case.B1, {"a": a, "r": r, "s": s})
    return _experiment_top_two(G, data, side, rng, seed, cfg, [a], {"inverted": inverted},
                               min(r, s / r))


def _experiment_c5(G, data, side, rng, seed, cfg):
    r, s, t = (float(data.params[k]) for k in ("r", "s", "t"))
    return _experiment_top_two(G, data, side, rng, seed, cfg, [], {}, min(s / r, t / s))


def _experiment_b2(G, data, side, rng, seed, cfg):
    a = complex(data.params["a"])
    pair = common_transversal_parallels(W_LINE, S_LINE, side, seed=seed)
    (p, q), (p2, q2) = pair.anchors
    ns = _unit_schedule([a], cfg["K"], cfg["eps"], cfg["nmax"], growth=2.0, start=LONG_START)
    e2 = basis_point(2).coords
    Mx = ProjLine.span(p.coords, e2)
    Mx2 = ProjLine.span(p2.coords, e2)
    t = _trace_pair(
        G, pair.M, pair.N, ns, side, cfg["window"], cfg["tol"], targets=(Mx, Mx2),
        bases=(np.column_stack([p.coords, q.coords]), np.column_stack([p2.coords, q2.coords])),
    )
    return _witness(G, data, (pair.M, pair.N), t, ns, side, (Mx, Mx2),
                    {"transversal": pair.to_json()})


def _experiment_c3(G, data, side, rng, seed, cfg):
    K = coordinate_line(0, 2)
    LA = avoiding_parallel(K, [W_LINE], side, seed)
    ns = _geometric(_gap_start(1.0 / float(data.params["r"])), cfg["K"])
    t = _trace_pair(G, K, LA, ns, side, cfg["window"], cfg["tol"], targets=(K, S_LINE))
    return _witness(G, data, (K, LA), t, ns, side, (K, S_LINE), {})


def _experiment_c1(G, data, side, rng, seed, cfg):
    """Two-sided dynamics of a single 4x4 Jordan block.

    With s_n = g^{-n} e2 and M_n = s_n v e3, the images g^n M_n tend to
    e0 v e2, while the parallels through e0, pushed forward, tend to e0 v e1.
    Invariance would make those images parallel; the limits meet in e0.
    """
    p1 = basis_point(0)
    e3 = basis_point(3)
    ns = _geometric(16, cfg["K_long"])
    A_lines, B_lines, defects = [], [], []
    for n in ns:
        Pn = mp_power(G, n)
        Pinv = mp_power(G, -n)
        s_n = power_point(G, -n, basis_point(2), power=Pinv)
        M_n = join(s_n, e3)
        par = clifford_parallel(p1, M_n, side)
        defects.append(invariant_distance(M_n, par, side))
        # push forward M_n through the exact preimage basis (e2, e3) of its image
        A_lines.append(power_line(G, n, M_n, power=Pn, basis=np.column_stack([s_n.coords, e3.coords])))
        B_lines.append(power_line(G, n, par, power=Pn, basis=_through(par, p1)))
    L13, L12 = coordinate_line(0, 2), coordinate_line(0, 1)
    t1 = _finish_trace(B_lines, ns, cfg["window"], cfg["tol"], L12)
    t2 = _finish_trace(A_lines, ns, cfg["window"], cfg["tol"], L13)
    for rec, d in zip(t1.records, defects):
        rec.class_defect = d
    pair = (clifford_parallel(p1, join(power_point(G, -ns[-1], basis_point(2)), e3), side),
            join(power_point(G, -ns[-1], basis_point(2)), e3))
    return _witness(G, data, pair, (t1, t2), ns, side, (L12, L13), {}, pair_defects=defects)


def _through(L: ProjLine, p: ProjPoint) -> np.ndarray:
    """Basis of L whose first vector is p (which must lie on L)."""
    v = p.coords
    B = L.basis
    other = B[:, np.argmin(np.abs(B.T @ v))]
    w = other - (other @ v) * v
    return np.column_stack([v, w / np.linalg.norm(w)])


def _pencil_signatures(G, i, j):
    sig_i = quotient_signature(quotient_action(G, basis_point(i)))
    sig_j = quotient_signature(quotient_action(G, basis_point(j)))
    return sig_i, sig_j


def _pencil_certificate(G, data, side, seed, i, j, cfg):
    p, q = basis_point(i), basis_point(j)
    sig_p, sig_q = _pencil_signatures(G, i, j)
    defect = pencil_equivariance_check(G, p, q, side, samples=cfg["samples"], seed=seed)
    return FixedStructure(
        gamma=np.asarray(G, dtype=float),
        case=data.label.value,
        proposition=_tag(data),
        kind="pencil-obstruction",
        certified=sig_p != sig_q,
        data={
            "p": p.to_json(),
            "q": q.to_json(),
            "quotient_p": _matrix_json(quotient_action(G, p)),
            "quotient_q": _matrix_json(quotient_action(G, q)),
            "signature_p": [list(s) for s in sig_p],
            "signature_q": [list(s) for s in sig_q],
            "pencil_defect": defect,
        },
    )


def parallel_in_plane(L: ProjLine, normal, side) -> ProjLine:
    """The member of L's class contained in the plane with the given normal."""
    from .clifford import left_matrix, right_matrix

    nrm = np.asarray(normal, dtype=float)
    x, y = L.basis[:, 0], L.basis[:, 1]
    # rows: u -> n . (u x), u -> n . (u y); linear in u
    E = np.eye(4)
    if Chirality.parse(side) is Chirality.LEFT:
        A = np.array([[nrm @ (left_matrix(e) @ x) for e in E], [nrm @ (left_matrix(e) @ y) for e in E]])
        _, _, Vt = np.linalg.svd(A)
        u = Vt[-1] / np.linalg.norm(Vt[-1])
        return ProjLine(left_matrix(u) @ L.basis)
    A = np.array([[nrm @ (right_matrix(e) @ x) for e in E], [nrm @ (right_matrix(e) @ y) for e in E]])
    _, _, Vt = np.linalg.svd(A)
    u = Vt[-1] / np.linalg.norm(Vt[-1])
    return ProjLine(right_matrix(u) @ L.basis)


def _experiment_c2(G, data, side, rng, seed, cfg):
    L = coordinate_line(0, 3)
    normal = np.array([0.0, 0.0, 0.0, 1.0])
    K = parallel_in_plane(L, normal, side)
    GL = apply_line(G, L)
    Hbasis = np.eye(4)[:, :3]
    restricted = Hbasis.T @ G @ Hbasis
    from .jordan import jordan_structure

    clusters = jordan_structure(restricted)
    eigenspace_dims = [len(c.sizes) for c in clusters if c.is_real]
    e0 = basis_point(0)
    data_out = {
        "L": L.to_json(),
        "K": K.to_json(),
        "L_fixed_residual": line_distance(GL, L),
        "plane_invariant_residual": float(np.linalg.norm(G[3, :3])),
        "restricted_eigenspace_dims": eigenspace_dims,
        "K_eigenvector_residual": incidence_residual(K, e0),
        "K_parallel_defect": invariant_distance(K, L, side),
        "K_image_distance": line_distance(apply_line(G, K), K),
    }
    certified = (
        data_out["L_fixed_residual"] < 1e-9
        and data_out["plane_invariant_residual"] < 1e-12
        and eigenspace_dims == [1]
        and data_out["K_eigenvector_residual"] > DISTINCT_TOL
        and data_out["K_parallel_defect"] < 1e-9
    )
    return FixedStructure(np.asarray(G, dtype=float), data.label.value, _tag(data),
                          "fixed-line-obstruction", certified, data_out)


def _experiment_c4(G, data, side, rng, seed, cfg):
    return _pencil_certificate(G, data, side, seed, 0, 2, cfg)


_EXPERIMENTS = {
    Case.A1: _experiment_a1,
    Case.A2: _experiment_a2,
    Case.B2: _experiment_b2,
    Case.C1: _experiment_c1,
    Case.C2: _experiment_c2,
    Case.C3: _experiment_c3,
    Case.C4: _experiment_c4,
    Case.C5: _experiment_c5,
}


def falsify_invariance(
    g,
    case: JordanCaseData | None = None,
    seed: int = DEFAULT_SEED,
    side=Chirality.LEFT,
    eps: float = DEFAULT_EPS,
    nmax: int = 10**11,
    window: int = CONVERGENCE_WINDOW,
    tol: float = TOL_CONVERGENCE,
):
    """Run the contradiction experiment for an excluded collineation.

    Works in the normal-form coordinates of the case. Returns a
    :class:`Witness` for limit-based cases and a :class:`FixedStructure` for
    structural ones. Raises :class:`WitnessSearchFailed` when g is not
    excluded or no certificate emerges.
    """
    side = Chirality.parse(side)
    g = as_collineation(g)
    verdict = automorphism_verdict(g)
    if not verdict.excluded:
        raise WitnessSearchFailed(
            "collineation is a possible automorphism; nothing to falsify",
            {"invariance_defect": invariance_defect(g, side, 100, seed), "verdict": "Possible"},
        )
    data = case if case is not None else verdict.case
    G = canonical_matrix(data.label, data.params)
    rng = np.random.default_rng(seed)
    cfg = {
        # images of a fixed line drift by about the schedule defect, which must
        # stay well inside the limit-detection tolerance
        "K": 8, "K_long": 24, "eps": min(eps, tol / 4), "nmax": nmax,
        "window": window, "tol": tol, "samples": 200,
    }
    if data.label is Case.B1:
        r, s = float(data.params["r"]), float(data.params["s"])
        if abs(r - s) < 1e-9 * max(r, s):
            return _experiment_b1_equal(G, data, side, rng, seed, cfg)
        return _experiment_b1_distinct(G, data, side, rng, seed, cfg)
    return _EXPERIMENTS[data.label](G, data, side, rng, seed, cfg)


def invariance_defect(g, side=Chirality.LEFT, samples: int = 100, seed: int = DEFAULT_SEED) -> float:
    """Largest class-invariant distance between images of sampled parallel pairs."""
    if samples < 1:
        raise ValueError("samples must be positive")
    g = as_collineation(g)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        L = random_line(rng)
        M = clifford_parallel(random_point(rng), L, side)
        worst = max(worst, invariant_distance(apply_line(g, L), apply_line(g, M), side))
    return worst


def pso4_element(u, w):
    """Collineation x -> u x w^{-1} for unit quaternions u, w."""
    return as_collineation(pso4_matrix(u, w))
