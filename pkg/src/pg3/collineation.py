"""Collineations of PG(3,R): action, Jordan-type classification and verdicts.

A collineation is an invertible real 4x4 matrix taken up to a nonzero
scalar. Classification follows the normal forms used for cyclic subgroups
of PGL(4,R):

==========  ===========================================================
label       normal form (complex scalars act on R^2 as 2x2 rotation-scalings)
==========  ===========================================================
A1          diag(a, c) over C, ``|a| = 1 <= |c|``
A2          complex Jordan block ``[[a, b], [0, a]]``, ``|a| = 1``
B1          diag(a, r, s), ``|a| = 1``, real ``r <= s``
B2          diag(a) + real block ``[[r, s], [0, r]]``
C1          ``1 + R``, R with ``r`` on the superdiagonal (one 4-block)
C2          3-block with superdiagonal ``r`` plus eigenvalue ``s``
C3          ``[[r, s], [0, r]] + [[1, s], [0, 1]]``, ``0 < r < 1``
C4          ``[[1, t], [0, 1]] + diag(r, s)``, ``r < s``
C5          diag(1, r, s, t), ``1 < r < s < t``
Trivial     the identity
==========  ===========================================================

A real eigenvalue with a two-dimensional eigenspace may play the role of a
complex eigenvalue ``a``. Negative real eigenvalues are removed by negating
the matrix, or by squaring it when both signs occur.

Off-diagonal (nilpotent) parameters ``b`` (A2), ``s`` (B2), ``r`` (C1, C2),
``s`` (C3) and ``t`` (C4) are not conjugacy invariants: a diagonal change
of basis rescales them to any nonzero value. The classifier reports them
as 1.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag

from .config import TOL_CLASSIFY
from .errors import IllConditioned, SingularMatrix
from .geometry import ProjLine, ProjPoint
from .jordan import EigenCluster, jordan_structure

DET_TOL = 1e-10
COMPACT_MODULUS_TOL = 1e-8
UNIT_TOL = 1e-6


class Case(str, enum.Enum):
    A1 = "A1"
    A2 = "A2"
    B1 = "B1"
    B2 = "B2"
    C1 = "C1"
    C2 = "C2"
    C3 = "C3"
    C4 = "C4"
    C5 = "C5"
    TRIVIAL = "Trivial"


class Compactness(str, enum.Enum):
    COMPACT = "CompactClosure"
    NONCOMPACT = "NonCompact"


# tag of the exclusion result that rules out each case
EXCLUSION_TAG = {
    Case.A1: "4.1",
    Case.A2: "4.2",
    Case.B1: "4.3",
    Case.B2: "4.4",
    Case.C1: "4.5",
    Case.C2: "4.5",
    Case.C3: "4.5",
    Case.C4: "4.5",
    Case.C5: "4.5",
}

PARAM_NAMES = {
    Case.A1: ("a", "c"),
    Case.A2: ("a", "b"),
    Case.B1: ("a", "r", "s"),
    Case.B2: ("a", "r", "s"),
    Case.C1: ("r",),
    Case.C2: ("r", "s"),
    Case.C3: ("r", "s"),
    Case.C4: ("r", "s", "t"),
    Case.C5: ("r", "s", "t"),
    Case.TRIVIAL: (),
}


class Collineation:
    """An element of PGL(4,R), stored by a representative matrix."""

    __slots__ = ("matrix", "normalized")

    def __init__(self, matrix, check: bool = True):
        M = np.array(matrix, dtype=float)
        if M.shape != (4, 4):
            raise ValueError(f"a collineation needs a 4x4 matrix, got {M.shape}")
        if not np.all(np.isfinite(M)):
            raise ValueError("matrix has non-finite entries")
        scale = np.max(np.abs(M))
        if scale == 0.0 or (check and abs(np.linalg.det(M / scale)) <= DET_TOL):
            raise SingularMatrix("matrix is not invertible")
        # powers of invertible matrices may be numerically near-singular;
        # with check=False fall back to max-entry scaling when det underflows
        d = abs(np.linalg.det(M / scale))
        N = M / (scale * d**0.25) if d > 0 else M / scale
        M.setflags(write=False)
        N.setflags(write=False)
        object.__setattr__(self, "matrix", M)
        object.__setattr__(self, "normalized", N)

    def __setattr__(self, name, value):
        raise AttributeError("Collineation is immutable")

    def __repr__(self):
        return f"Collineation({self.matrix.tolist()})"

    def __matmul__(self, other: "Collineation") -> "Collineation":
        return Collineation(self.normalized @ other.normalized)

    def inverse(self) -> "Collineation":
        return Collineation(np.linalg.inv(self.normalized))

    def to_json(self) -> list:
        return self.matrix.tolist()


def as_collineation(g) -> Collineation:
    return g if isinstance(g, Collineation) else Collineation(g)


def apply_point(g, p: ProjPoint) -> ProjPoint:
    g = as_collineation(g)
    return ProjPoint(g.normalized @ p.coords)


def apply_line(g, L: ProjLine) -> ProjLine:
    g = as_collineation(g)
    return ProjLine(g.normalized @ L.basis)


def is_projectively_trivial(M, tol: float = 1e-8) -> bool:
    """True when M is a scalar multiple of the identity."""
    M = np.asarray(M, dtype=float)
    k = np.trace(M) / 4.0
    if k == 0.0:
        return False
    return float(np.max(np.abs(M / k - np.eye(4)))) < tol


# classification --------------------------------------------------------------

@dataclass(frozen=True)
class JordanCaseData:
    label: Case
    params: dict
    block_structure: tuple = ()
    squared: bool = False
    negated: bool = False
    scale: complex = 1.0

    def param_vector(self) -> np.ndarray:
        """Parameters flattened to reals in the order of ``PARAM_NAMES``."""
        out = []
        for name in PARAM_NAMES[self.label]:
            z = complex(self.params[name])
            out += [z.real, z.imag]
        return np.array(out)

    def to_json(self) -> dict:
        return {
            "label": self.label.value,
            "params": {k: _json_number(v) for k, v in self.params.items()},
            "block_structure": [
                {"eigenvalue": _json_number(v), "blocks": list(s)} for v, s in self.block_structure
            ],
            "squared": self.squared,
            "negated": self.negated,
        }


def _json_number(z):
    z = complex(z)
    if z.imag == 0.0:
        return z.real
    return [z.real, z.imag]


def _unit_phase(z: complex) -> complex:
    """``z/|z|`` with the conjugate chosen so the imaginary part is >= 0."""
    u = complex(z) / abs(z)
    if u.imag < 0:
        u = u.conjugate()
    if abs(u.imag) < 1e-14:
        u = complex(u.real, 0.0)
    return u


def _order_pair(z, w):
    """Order two eigenvalues by modulus, breaking near-ties by argument."""
    z, w = complex(z), complex(w)
    if abs(abs(z) - abs(w)) > UNIT_TOL * max(abs(z), abs(w)):
        return (z, w) if abs(z) < abs(w) else (w, z)
    return (z, w) if np.angle(z) <= np.angle(w) else (w, z)


def _assemble(clusters: list):
    """Map eigenvalue clusters to (label, raw params, real-role eigenvalues).

    Raw params are in the original scale; the real-role list holds the real
    eigenvalues whose signs must be made positive.
    """
    cplx = [c for c in clusters if not c.is_real]
    real = [c for c in clusters if c.is_real]
    blocks = sorted(((c.value.real, s) for c in real for s in c.sizes), key=lambda b: -b[1])

    ncplx = sum(c.multiplicity for c in cplx)
    if ncplx == 2:
        if len(cplx) == 2:
            a, c = _order_pair(cplx[0].value, cplx[1].value)
            return Case.A1, {"a": a, "c": c}, []
        (z,) = cplx
        if z.sizes == (1, 1):
            return Case.A1, {"a": z.value, "c": z.value}, []
        return Case.A2, {"a": z.value}, []
    if ncplx == 1:
        a = cplx[0].value
        if len(real) == 1 and real[0].sizes == (2,):
            r = real[0].value.real
            return Case.B2, {"a": a, "r": r}, [r]
        vals = sorted(v for v, _ in blocks)
        return Case.B1, {"a": a, "r": vals[0], "s": vals[1]}, vals

    # all eigenvalues real
    sizes = {c.value.real: c.sizes for c in real}
    values = [c.value.real for c in real]
    allvals = [v for v, _ in blocks]
    if len(real) == 1:
        (lam,) = values
        shape = real[0].sizes
        table = {
            (4,): Case.C1,
            (3, 1): Case.C2,
            (2, 2): Case.A2,
            (2, 1, 1): Case.B2,
            (1, 1, 1, 1): Case.TRIVIAL,
        }
        label = table[shape]
        if label is Case.C2:
            return label, {"lam": lam, "mu": lam}, allvals
        if label is Case.A2:
            return label, {"a": complex(lam)}, []
        if label is Case.B2:
            return label, {"a": complex(lam), "r": lam}, [lam]
        return label, {"lam": lam}, allvals

    if len(real) == 2:
        (l1, s1), (l2, s2) = [(v, sizes[v]) for v in values]
        pair = {s1: l1, s2: l2}
        shapes = {s1, s2}
        if shapes == {(3,), (1,)}:
            return Case.C2, {"lam": pair[(3,)], "mu": pair[(1,)]}, allvals
        if shapes == {(2, 1), (1,)}:
            return Case.C4, {"lam": pair[(2, 1)], "others": (pair[(2, 1)], pair[(1,)])}, allvals
        if s1 == (2,) and s2 == (2,):
            return Case.C3, {"lo": min(l1, l2, key=abs), "hi": max(l1, l2, key=abs)}, allvals
        if shapes == {(2,), (1, 1)}:
            return Case.B2, {"a": complex(pair[(1, 1)]), "r": pair[(2,)]}, [pair[(2,)]]
        if s1 == (1, 1) and s2 == (1, 1):
            a, c = _order_pair(l1, l2)
            return Case.A1, {"a": complex(a), "c": complex(c)}, []
        if shapes == {(1, 1, 1), (1,)}:
            lam, mu = pair[(1, 1, 1)], pair[(1,)]
            r, s = sorted((lam, mu))
            return Case.B1, {"a": complex(lam), "r": r, "s": s}, [lam, mu]
        raise IllConditioned(f"unexpected Jordan structure {s1}, {s2}")

    if len(real) == 3:
        two = [v for v in values if sizes[v] == (2,)]
        double = [v for v in values if sizes[v] == (1, 1)]
        rest = [v for v in values if sizes[v] == (1,)]
        if two:
            return Case.C4, {"lam": two[0], "others": tuple(rest)}, allvals
        if double:
            r, s = sorted(rest)
            return Case.B1, {"a": complex(double[0]), "r": r, "s": s}, rest
        raise IllConditioned("unexpected Jordan structure with three eigenvalues")

    return Case.C5, {"vals": tuple(values)}, allvals


def _normalize_params(label: Case, raw: dict):
    """Scale raw eigenvalue data to the normal form. Returns (params, scale)."""
    if label is Case.TRIVIAL:
        return {}, raw["lam"]
    if label is Case.A1:
        a, c = complex(raw["a"]), complex(raw["c"])
        return {"a": _unit_phase(a), "c": _unit_phase(c) * abs(c) / abs(a)}, abs(a)
    if label is Case.A2:
        a = complex(raw["a"])
        return {"a": _unit_phase(a), "b": 1.0}, abs(a)
    if label is Case.B1:
        a = complex(raw["a"])
        m = abs(a)
        return {"a": _unit_phase(a), "r": raw["r"] / m, "s": raw["s"] / m}, m
    if label is Case.B2:
        a = complex(raw["a"])
        m = abs(a)
        return {"a": _unit_phase(a), "r": raw["r"] / m, "s": 1.0}, m
    if label is Case.C1:
        return {"r": 1.0}, raw["lam"]
    if label is Case.C2:
        lam = raw["lam"]
        return {"r": 1.0, "s": raw["mu"] / lam}, lam
    if label is Case.C3:
        hi = raw["hi"]
        return {"r": raw["lo"] / hi, "s": 1.0}, hi
    if label is Case.C4:
        lam = raw["lam"]
        r, s = sorted(v / lam for v in raw["others"])
        return {"r": r, "s": s, "t": 1.0}, lam
    if label is Case.C5:
        vals = sorted(raw["vals"])
        lo = vals[0]
        return {"r": vals[1] / lo, "s": vals[2] / lo, "t": vals[3] / lo}, lo
    raise ValueError(label)


def _arg_key(params: dict) -> tuple:
    return tuple(round(float(np.angle(complex(params[k]))), 9) for k in ("a", "c") if k in params)


def _classify_once(M: np.ndarray, tol: float) -> JordanCaseData:
    squared = negated = False
    for _ in range(3):
        clusters = jordan_structure(M, tol)
        label, raw, roles = _assemble(clusters)
        signs = {v > 0 for v in roles}
        if signs == {True, False}:
            M = M @ M
            squared = True
            continue
        if signs == {False}:
            M = -M
            negated = True
            continue
        params, scale = _normalize_params(label, raw)
        if label in (Case.A1, Case.A2):
            # g and -g are the same collineation; keep the representative
            # whose unit eigenvalues have the smaller arguments
            flipped = jordan_structure(-M, tol)
            f_label, f_raw, _ = _assemble(flipped)
            f_params, f_scale = _normalize_params(f_label, f_raw)
            if f_label is label and _arg_key(f_params) < _arg_key(params):
                M, negated = -M, not negated
                clusters, raw, params, scale = flipped, f_raw, f_params, f_scale
        structure = tuple((c.value / scale, c.sizes) for c in clusters)
        return JordanCaseData(label, params, structure, squared, negated, scale)
    raise IllConditioned("could not make real eigenvalues positive")


def classify_case(g, tol: float = TOL_CLASSIFY) -> JordanCaseData:
    """Jordan-type case of a collineation, with normal-form parameters."""
    g = as_collineation(g)
    try:
        return _classify_once(g.normalized, tol)
    except IllConditioned as exc:
        candidates = []
        for t in (tol * 100, tol / 100):
            try:
                candidates.append(_classify_once(g.normalized, t).label.value)
            except IllConditioned:
                pass
        raise IllConditioned(str(exc), candidates) from None


def normalize_for_classification(g, tol: float = TOL_CLASSIFY):
    """Normal-form representative used by the classifier.

    Returns ``(collineation, squared)``: the matrix after the sign step
    (negation or squaring), divided by the eigenvalue or modulus the case
    designates as 1.
    """
    g = as_collineation(g)
    data = classify_case(g, tol)
    M = g.normalized
    if data.squared:
        M = M @ M
    if data.negated:
        M = -M
    return Collineation(M / data.scale), data.squared


def _rot(z: complex) -> np.ndarray:
    z = complex(z)
    return np.array([[z.real, -z.imag], [z.imag, z.real]])


def canonical_matrix(label, params: dict | None = None) -> np.ndarray:
    """Normal-form matrix for a case label and its parameters."""
    label = Case(label)
    p = params or {}
    if label is Case.TRIVIAL:
        return np.eye(4)
    if label is Case.A1:
        return block_diag(_rot(p["a"]), _rot(p["c"]))
    if label is Case.A2:
        A = _rot(p["a"])
        return np.block([[A, float(p.get("b", 1.0)) * np.eye(2)], [np.zeros((2, 2)), A]])
    if label is Case.B1:
        return block_diag(_rot(p["a"]), [[p["r"]]], [[p["s"]]])
    if label is Case.B2:
        r = p["r"]
        return block_diag(_rot(p["a"]), [[r, p.get("s", 1.0)], [0.0, r]])
    if label is Case.C1:
        return np.eye(4) + np.diag([p.get("r", 1.0)] * 3, 1)
    if label is Case.C2:
        r = p.get("r", 1.0)
        return block_diag([[1.0, r, 0.0], [0.0, 1.0, r], [0.0, 0.0, 1.0]], [[p["s"]]])
    if label is Case.C3:
        r, s = p["r"], p.get("s", 1.0)
        return block_diag([[r, s], [0.0, r]], [[1.0, s], [0.0, 1.0]])
    if label is Case.C4:
        return block_diag([[1.0, p.get("t", 1.0)], [0.0, 1.0]], [[p["r"]]], [[p["s"]]])
    if label is Case.C5:
        return np.diag([1.0, p["r"], p["s"], p["t"]])
    raise ValueError(label)


# verdicts --------------------------------------------------------------------

def _compact_from_structure(structure) -> bool:
    if not all(all(s == 1 for s in sizes) for _, sizes in structure):
        return False
    mods = [abs(complex(v)) for v, _ in structure]
    return max(mods) / min(mods) - 1.0 < COMPACT_MODULUS_TOL


def compact_closure(g, tol: float = TOL_CLASSIFY) -> Compactness:
    """Compactness of the closure of <g> in PGL(4,R).

    Compact exactly when g is semisimple and all eigenvalues have the same
    modulus.
    """
    g = as_collineation(g)
    clusters = jordan_structure(g.normalized, tol)
    structure = [(c.value, c.sizes) for c in clusters]
    return Compactness.COMPACT if _compact_from_structure(structure) else Compactness.NONCOMPACT


COND_LIMIT = 1e8
GROWTH_FACTOR = 10.0


def bounded_powers_oracle(g, nmax: int = 2000) -> Compactness:
    """Decide compact closure by watching the conditioning of g^n, n <= nmax.

    Each power is renormalized by its largest entry. The orbit is declared
    unbounded when the condition number exceeds ``1e8``, or when its running
    maximum over all n <= nmax exceeds ten times the maximum over the first
    tenth of the range (polynomial growth from Jordan blocks stays below
    ``1e8`` for a long time).
    """
    if nmax < 100:
        raise ValueError("nmax must be at least 100")
    g = as_collineation(g)
    G = g.normalized / np.max(np.abs(g.normalized))
    P = np.eye(4)
    early = late = 1.0
    cut = nmax // 10
    for n in range(1, nmax + 1):
        P = P @ G
        P /= np.max(np.abs(P))
        s = np.linalg.svd(P, compute_uv=False)
        c = s[0] / s[-1] if s[-1] > 0 else np.inf
        if c > COND_LIMIT:
            return Compactness.NONCOMPACT
        late = max(late, c)
        if n <= cut:
            early = late
    if late > GROWTH_FACTOR * early:
        return Compactness.NONCOMPACT
    return Compactness.COMPACT


@dataclass(frozen=True)
class Verdict:
    case: JordanCaseData
    compactness: Compactness
    excluded: bool
    proposition: str | None = None
    notes: tuple = field(default=())

    @property
    def automorphism(self) -> str:
        return "Excluded" if self.excluded else "Possible"

    def to_json(self) -> dict:
        out = self.case.to_json()
        return {
            "label": out["label"],
            "params": out["params"],
            "compactness": self.compactness.value,
            "automorphism": self.automorphism,
            "proposition": self.proposition,
            "squared": out["squared"],
        }


def _is_one(x) -> bool:
    return abs(abs(complex(x)) - 1.0) < UNIT_TOL


def automorphism_verdict(g, tol: float = TOL_CLASSIFY) -> Verdict:
    """Whether g can be an automorphism of a topological parallelism.

    Encodes the necessary conditions: an A1 element needs ``|c| = 1``, a B1
    element needs ``r, s`` of modulus 1, and elements of type A2, B2 or any
    C type (after the sign step, these are never of order <= 2) are
    excluded outright.
    """
    g = as_collineation(g)
    data = classify_case(g, tol)
    compact = Compactness.COMPACT if _compact_from_structure(data.block_structure) else Compactness.NONCOMPACT
    label = data.label
    if label is Case.TRIVIAL:
        excluded = False
    elif label is Case.A1:
        excluded = not _is_one(data.params["c"])
    elif label is Case.B1:
        excluded = not (_is_one(data.params["r"]) and _is_one(data.params["s"]))
    else:
        excluded = True
    notes = ()
    if label.value.startswith("C"):
        M = g.normalized
        notes = (("order_at_most_two", is_projectively_trivial(M @ M)),)
    verdict = Verdict(data, compact, excluded, EXCLUSION_TAG.get(label) if excluded else None, notes)
    assert excluded or compact is Compactness.COMPACT, "possible automorphism must have compact closure"
    return verdict
