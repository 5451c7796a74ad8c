"""Numerical Jordan structure of small real matrices.

Eigenvalues of a defective matrix are perturbed by roughly ``eps**(1/k)``
for a Jordan block of size ``k``, so clustering at a single tight tolerance
splits genuine blocks. Instead clusters are formed at a loose threshold and
then validated by the ranks of ``(A - mu I)^k``. A cluster whose rank
profile is inconsistent with its size is re-clustered at a tighter
threshold; if no threshold down to ``tol`` yields a consistent structure,
or a singular value falls in the ambiguous band around the cutoff, the
structure is reported as ill-conditioned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IllConditioned

AMBIGUITY_BAND = 10.0


@dataclass(frozen=True)
class EigenCluster:
    """An eigenvalue with its Jordan block sizes (descending).

    For a non-real eigenvalue only the member with positive imaginary part
    is listed; its conjugate carries the same blocks.
    """

    value: complex
    sizes: tuple

    @property
    def is_real(self) -> bool:
        return self.value.imag == 0.0

    @property
    def multiplicity(self) -> int:
        return sum(self.sizes)

    @property
    def semisimple(self) -> bool:
        return all(s == 1 for s in self.sizes)


def _single_linkage(values: np.ndarray, thr: float) -> list:
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) < thr:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _rank_profile(A: np.ndarray, mu: complex, m: int, tol: float):
    """Ranks of (A - mu I)^k for k = 1..m and whether any decision was borderline."""
    n = A.shape[0]
    N = A - mu * np.eye(n)
    normN = max(np.linalg.norm(N, 2), 1.0)
    ranks = []
    ambiguous = False
    P = np.eye(n, dtype=N.dtype)
    for k in range(1, m + 1):
        P = P @ N
        s = np.linalg.svd(P, compute_uv=False)
        cutoff = tol * normN**k
        ranks.append(int(np.sum(s > cutoff)))
        if np.any((s > cutoff / AMBIGUITY_BAND) & (s < cutoff * AMBIGUITY_BAND)):
            ambiguous = True
    return ranks, ambiguous


def _blocks_from_ranks(n: int, m: int, ranks: list):
    """Block sizes from a rank profile, or ``None`` if the profile is inconsistent."""
    r = [n] + ranks
    counts = [r[k - 1] - r[k] for k in range(1, m + 1)]
    if counts[0] < 1 or any(c < 0 for c in counts):
        return None
    if any(counts[k] > counts[k - 1] for k in range(1, m)):
        return None
    if r[m] != n - m or sum(counts) != m:
        return None
    sizes = []
    for k in range(m, 0, -1):
        longer = counts[k] if k < m else 0
        sizes += [k] * (counts[k - 1] - longer)
    return tuple(sorted(sizes, reverse=True))


def jordan_structure(A, tol: float = 1e-7) -> list:
    """Eigenvalue clusters of a real square matrix with their Jordan block sizes.

    Eigenvalues are reported relative to the original scale of ``A``.
    Raises :class:`IllConditioned` when the structure cannot be decided.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    eig = np.linalg.eigvals(A)
    rho = np.max(np.abs(eig))
    if rho == 0.0:
        raise IllConditioned("nilpotent matrix")
    As = A / rho
    ev = eig / rho
    thresholds = [tol ** (1.0 / 4), tol ** (1.0 / 3), tol ** 0.5, tol ** 0.75, tol]

    found = []  # (mean, sizes, members)

    def resolve(members: list, level: int):
        thr = thresholds[level]
        for group in _single_linkage(ev[members], thr):
            idx = [members[g] for g in group]
            vals = ev[idx]
            mu = complex(np.mean(vals))
            # snap to the real axis only when the group contains its conjugates
            closed = all(np.min(np.abs(vals - np.conj(v))) < thr for v in vals)
            if abs(mu.imag) < thr and closed:
                mu = complex(mu.real, 0.0)
            m = len(idx)
            if mu.imag != 0.0 and 2 * m > n:
                sizes = None
            else:
                ranks, ambiguous = _rank_profile(As, mu, m, tol)
                sizes = _blocks_from_ranks(n, m, ranks)
                if sizes is not None and ambiguous:
                    raise IllConditioned(
                        f"rank decision near cutoff for eigenvalue {mu * rho:.6g}"
                    )
            if sizes is not None:
                spread = float(np.max(np.abs(vals - mu)))
                allowance = 10.0 * tol ** (1.0 / max(sizes))
                if spread > allowance:
                    sizes = None
            if sizes is None:
                if level + 1 >= len(thresholds) or m == 1:
                    raise IllConditioned(
                        f"cannot resolve eigenvalue cluster near {mu * rho:.6g}"
                    )
                resolve(idx, level + 1)
            else:
                found.append((mu, sizes, idx))

    resolve(list(range(n)), 0)

    clusters = []
    for mu, sizes, _ in found:
        if mu.imag < 0:
            continue
        clusters.append(EigenCluster(complex(mu * rho), sizes))
    total = sum(c.multiplicity * (1 if c.is_real else 2) for c in clusters)
    if total != n:
        raise IllConditioned("eigenvalue clusters do not pair up under conjugation")
    clusters.sort(key=lambda c: (abs(c.value), c.value.real, c.value.imag))
    return clusters
