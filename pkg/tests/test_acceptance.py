"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are also collected and repeated in the pytest terminal summary.
Run ``python -m pytest tests/test_acceptance.py -s`` to see them inline.
"""

import math
import time

import numpy as np
import pytest

from cases import CANONICAL, FALSIFY_LIMIT, FALSIFY_STRUCTURAL, TAGS, params_close
from conftest import random_conditioned, random_orthogonal
from pg3.clifford import (
    Chirality,
    class_invariant,
    clifford_parallel,
    invariant_distance,
    is_parallel,
    orbit_oracle,
    random_unit_quaternions,
)
from pg3.collineation import (
    Case,
    Compactness,
    automorphism_verdict,
    bounded_powers_oracle,
    canonical_matrix,
    compact_closure,
)
from pg3.dynamics import FixedStructure, Witness, falsify_invariance, invariance_defect, matrix_power, pso4_element
from pg3.geometry import ProjLine, ProjPoint, incidence_residual, join, line_distance, meet_residual
from pg3.lemmas import avoiding_parallel, common_transversal_parallels, pencil_equivariance_check

SIDES = (Chirality.LEFT, Chirality.RIGHT)
RESULTS = []


def report(number, ok, detail):
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def random_line(rng):
    return ProjLine(rng.normal(size=(4, 2)))


def random_point(rng):
    return ProjPoint(rng.normal(size=4))


def conjugates(label, rng, count=20):
    G = canonical_matrix(label, CANONICAL[label])
    for _ in range(count):
        T = random_conditioned(rng, 100.0)
        yield G, T @ G @ np.linalg.inv(T)


def test_1_clifford_spread():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = [0.0, 0.0, 0.0]
    for k in range(10_000):
        side = SIDES[k % 2]
        p, L = random_point(rng), random_line(rng)
        N = clifford_parallel(p, L, side)
        q = ProjPoint(N.basis @ rng.normal(size=2))
        worst[0] = max(worst[0], incidence_residual(N, p))
        worst[1] = max(worst[1], invariant_distance(N, L, side))
        worst[2] = max(worst[2], line_distance(clifford_parallel(q, L, side), N))
    elapsed = time.perf_counter() - start
    ok = worst[0] < 1e-10 and worst[1] < 1e-9 and worst[2] < 1e-9 and elapsed < 10
    report(1, ok, f"incidence {worst[0]:.1e}, class {worst[1]:.1e}, uniqueness {worst[2]:.1e}, {elapsed:.1f} s")


def test_2_invariant_matches_oracle():
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    agree = total = parallel = 0
    for side in SIDES:
        for k in range(500):
            L = random_line(rng)
            M = clifford_parallel(random_point(rng), L, side) if k % 2 else random_line(rng)
            fast = is_parallel(L, M, side)
            agree += fast == orbit_oracle(L, M, side, grid=10_000)
            parallel += fast
            total += 1
    elapsed = time.perf_counter() - start
    ok = agree == total and elapsed < 60
    report(2, ok, f"{agree}/{total} agree ({parallel} parallel), {elapsed:.1f} s")


def test_3_pso4_invariance():
    rng = np.random.default_rng(3)
    worst = 0.0
    for k in range(100):
        u, w = random_unit_quaternions(rng, 2)
        g = pso4_element(u, w)
        worst = max(worst, invariance_defect(g, SIDES[k % 2], samples=100, seed=k))
    report(3, worst < 1e-9, f"max invariance defect {worst:.1e} over 100 maps")


def test_4_involution_excluded():
    rng = np.random.default_rng(4)
    g = np.diag([-1.0, 1, 1, 1])
    defect = invariance_defect(g)
    e0 = ProjPoint([1.0, 0, 0, 0])
    pencil = []
    for k in range(20):
        q = ProjPoint(np.r_[0.0, rng.normal(size=3)])
        # alternate the pole and the fixed plane as the base point
        p, q = (e0, q) if k % 2 else (q, e0)
        pencil.append(pencil_equivariance_check(g, p, q, samples=50, seed=k))
    ok = defect > 0.1 and min(pencil) > 1e-3
    report(4, ok, f"invariance defect {defect:.3f}, min pencil defect {min(pencil):.3f} over 20 pairs")


def test_5_classifier_suite():
    rng = np.random.default_rng(5)
    bad = []
    for label in CANONICAL:
        for _, A in conjugates(label, rng):
            v = automorphism_verdict(A)
            if not (v.case.label is label and params_close(v.case.params, CANONICAL[label])
                    and v.excluded and v.proposition == TAGS[label]):
                bad.append((label.value, v.case.label.value))
    report(5, not bad, f"{180 - len(bad)}/180 labelled, parameterized and tagged correctly {bad[:3]}")


def test_6_compactness_vs_oracle():
    rng = np.random.default_rng(6)
    mats = [A for label in CANONICAL for _, A in conjugates(label, rng)]
    mats += [random_orthogonal(rng) for _ in range(100)]
    disagree = 0
    for A in mats:
        disagree += compact_closure(A) is not bounded_powers_oracle(A, nmax=2000)
    orth = sum(compact_closure(A) is Compactness.COMPACT for A in mats[-100:])
    ok = disagree == 0 and orth == 100
    report(6, ok, f"{len(mats) - disagree}/{len(mats)} agree, {orth}/100 orthogonal compact")


def relative_error(A, B):
    return float(np.max(np.abs(A - B)) / np.max(np.abs(B)))


def projective_error(A, B):
    """Relative error after the best rescaling of A onto B."""
    c = np.sum(A * B) / np.sum(A * A)
    return relative_error(c * A, B)


def test_7_power_closed_forms():
    worst = 0.0
    for r in (1.0, 0.7):
        C1 = canonical_matrix(Case.C1, {"r": r})
        for n in range(1, 31):
            closed = np.eye(4)
            for k in (1, 2, 3):
                closed = closed + math.comb(n, k) * r**k * np.eye(4, k=k)
            worst = max(worst, relative_error(np.linalg.matrix_power(C1, n), closed))
            worst = max(worst, projective_error(matrix_power(C1, n).matrix, closed))
    for r, s in ((1.0, 2.0), (0.5, 1.0), (1.5, 0.3)):
        C2 = canonical_matrix(Case.C2, {"r": r, "s": s})
        C3 = canonical_matrix(Case.C3, {"r": r, "s": s})
        for n in range(1, 31):
            top = np.eye(3) + n * r * np.eye(3, k=1) + math.comb(n, 2) * r**2 * np.eye(3, k=2)
            closed2 = np.zeros((4, 4))
            closed2[:3, :3], closed2[3, 3] = top, s**n
            closed3 = np.zeros((4, 4))
            closed3[:2, :2] = [[r**n, n * r ** (n - 1) * s], [0.0, r**n]]
            closed3[2:, 2:] = [[1.0, n * s], [0.0, 1.0]]
            for G, closed in ((C2, closed2), (C3, closed3)):
                worst = max(worst, relative_error(np.linalg.matrix_power(G, n), closed))
    report(7, worst < 1e-10, f"max relative error {worst:.1e} for n <= 30")


@pytest.mark.parametrize("label,params", FALSIFY_LIMIT + FALSIFY_STRUCTURAL,
                         ids=[f"{c.value}-{i}" for i, (c, _) in enumerate(FALSIFY_LIMIT + FALSIFY_STRUCTURAL)])
def test_8_falsification(label, params):
    G = canonical_matrix(label, params)
    start = time.perf_counter()
    out = falsify_invariance(G)
    elapsed = time.perf_counter() - start
    if label in (Case.C2, Case.C4):
        ok = isinstance(out, FixedStructure) and out.certified
        detail = f"{label.value} structural certificate {out.kind if ok else out}"
    else:
        ok = isinstance(out, Witness) and out.class_defect < 1e-6 and out.meet_residual < 1e-6 and out.certified
        detail = (f"{label.value} {params}: persistence {out.class_defect:.1e}, "
                  f"meet residual {out.meet_residual:.1e}")
    report(8, ok and elapsed < 30, f"{detail}, {elapsed:.2f} s")


def test_9_transversal_pairs():
    rng = np.random.default_rng(9)
    bad = 0
    count = 0
    for side in SIDES:
        while count < 50 * (1 + (side is Chirality.RIGHT)):
            K, L = random_line(rng), random_line(rng)
            if meet_residual(K, L) < 1e-3 or is_parallel(K, L, side):
                continue
            pair = common_transversal_parallels(K, L, side, max_grid=256, seed=count)
            bad += not all(pair.check(K, L, side).values())
            count += 1
    report(9, bad == 0, f"{count - bad}/{count} valid transversal pairs at grid <= 256")


def test_10_avoiding_parallel():
    ok_runs = 0
    worst = np.inf
    for seed in range(100):
        rng = np.random.default_rng(1000 + seed)
        M = random_line(rng)
        obstacles = [random_line(rng) for _ in range(5)]
        try:
            N = avoiding_parallel(M, obstacles, SIDES[seed % 2], seed=seed, max_tries=1000)
        except Exception:
            continue
        clearance = min(meet_residual(N, O) for O in obstacles)
        worst = min(worst, clearance)
        ok_runs += clearance > 0 and is_parallel(N, M, SIDES[seed % 2])
    report(10, ok_runs >= 99, f"{ok_runs}/100 runs succeed, min clearance {worst:.1e}")
