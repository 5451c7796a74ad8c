"""Collineations of real projective 3-space and Clifford parallelisms.

Submodules:

* :mod:`pg3.geometry` points, lines, Plücker coordinates, meets and distances
* :mod:`pg3.clifford` quaternions and the left/right Clifford parallelisms
* :mod:`pg3.collineation` normal forms, compactness and automorphism verdicts
* :mod:`pg3.dynamics` powers, recurrence schedules and falsification experiments
* :mod:`pg3.lemmas` avoiding parallels, transversal pairs, pencil checks
* :mod:`pg3.cli` the ``pg3`` command
"""

from .clifford import Chirality, clifford_parallel, class_invariant, is_parallel, orbit_oracle
from .collineation import (
    Case,
    Collineation,
    Compactness,
    automorphism_verdict,
    canonical_matrix,
    classify_case,
    compact_closure,
)
from .config import RunConfig
from .dynamics import (
    FixedStructure,
    Witness,
    falsify_invariance,
    invariance_defect,
    line_orbit_trace,
    matrix_power,
    recurrence_schedule,
)
from .errors import PG3Error
from .geometry import ProjLine, ProjPoint, join, line_distance, meet
from .lemmas import avoiding_parallel, common_transversal_parallels, pencil_equivariance_check

__version__ = "0.1.0"

__all__ = [
    "Case",
    "Chirality",
    "Collineation",
    "Compactness",
    "FixedStructure",
    "PG3Error",
    "ProjLine",
    "ProjPoint",
    "RunConfig",
    "Witness",
    "automorphism_verdict",
    "avoiding_parallel",
    "canonical_matrix",
    "class_invariant",
    "classify_case",
    "clifford_parallel",
    "common_transversal_parallels",
    "compact_closure",
    "falsify_invariance",
    "invariance_defect",
    "is_parallel",
    "join",
    "line_distance",
    "line_orbit_trace",
    "matrix_power",
    "meet",
    "orbit_oracle",
    "pencil_equivariance_check",
    "recurrence_schedule",
]
