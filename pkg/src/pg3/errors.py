"""Exception types raised by the pg3 library."""


class PG3Error(Exception):
    """Base class for all library errors."""


class DegenerateJoin(PG3Error):
    """Two points coincide, so they do not span a line."""


class IdenticalLines(PG3Error):
    """The two lines passed to ``meet`` are the same line."""


class EmptySet(PG3Error):
    pass


class InsufficientData(PG3Error):
    pass


class GeometryError(PG3Error):
    """Numerical data does not describe the requested geometric object."""


class NonUnitQuaternion(PG3Error):
    pass


class SingularMatrix(PG3Error):
    pass


class IllConditioned(PG3Error):
    """Eigenvalue clustering is ambiguous at the requested tolerance.

    ``candidates`` lists the labels obtained under a looser and a tighter
    tolerance, when those could be computed.
    """

    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = tuple(candidates)


class ScheduleNotFound(PG3Error):
    def __init__(self, message, best_defect):
        super().__init__(message)
        self.best_defect = best_defect


class WitnessSearchFailed(PG3Error):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class SearchExhausted(PG3Error):
    pass


class NotDisjoint(PG3Error):
    pass


class CollisionNotFound(PG3Error):
    pass


class NotFixed(PG3Error):
    pass
