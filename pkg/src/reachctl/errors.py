"""Exception hierarchy for reachctl."""


class ReachControlError(Exception):
    """Base class for all reachctl errors."""


class DegenerateSimplex(ReachControlError):
    """Vertices are not affinely independent at the working tolerance."""


class PointOutsideSimplex(ReachControlError):
    """A point expected inside the simplex lies outside it."""


class EmptyIndexSet(ReachControlError):
    """A face was requested with an empty vertex index set."""


class NumericalFailure(ReachControlError):
    """A numerical subroutine (LP solve, factorization) did not converge."""


class DimensionTooLarge(ReachControlError):
    """Input exceeds the desk-scale guard of a combinatorial routine."""


class AssumptionViolated(ReachControlError):
    """A structural assumption (A1)-(A4) on the problem data fails.

    The ``tag`` attribute carries the failing assumption label.
    """

    def __init__(self, tag, message=""):
        self.tag = tag
        super().__init__(f"{tag}: {message}" if message else tag)


class ConstructionFailed(ReachControlError):
    """The index construction hit a degeneracy beyond tolerance."""


class InfeasibleInvariance(ReachControlError):
    """No control satisfies the invariance conditions at a vertex."""

    def __init__(self, vertex, message=""):
        self.vertex = vertex
        super().__init__(f"vertex {vertex}: {message}" if message else f"vertex {vertex}")


class SynthesisFailed(ReachControlError):
    """Controller synthesis failed; message names the failing step."""


class PointOutsideDomain(ReachControlError):
    """Query point is not covered by any controller piece."""


class UnsupportedDimension(ReachControlError):
    """Operation only available for a specific state dimension."""


class ParseError(ReachControlError):
    """Problem or controller file could not be parsed."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        loc = ""
        if line is not None:
            loc = f"line {line}"
            if column is not None:
                loc += f", col {column}"
            loc = f" ({loc})"
        super().__init__(f"{message}{loc}")
