"""Exception types raised across the toolkit."""


class VibnetError(Exception):
    """Base class for all toolkit errors."""


# --- input / model errors -------------------------------------------------

class ParseError(VibnetError):
    """Input file is malformed (bad JSON, wrong types, missing keys)."""


class ValidationError(VibnetError):
    """Input parsed but violates the schema semantics."""


class InvalidPermutation(VibnetError):
    pass


class EdgeNotFound(VibnetError):
    pass


class NotADag(VibnetError):
    pass


# --- modifiability / realizability ----------------------------------------

class NotModifiable(VibnetError):
    pass


class NotSingleEdge(VibnetError):
    pass


class Unrealizable(VibnetError):
    """Perturbation rejected; carries a human-readable reason."""

    def __init__(self, reason, entry=None):
        super().__init__(reason if entry is None else f"{reason} (entry {entry})")
        self.reason = reason
        self.entry = entry


class AssumptionViolated(VibnetError):
    pass


class NotFound(VibnetError):
    """Search exhausted without a stabilizing plan."""


# --- synthesis -------------------------------------------------------------

class WrongDirection(VibnetError):
    pass


class NotDirect(VibnetError):
    pass


class NotDirectlyRemovable(VibnetError):
    pass


class NoRealSolution(VibnetError):
    pass


class InvalidWitness(VibnetError):
    pass


class EdgeAlreadyExists(VibnetError):
    pass


class NegativeRadicand(VibnetError):
    pass


class ZeroAnchorDelta(VibnetError):
    pass


class DriverConflict(VibnetError):
    pass


# --- averaging / numerics ---------------------------------------------------

class NotNilpotent(VibnetError):
    """Plan positions do not satisfy the row/column disjointness needed
    for the closed-form fundamental matrix."""


class NonConvergent(VibnetError):
    pass


class SingularFundamental(VibnetError):
    pass


class NoConvergence(VibnetError):
    pass


class NonFinite(VibnetError):
    """State blew up during integration; carries the blow-up time."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class GridMismatch(VibnetError):
    pass
