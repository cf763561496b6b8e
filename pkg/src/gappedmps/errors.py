"""Exception hierarchy.

Every failure mode that callers are expected to catch gets its own class so
diagnostics can name the violated assumption instead of a generic message.
"""


class GappedMpsError(Exception):
    """Base class for all library errors."""


# --- generic numerics ---------------------------------------------------

class NotHermitian(GappedMpsError):
    pass


class EmptyInput(GappedMpsError):
    pass


class ConvergenceFailure(GappedMpsError):
    pass


class DimensionMismatch(GappedMpsError):
    pass


# --- CP-map classification ----------------------------------------------

class NotIrreducible(GappedMpsError):
    pass


class NotPrimitive(GappedMpsError):
    pass


class SingularRho(GappedMpsError):
    pass


# --- invariant chains ---------------------------------------------------

class CornerZero(GappedMpsError):
    """A chain corner vanished; the tuple violates the corner assumption."""


class ContractionFail(GappedMpsError):
    """A corner at level >= 1 is not a strict contraction (radius >= 1)."""


# --- canonical form -----------------------------------------------------

class NotInjective(GappedMpsError):
    pass


class Inconsistent(GappedMpsError):
    pass


class ConditionViolated(GappedMpsError):
    pass


class DecompositionFail(GappedMpsError):
    pass


class InvalidLambda(GappedMpsError):
    pass


class StructureViolation(GappedMpsError):
    pass


class NotClassA(GappedMpsError):
    pass


class SingularSystem(GappedMpsError):
    pass


class OutOfRange(GappedMpsError):
    pass


# --- spin chains ---------------------------------------------------------

class DegenerateInteraction(GappedMpsError):
    pass


class TooLarge(GappedMpsError):
    pass


class NLessThanRange(GappedMpsError):
    pass


class NoGap(GappedMpsError):
    pass


class FitFailure(GappedMpsError):
    pass


class InvalidTriple(GappedMpsError):
    pass


# --- serialization / CLI -------------------------------------------------

class SchemaError(GappedMpsError):
    """Input file violates a schema; message carries a JSON-pointer location."""


class IoError(GappedMpsError):
    pass
