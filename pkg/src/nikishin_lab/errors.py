"""Exception hierarchy shared by all modules."""


class LabError(Exception):
    """Base class for all package errors."""


class InputError(LabError):
    """Malformed user input (descriptors, flags, parameters)."""


class NonConvergence(LabError):
    pass


class PointOnSupport(LabError):
    pass


class OverlappingSupports(LabError):
    pass


class AdjacentOverlap(OverlappingSupports):
    pass


class SingularInversion(LabError):
    pass


class IndefiniteHankel(LabError):
    pass


class SignChangeDetected(LabError):
    pass


class NullspaceTooLarge(LabError):
    pass


class IllConditioned(LabError):
    pass


class NotNormal(LabError):
    pass


class ZeroLeadingCoefficient(LabError):
    pass


class ZeroCountMismatch(LabError):
    pass


class ContourThroughZero(LabError):
    pass


class ConstantMismatch(LabError):
    pass


class PreconditionViolated(LabError):
    pass


class DerivateConstructionFailed(LabError):
    pass


class BadProbabilityVector(LabError):
    pass


class IndefiniteInteraction(LabError):
    pass


class ValidationError(InputError):
    pass


class ClaimViolation(LabError):
    """A numerically checked claim failed; ``claim`` names it."""

    def __init__(self, claim, message):
        super().__init__(f"[{claim}] {message}")
        self.claim = claim
