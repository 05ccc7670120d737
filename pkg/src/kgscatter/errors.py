"""Exception types shared across the package."""


class KgScatterError(Exception):
    """Base class for all package-specific errors."""


class MaxDerivOrderExceeded(KgScatterError):
    """A y-derivative would exceed the ring's configured order cap."""


class RhoOutOfRange(KgScatterError):
    """Evaluation requested at rho < 1 where the expansions are not defined."""


class ResonantInput(KgScatterError):
    """Division inversion applied to a harmonic-1 term."""


class OrderZero(KgScatterError):
    """Resonant correction requested at inverse-rho order 0."""


class NotNonresonant(KgScatterError):
    """Input expansion fails the nonresonant-class precondition."""


class NonTermination(KgScatterError):
    """Elimination sweep exceeded its pass budget."""


class DegreeZeroCoefficient(KgScatterError):
    """A classified expansion carries a coefficient with no generator factor."""


class ClassificationFailure(KgScatterError):
    """A ladder residual failed its expected class membership."""


class OutsideLightCone(KgScatterError):
    """Forward coordinate map requested at a point with t <= |x|."""


class CflViolation(KgScatterError):
    """Requested march step exceeds the stability limit."""


class BoundaryLeak(KgScatterError):
    """Field magnitude at the y-domain edge rose above the decay floor."""


class StepFailure(KgScatterError):
    """Adaptive integrator failed to meet its tolerance."""


class ContractionFailure(KgScatterError):
    """Successive fixed-point iterates stopped contracting."""


class ConfigInvalid(KgScatterError):
    """Experiment configuration failed validation."""


class DegenerateFit(KgScatterError):
    """Slope fit requested on too few or nonpositive data."""
