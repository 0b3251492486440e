"""Exception and warning types raised across the package."""


class CmapError(Exception):
    """Base class for all package errors."""


class DomainError(CmapError, ValueError):
    """A point lies outside the (projective) special Kaehler domain."""


class SignatureError(CmapError, ValueError):
    """A matrix that should have a prescribed signature does not."""


class SingularFrame(CmapError, ValueError):
    """The stacked quaternionic vielbein is rank deficient."""


class NullConditionError(CmapError, ValueError):
    """D is not a null vector of N(Z0)."""


class PivotError(CmapError, ValueError):
    """No admissible pivot for the affine fiber parameterisation."""


class DegenerateQuotient(CmapError, ValueError):
    """The orbit direction has (numerically) zero length."""


class BranchError(CmapError, ValueError):
    """D does not satisfy the hypotheses of a model's fixed-locus branch."""


class StepUnderflow(CmapError, ArithmeticError):
    """A finite-difference step collapsed below the resolvable scale."""


class ConfigError(CmapError, ValueError):
    """Invalid run configuration."""


class ModelError(CmapError, KeyError):
    """Unknown catalog model or bad model parameters."""


class UnknownField(CmapError, KeyError):
    """Requested plot field is not recorded in the report."""


class RankInstabilityWarning(UserWarning):
    """Singular values sit close to the numerical-rank threshold."""
