"""Numerical c-map geometry and Kaehler quotients of quaternionic Kaehler manifolds."""

from .errors import (
    BranchError,
    CmapError,
    ConfigError,
    DegenerateQuotient,
    DomainError,
    ModelError,
    NullConditionError,
    PivotError,
    RankInstabilityWarning,
    SignatureError,
    SingularFrame,
    StepUnderflow,
    UnknownField,
)

__version__ = "0.1.0"

from .prepotential import (  # noqa: E402
    CubicPrepotential,
    HomogeneousPrepotential,
    Monomial,
    MonomialPrepotential,
    QuadraticPrepotential,
    SumPrepotential,
)
from .special_kahler import base_geometry, in_domain, kahler_potential, lift  # noqa: E402
from .cmap import ChartPoint, complex_structures, holo_coords, killing_fields, metric, moment_map  # noqa: E402
from .quotient import QuotientChart, QuotientSpec, make_quotient_spec, null_vector_sample  # noqa: E402
from .models import fixed_locus_analysis, get_model, list_models, recipe  # noqa: E402

__all__ = [
    "__version__",
    "BranchError",
    "CmapError",
    "ConfigError",
    "DegenerateQuotient",
    "DomainError",
    "ModelError",
    "NullConditionError",
    "PivotError",
    "RankInstabilityWarning",
    "SignatureError",
    "SingularFrame",
    "StepUnderflow",
    "UnknownField",
    "CubicPrepotential",
    "HomogeneousPrepotential",
    "Monomial",
    "MonomialPrepotential",
    "QuadraticPrepotential",
    "SumPrepotential",
    "base_geometry",
    "in_domain",
    "kahler_potential",
    "lift",
    "ChartPoint",
    "complex_structures",
    "holo_coords",
    "killing_fields",
    "metric",
    "moment_map",
    "QuotientChart",
    "QuotientSpec",
    "make_quotient_spec",
    "null_vector_sample",
    "fixed_locus_analysis",
    "get_model",
    "list_models",
    "recipe",
]
