"""Exact simulation of reciprocal Archimedean copulas and max-id laws."""

from .copula import CopulaSpec, copula_cdf, maxid_cdf_monte_carlo
from .errors import (
    BracketError,
    CapacityError,
    ConfigError,
    DomainError,
    IterationCapError,
    NumericError,
    OutOfRangeError,
    PartialResultError,
    RacsimError,
    UnsupportedMeasureError,
)
from .generator import Generator, williamson_survival_from_lambda
from .points import PointStream, exponential_draw
from .radial import (
    CustomRadial,
    DiscreteRadial,
    GalambosRadial,
    HarmonicRadial,
    PiecewiseConstantApprox,
    RadialMeasure,
    ScaledRadial,
    approximate_piecewise_constant,
    galambos_constant,
    measure_from_spec,
    numeric_pseudo_inverse,
    runtime_tail_classification,
)
from .sampler import (
    SampleResult,
    expected_loops_galambos_theta1,
    sample_batch,
    sample_one,
    simulate,
)
from .simplex import SimplexLaw, law_from_spec, sample_dirichlet, sample_uniform_simplex

__all__ = [
    "approximate_piecewise_constant",
    "BracketError",
    "CapacityError",
    "ConfigError",
    "copula_cdf",
    "CopulaSpec",
    "CustomRadial",
    "DiscreteRadial",
    "DomainError",
    "expected_loops_galambos_theta1",
    "exponential_draw",
    "galambos_constant",
    "GalambosRadial",
    "Generator",
    "HarmonicRadial",
    "IterationCapError",
    "law_from_spec",
    "maxid_cdf_monte_carlo",
    "measure_from_spec",
    "numeric_pseudo_inverse",
    "NumericError",
    "OutOfRangeError",
    "PartialResultError",
    "PiecewiseConstantApprox",
    "PointStream",
    "RacsimError",
    "RadialMeasure",
    "runtime_tail_classification",
    "sample_batch",
    "sample_dirichlet",
    "sample_one",
    "sample_uniform_simplex",
    "SampleResult",
    "ScaledRadial",
    "SimplexLaw",
    "simulate",
    "UnsupportedMeasureError",
    "williamson_survival_from_lambda",
]

__version__ = "0.1.0"
