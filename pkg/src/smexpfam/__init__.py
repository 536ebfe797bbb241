"""Closed-form Sharma-Mittal, Renyi, Tsallis and Shannon entropies and
divergences for exponential families, with Monte Carlo cross-checks and
maximum-likelihood fitting."""

from .errors import (
    CarrierIsZero,
    CarrierNotZero,
    DegenerateSample,
    DimensionMismatch,
    FamilyMismatch,
    InvalidOrder,
    InvalidSample,
    NotPositiveDefinite,
    OutOfDomain,
    SMError,
)
from .expfam import (
    ExpectationParam,
    FamilySpec,
    NaturalParam,
    family_spec,
    grad_log_normalizer,
    log_density,
    log_normalizer,
    mix_natural,
    scale_natural,
    sufficient_stat,
)
from .families import (
    ExponentialSource,
    GaussianSource,
    PoissonSource,
    from_natural,
    to_natural,
)
from .measures import (
    OrderPair,
    bhattacharyya_hellinger,
    c_alpha,
    jensen_divergence,
    kl_divergence,
    sm_divergence,
    sm_entropy,
)
from .estimation import McEstimate, SampleSet, mle_fit, sample, sm_entropy_carrier

__version__ = "0.1.0"

__all__ = [
    "CarrierIsZero",
    "CarrierNotZero",
    "DegenerateSample",
    "DimensionMismatch",
    "FamilyMismatch",
    "InvalidOrder",
    "InvalidSample",
    "NotPositiveDefinite",
    "OutOfDomain",
    "SMError",
    "ExpectationParam",
    "FamilySpec",
    "NaturalParam",
    "family_spec",
    "grad_log_normalizer",
    "log_density",
    "log_normalizer",
    "mix_natural",
    "scale_natural",
    "sufficient_stat",
    "ExponentialSource",
    "GaussianSource",
    "PoissonSource",
    "from_natural",
    "to_natural",
    "OrderPair",
    "bhattacharyya_hellinger",
    "c_alpha",
    "jensen_divergence",
    "kl_divergence",
    "sm_divergence",
    "sm_entropy",
    "McEstimate",
    "SampleSet",
    "mle_fit",
    "sample",
    "sm_entropy_carrier",
]
