"""Fisher-information bounds for the AFT regression parameter under
length biased and current duration sampling.

Quick start::

    >>> from aftinfo import Weibull, Scheme, info_scale
    >>> round(info_scale(Scheme.LENGTH_BIASED.density(Weibull(2.0))).value, 9)
    6.0
"""

from .covariate import (
    DiscreteCovariate,
    GaussianDiagonalCovariate,
    GridCovariate,
    InfoBoundReport,
    SampledCovariateLaw,
    covariates_from_dict,
    info_bound,
    relative_efficiency,
)
from .density import (
    BaselineDensity,
    BaselineModel,
    CurrentDuration,
    CustomBaseline,
    Degenerate,
    Density,
    GridBaseline,
    LengthBiased,
    LogLogistic,
    LogTransformed,
    MixingLaw,
    Mixture,
    Scaled,
    Scheme,
    TwoPoint,
    Uniform,
    UnitUniform,
    Weibull,
    baseline_from_dict,
)
from .empirical import (
    EmpiricalInfoReport,
    KSResult,
    efficient_score,
    efficient_scores,
    empirical_h_known_gain,
    empirical_information,
    ks_distance,
)
from .errors import (
    AftInfoError,
    ConfigError,
    DomainError,
    InfiniteMeanError,
    NumericalError,
    UndefinedScoreError,
)
from .fisher import (
    ContractionReport,
    InfoScaleResult,
    PatienceReport,
    closed_form_for,
    info_location,
    info_scale,
    info_scale_closed_form,
    verify_mixture_contraction,
    verify_patience_inequality,
)
from .sampler import (
    DirectTruncation,
    EpisodeRecord,
    EpisodeSample,
    ExactInverse,
    PointProcess,
    SamplerConfig,
    ShortWindowWarning,
    read_records,
    sample_direct,
    sample_exact,
    sample_point_process,
    simulate,
    write_records,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
