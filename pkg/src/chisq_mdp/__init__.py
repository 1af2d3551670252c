"""Exact and Monte Carlo tools for the Pearson chi-square statistic on
growing finite alphabets: moments, the martingale decomposition, moderate
deviation tail rates and the concentration bounds used to control them."""

from .bounds import (
    BoundCheck,
    HRConstants,
    HRParams,
    HRThreshold,
    hoeffding_bound,
    hr_constants,
    hr_params_for_kernel,
    hr_threshold,
    validate_hoeffding,
    validate_hr_bound,
)
from .montecarlo import (
    ExactLaw,
    RateCurvePoint,
    SimConfig,
    StateSpaceError,
    TailEstimate,
    clopper_pearson,
    enumerate_exact,
    estimate_tail,
    estimate_tails,
    normality_diagnostic,
    rate_curve,
)
from .regimes import (
    ConditionReport,
    Distribution,
    RegimeFamily,
    SchedulePoint,
    build_distribution,
    check_conditions,
    validate,
)
from .sampling import AliasTable, sample_counts, stream
from .statistic import (
    Decomposition,
    SampleCounts,
    chi_square,
    chi_square_mean,
    chi_square_variance,
    conditional_variance_Y,
    decompose,
    empirical_frequencies,
    kernel_g,
    kernel_second_moment,
    normalize,
    studentize,
)

__version__ = "0.1.0"
