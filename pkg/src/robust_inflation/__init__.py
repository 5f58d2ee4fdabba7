"""Robust (trimmed-mean and median) inflation from a category price panel,
with trim grid search against ex-post trend-inflation targets."""

__version__ = "0.1.0"

from .errors import ConfigError, DataError, InflationError
from .gridsearch import (
    FULL_GRID,
    ChainedGrid,
    GridBounds,
    TrimGrid,
    TrimSet,
    avg_rate_range_by_trim,
    best_trim,
    chained_grid,
    equivalence_set,
    inclusion_stats,
    prediction_range,
    sweep,
    top_k,
)
from .indices import (
    MEDIAN_TRIM,
    OFFICIAL_TRIM,
    OFFICIAL_TRIM_ALT,
    CrossSection,
    InflationSeries,
    TrimSpec,
    chain_12m,
    cross_sections,
    fisher,
    laspeyres,
    paasche,
    series,
    trimmed_monthly,
    weighted_median_monthly,
    weighted_percentile,
)
from .panel import (
    CategoryPanel,
    MonthlyRateSeries,
    WeightVector,
    apply_exclusions,
    load_panel,
    load_tags,
    monthly_rates,
    trim_weights,
    validate,
)
from .stats import (
    DmResult,
    SampleSpec,
    coef_variation,
    dm_test,
    newey_west_lrv,
    regime_summary,
    rmse,
    rolling_std,
    sign_match,
)
from .synth import gen_synthetic
from .trends import BANDPASS, CURRENT, FORWARD, FUTURE, TrendSeries, TrendSpec, centered_ma, cf_lowpass, forward_ma, trend
