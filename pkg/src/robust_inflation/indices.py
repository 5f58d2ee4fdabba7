"""Headline, core, trimmed-mean, median and percentile inflation.

Every robust statistic is computed from a :class:`CrossSection`: the month's
price relatives sorted ascending (ties broken by category id) with their
normalized weights laid end to end on ``[0, 1]``.  Trimming deletes the
expenditure mass on ``[0, alpha)`` and ``(1 - beta, 1]``; a category that
straddles a cutoff keeps the part of its weight that survives.

Percentiles use the category whose cumulative-weight interval
``[c_{i-1}, c_i)`` contains ``p``, so a ``p`` that lands exactly on a boundary
picks the category above it.  The (50, 50) trim is routed to that rule.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
import logging
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import (
    ConfigError,
    DegenerateTrim,
    EmptyActiveSet,
    EmptyCrossSection,
    InsufficientHistory,
    MissingCell,
    NoPredecessor,
    PercentileOutOfRange,
)
from .panel import (
    CategoryPanel,
    MonthlyRateSeries,
    apply_exclusions,
    format_month,
    month_inputs,
)

logger = logging.getLogger(__name__)

CORE_EXCLUDED_TAGS = ("food", "energy")
SERIES_KINDS = ("headline", "core", "trimmed", "median", "percentile")


@dataclass(frozen=True, order=True)
class TrimSpec:
    """Lower/upper trim in integer percent of expenditure."""

    alpha: int
    beta: int

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or not 0 <= v <= 50:
                raise ConfigError(f"{name} must be an integer in [0, 50], got {v!r}")
        object.__setattr__(self, "alpha", int(self.alpha))
        object.__setattr__(self, "beta", int(self.beta))

    @classmethod
    def parse(cls, text: str) -> "TrimSpec":
        """Parse ``"24,31"``."""
        try:
            a, b = (int(x) for x in text.split(","))
        except ValueError:
            raise ConfigError(f"bad trim {text!r}, expected ALPHA,BETA") from None
        return cls(a, b)

    @property
    def is_median(self) -> bool:
        return self.alpha == 50 and self.beta == 50

    @property
    def lower(self) -> float:
        return self.alpha / 100

    @property
    def upper(self) -> float:
        return 1 - self.beta / 100

    def __str__(self):
        return f"({self.alpha},{self.beta})"


OFFICIAL_TRIM = TrimSpec(24, 31)
# the same official measure is also quoted with an upper trim of 36
OFFICIAL_TRIM_ALT = TrimSpec(24, 36)
MEDIAN_TRIM = TrimSpec(50, 50)
NO_TRIM = TrimSpec(0, 0)


class CrossSection:
    """One month's relatives sorted for trimming and percentile queries.

    Parameters
    ----------
    ids : sequence of str
    rates : array-like
        Gross monthly relatives.
    weights : array-like
        Nonnegative weights; renormalized to sum to one.
    month : datetime64[M], optional
    """

    __slots__ = ("month", "ids", "rates", "weights", "cum", "prefix", "_last", "_cum", "_r")

    def __init__(self, ids, rates, weights, month=None):
        rates = np.asarray(rates, dtype=float)
        weights = np.asarray(weights, dtype=float)
        ids = np.asarray(list(ids), dtype=str)
        if len(rates) == 0:
            raise EmptyCrossSection("empty cross-section")
        if not (len(ids) == len(rates) == len(weights)):
            raise ValueError("ids, rates and weights must have equal length")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise ValueError("weights must be finite and nonnegative")
        order = np.lexsort((ids, rates))
        weights = weights[order]
        # summing in sorted order keeps the result independent of input order
        cum = np.concatenate(([0.0], np.cumsum(weights)))
        total = cum[-1]
        if total <= 0:
            raise EmptyCrossSection("cross-section has no weight")
        self.month = month
        self.ids = ids[order]
        self.rates = rates[order]
        self.weights = weights / total
        # normalize after summing so exact rational boundaries stay exact
        cum /= total
        cum[-1] = 1.0
        self.cum = cum
        # integrate rates relative to the lowest so equal rates cancel exactly
        self.prefix = np.concatenate(([0.0], np.cumsum(self.weights * (self.rates - self.rates[0]))))
        self._last = int(np.flatnonzero(self.weights > 0)[-1])
        self._cum = cum.tolist()
        self._r = self.rates.tolist()

    @classmethod
    def from_mappings(cls, rates: Mapping, weights, month=None) -> "CrossSection":
        weights = getattr(weights, "weights", weights)
        if set(rates) != set(weights):
            raise ValueError("rates and weights must cover the same categories")
        ids = sorted(rates)
        return cls(ids, [rates[c] for c in ids], [weights[c] for c in ids], month)

    def __len__(self):
        return len(self.rates)

    def mean(self) -> float:
        return float(self.weights @ self.rates)

    def surviving_mass(self, lower: float, upper: float) -> np.ndarray:
        """Weight each category keeps on ``[lower, upper]`` (sorted order)."""
        mass = np.minimum(self.cum[1:], upper) - np.maximum(self.cum[:-1], lower)
        return np.maximum(mass, 0.0, out=mass)

    def interval_mean(self, lower: float, upper: float) -> float:
        if not 0.0 <= lower < upper <= 1.0:
            raise DegenerateTrim(f"no mass survives on [{lower}, {upper}]")
        return self._interval_mean(lower, upper)

    def _interval_mean(self, lower: float, upper: float) -> float:
        # only the categories between the two cutoffs are visited; the kept
        # mass is upper - lower because cum runs from 0 to 1
        cum, r = self._cum, self._r
        i = max(bisect_right(cum, lower) - 1, 0)
        j = min(bisect_left(cum, upper) - 1, len(r) - 1)
        if i == j:
            return r[i]
        r0 = r[0]
        acc = (cum[i + 1] - lower) * (r[i] - r0) + (upper - cum[j]) * (r[j] - r0)
        for k in range(i + 1, j):
            acc += (cum[k + 1] - cum[k]) * (r[k] - r0)
        return r0 + acc / (upper - lower)

    def quantile_index(self, p: float) -> int:
        """Sorted position of the category holding cumulative weight ``p``.

        ``p`` may be 0 or 1 here; 1 maps to the top category with weight.
        """
        k = int(np.searchsorted(self.cum[1:], p, side="right"))
        return min(k, self._last)

    def quantile(self, p: float) -> float:
        return float(self.rates[self.quantile_index(p)])

    def median(self):
        k = self.quantile_index(0.5)
        return float(self.rates[k]), str(self.ids[k])

    def trimmed(self, trim: TrimSpec) -> float:
        if trim.is_median:
            return self.median()[0]
        return self.interval_mean(trim.lower, trim.upper)

    def trimmed_grid(self, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
        """Trimmed means for every (lower, upper) cutoff pair at once.

        The integral of the sorted-rate step function is piecewise linear in
        the cutoff with knots at the cumulative weights, so each cutoff costs
        one interpolation and the whole grid is a difference of two vectors.
        Pairs with ``lower >= upper`` take the median.
        """
        g_lo = np.interp(lower, self.cum, self.prefix)
        g_hi = np.interp(upper, self.cum, self.prefix)
        width = upper[None, :] - lower[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.rates[0] + (g_hi[None, :] - g_lo[:, None]) / width
        # a cutoff pair inside one category's interval keeps only that category
        k_lo = np.searchsorted(self.cum[1:], lower, side="right")
        k_hi = np.searchsorted(self.cum[1:], upper, side="left")
        same = k_lo[:, None] == k_hi[None, :]
        if same.any():
            out[same] = self.rates[np.broadcast_to(k_lo[:, None], same.shape)[same]]
        out[width <= 0] = self.median()[0]
        return out


# --- aggregate indices -----------------------------------------------------

def _index_inputs(panel: CategoryPanel, month, active):
    i = panel.month_index(month)
    if i == 0:
        raise NoPredecessor(f"{format_month(month)} is the first panel month")
    if active is None:
        idx = np.arange(len(panel.categories))
    else:
        idx = np.array([panel.category_index(c) for c in active], dtype=int)
    if len(idx) == 0:
        raise EmptyActiveSet("no active categories")
    cols = (panel.price[i - 1, idx], panel.price[i, idx],
            panel.expenditure[i - 1, idx], panel.expenditure[i, idx])
    if not all(np.all(np.isfinite(c)) for c in cols):
        raise MissingCell(f"{format_month(month)}: missing price or expenditure")
    return cols


def _laspeyres(p_prev, p_cur, e_prev, e_cur):
    q_prev = e_prev / p_prev
    den = q_prev @ p_prev
    if den <= 0:
        raise EmptyActiveSet("zero base-period expenditure")
    return float(q_prev @ p_cur / den)


def _paasche(p_prev, p_cur, e_prev, e_cur):
    q_cur = e_cur / p_cur
    den = q_cur @ p_prev
    if den <= 0:
        raise EmptyActiveSet("zero current-period expenditure")
    return float(q_cur @ p_cur / den)


def laspeyres(panel: CategoryPanel, month, active=None) -> float:
    """Laspeyres gross rate ``sum q_{t-1} p_t / sum q_{t-1} p_{t-1}``."""
    return _laspeyres(*_index_inputs(panel, month, active))


def paasche(panel: CategoryPanel, month, active=None) -> float:
    """Paasche gross rate ``sum q_t p_t / sum q_t p_{t-1}``."""
    return _paasche(*_index_inputs(panel, month, active))


def fisher(panel: CategoryPanel, month, active=None) -> float:
    """Geometric mean of the Laspeyres and Paasche rates."""
    cols = _index_inputs(panel, month, active)
    return float(np.sqrt(_laspeyres(*cols) * _paasche(*cols)))


# --- cross-section statistics ----------------------------------------------

def trimmed_monthly(rates: Mapping, weights, trim):
    """Trimmed-mean monthly relative of one cross-section.

    ``trim`` may also be a sequence of TrimSpec, in which case the sorted
    cross-section is built once and an array with one value per trim is
    returned.

    >>> trimmed_monthly({"a": 1.001, "b": 1.002, "c": 1.010},
    ...                 {"a": 0.2, "b": 0.5, "c": 0.3}, TrimSpec(20, 30))
    1.002
    """
    if not rates:
        raise EmptyCrossSection("empty cross-section")
    xs = CrossSection.from_mappings(rates, weights)
    if isinstance(trim, TrimSpec):
        return xs.trimmed(trim)
    return np.array([xs.trimmed(t) for t in trim])


def weighted_median_monthly(rates: Mapping, weights):
    """``(rate, category_id)`` of the weighted-median category."""
    if not rates:
        raise EmptyCrossSection("empty cross-section")
    return CrossSection.from_mappings(rates, weights).median()


def weighted_percentile(rates: Mapping, weights, p: float) -> float:
    """Rate of the category whose cumulative-weight interval contains ``p``."""
    if not 0 < p < 1:
        raise PercentileOutOfRange(f"percentile must lie in (0, 1), got {p}")
    if not rates:
        raise EmptyCrossSection("empty cross-section")
    return CrossSection.from_mappings(rates, weights).quantile(p)


# --- chaining --------------------------------------------------------------

@dataclass(frozen=True)
class InflationSeries:
    """12-month inflation in percent on a contiguous month range."""

    months: np.ndarray
    values: np.ndarray
    kind: str
    trim: TrimSpec | None = None
    p: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "months", np.asarray(self.months, dtype="datetime64[M]"))
        values = np.array(self.values, dtype=float)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.values)

    @property
    def label(self) -> str:
        if self.kind == "trimmed" and self.trim is not None:
            return f"trimmed{self.trim}"
        if self.kind == "percentile" and self.p is not None:
            return f"percentile({self.p:g})"
        return self.kind

    def at(self, month) -> float:
        i = int((np.datetime64(month, "M") - self.months[0]).astype(int))
        if not 0 <= i < len(self.values):
            raise KeyError(format_month(month))
        return float(self.values[i])


def annualize(rate):
    """Gross monthly relative -> annualized percent."""
    return (np.asarray(rate, dtype=float) ** 12 - 1.0) * 100.0


def _rolling_product(values: np.ndarray, window: int = 12) -> np.ndarray:
    # sequential left-to-right product, same order as the grid sweep
    n = len(values) - window + 1
    out = values[:n].copy()
    for s in range(1, window):
        out *= values[s:s + n]
    return out


def chain_12m(monthly: MonthlyRateSeries, kind: str = "chained", trim=None, p=None) -> InflationSeries:
    """Chain monthly relatives into 12-month inflation in percent.

    The value at ``t`` is ``(prod_{s=0}^{11} rate_{t-s} - 1) * 100``; the first
    11 months of ``monthly`` have no chained value.
    """
    values = np.asarray(monthly.values, dtype=float)
    if len(values) < 12:
        raise InsufficientHistory(f"need 12 monthly rates, have {len(values)}")
    if not np.all(np.isfinite(values)):
        raise MissingCell("cannot chain across missing monthly rates")
    chained = (_rolling_product(values) - 1.0) * 100.0
    return InflationSeries(monthly.months[11:], chained, kind, trim, p)


# --- panel pipelines -------------------------------------------------------

def cross_sections(panel: CategoryPanel) -> list:
    """Sorted cross-sections for every panel month after the first."""
    out = []
    for i in range(1, panel.n_months):
        idx, p_prev, p_cur, e_prev, e_cur = month_inputs(panel, i)
        if len(idx) == 0:
            raise EmptyCrossSection(f"{format_month(panel.months[i])}: no complete categories")
        tot_prev, tot_cur = e_prev.sum(), e_cur.sum()
        if tot_prev <= 0 or tot_cur <= 0:
            raise EmptyCrossSection(f"{format_month(panel.months[i])}: zero total expenditure")
        raw = 0.5 * e_prev / tot_prev + 0.5 * (p_prev * e_cur / p_cur) / tot_cur
        ids = [panel.categories[k] for k in idx]
        out.append(CrossSection(ids, p_cur / p_prev, raw, month=panel.months[i]))
    return out


def _fisher_monthly(panel: CategoryPanel) -> MonthlyRateSeries:
    rates = np.empty(panel.n_months - 1)
    for i in range(1, panel.n_months):
        _, *cols = month_inputs(panel, i)
        rates[i - 1] = np.sqrt(_laspeyres(*cols) * _paasche(*cols))
    return MonthlyRateSeries(panel.months[1:], rates, label="fisher")


def monthly_series(panel: CategoryPanel, kind: str, trim: TrimSpec | None = None,
                   p: float | None = None, core_tags=CORE_EXCLUDED_TAGS,
                   sections=None) -> MonthlyRateSeries:
    """Monthly relatives of one aggregate (before 12-month chaining)."""
    if kind not in SERIES_KINDS:
        raise ConfigError(f"unknown series kind {kind!r}; choose from {SERIES_KINDS}")
    if panel.n_months < 2:
        raise InsufficientHistory("need at least 2 months")
    if kind == "headline":
        return _fisher_monthly(panel)
    if kind == "core":
        return _fisher_monthly(apply_exclusions(panel, core_tags))
    if sections is None:
        sections = cross_sections(panel)
    if kind == "trimmed":
        trim = OFFICIAL_TRIM if trim is None else trim
        values = [xs.trimmed(trim) for xs in sections]
    elif kind == "median":
        values = [xs.median()[0] for xs in sections]
    else:
        if p is None or not 0 < p < 1:
            raise PercentileOutOfRange(f"percentile must lie in (0, 1), got {p}")
        values = [xs.quantile(p) for xs in sections]
    return MonthlyRateSeries(panel.months[1:], values, label=kind)


def series(panel: CategoryPanel, kind: str, trim: TrimSpec | None = None,
           p: float | None = None, core_tags=CORE_EXCLUDED_TAGS, sections=None) -> InflationSeries:
    """12-month inflation series of the requested kind.

    Parameters
    ----------
    panel : CategoryPanel
    kind : {"headline", "core", "trimmed", "median", "percentile"}
        ``headline`` and ``core`` are Fisher indices; ``core`` first drops
        categories tagged with ``core_tags``.
    trim : TrimSpec, optional
        Required for ``trimmed``; defaults to the official (24, 31).
    p : float, optional
        Percentile in (0, 1) for ``percentile``.
    sections : list of CrossSection, optional
        Precomputed :func:`cross_sections` output, reused across calls.
    """
    if kind == "trimmed" and trim is None:
        trim = OFFICIAL_TRIM
    monthly = monthly_series(panel, kind, trim, p, core_tags, sections)
    return chain_12m(monthly, kind, trim if kind == "trimmed" else None,
                     p if kind == "percentile" else None)
