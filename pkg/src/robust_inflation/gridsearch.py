"""Sweep every integer trim pair and summarize the resulting RMSE surface.

The sweep sorts each month's cross-section once and evaluates all trims from
its cumulative-weight prefix sums (see :meth:`CrossSection.trimmed_grid`).
Months are independent, so the monthly stage can fan out over threads; each
worker writes its own rows of a preallocated array, which keeps the result
bitwise identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, EmptyOverlap, KTooLarge
from .indices import (
    MEDIAN_TRIM,
    OFFICIAL_TRIM,
    CrossSection,
    TrimSpec,
    annualize,
    cross_sections,
)
from .panel import CategoryPanel
from .stats import SampleSpec, dm_pvalues, dm_summary
from .trends import TrendSeries, TrendSpec

INCLUSION_EPS = 1e-12


@dataclass(frozen=True)
class GridBounds:
    """Inclusive integer ranges of lower and upper trims."""

    alpha_min: int = 0
    alpha_max: int = 50
    beta_min: int = 0
    beta_max: int = 50

    def __post_init__(self):
        for lo, hi in ((self.alpha_min, self.alpha_max), (self.beta_min, self.beta_max)):
            if not 0 <= lo <= hi <= 50:
                raise ConfigError(f"grid bounds must satisfy 0 <= min <= max <= 50: {self}")

    @property
    def alphas(self) -> np.ndarray:
        return np.arange(self.alpha_min, self.alpha_max + 1)

    @property
    def betas(self) -> np.ndarray:
        return np.arange(self.beta_min, self.beta_max + 1)

    @property
    def size(self) -> int:
        return len(self.alphas) * len(self.betas)

    def to_dict(self) -> dict:
        return {"alpha_min": self.alpha_min, "alpha_max": self.alpha_max,
                "beta_min": self.beta_min, "beta_max": self.beta_max}


FULL_GRID = GridBounds()


@dataclass(frozen=True)
class ChainedGrid:
    """12-month inflation for every trim: ``values[t, i, j]`` is trim
    ``(alphas[i], betas[j])`` at ``months[t]``."""

    months: np.ndarray
    alphas: np.ndarray
    betas: np.ndarray
    values: np.ndarray

    def index(self, trim: TrimSpec):
        i = np.flatnonzero(self.alphas == trim.alpha)
        j = np.flatnonzero(self.betas == trim.beta)
        if len(i) == 0 or len(j) == 0:
            raise ConfigError(f"trim {trim} outside the grid")
        return int(i[0]), int(j[0])

    def series(self, trim: TrimSpec) -> np.ndarray:
        i, j = self.index(trim)
        return self.values[:, i, j]


def _monthly_grid(sections, lower, upper, workers: int) -> np.ndarray:
    out = np.empty((len(sections), len(lower), len(upper)))

    def fill(rows):
        for t in rows:
            out[t] = sections[t].trimmed_grid(lower, upper)

    chunks = [r for r in np.array_split(np.arange(len(sections)), max(1, workers)) if len(r)]
    if workers <= 1 or len(chunks) == 1:
        fill(range(len(sections)))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, chunks))
    return out


def chain_rows(monthly: np.ndarray, window: int = 12) -> np.ndarray:
    """Rolling ``window``-month product along axis 0, as 12-month percent."""
    n = monthly.shape[0] - window + 1
    out = monthly[:n].copy()
    for s in range(1, window):
        out *= monthly[s:s + n]
    return (out - 1.0) * 100.0


def chained_grid(panel: CategoryPanel, bounds: GridBounds = FULL_GRID, workers: int = 1,
                 sections=None) -> ChainedGrid:
    """Chained trimmed-mean inflation for every trim in ``bounds``."""
    if sections is None:
        sections = cross_sections(panel)
    if len(sections) < 12:
        raise EmptyOverlap("need at least 12 monthly cross-sections to chain")
    alphas, betas = bounds.alphas, bounds.betas
    monthly = _monthly_grid(sections, alphas / 100, 1 - betas / 100, workers)
    months = np.array([xs.month for xs in sections], dtype="datetime64[M]")
    return ChainedGrid(months[11:], alphas, betas, chain_rows(monthly))


@dataclass(frozen=True)
class TrimGrid:
    """RMSE and aligned forecast errors for every trim.

    ``errors[t, i, j]`` is the error of trim ``(alphas[i], betas[j])`` at
    ``months[t]``; ``rmse[i, j]`` summarizes it.
    """

    alphas: np.ndarray
    betas: np.ndarray
    months: np.ndarray
    rmse: np.ndarray
    errors: np.ndarray
    target: TrendSpec
    sample: SampleSpec

    @property
    def size(self) -> int:
        return self.rmse.size

    def index(self, trim: TrimSpec):
        i = np.flatnonzero(self.alphas == trim.alpha)
        j = np.flatnonzero(self.betas == trim.beta)
        if len(i) == 0 or len(j) == 0:
            raise ConfigError(f"trim {trim} outside the grid")
        return int(i[0]), int(j[0])

    def __contains__(self, trim):
        return trim.alpha in self.alphas and trim.beta in self.betas

    def cell(self, trim: TrimSpec):
        """``(rmse, errors)`` of one trim."""
        i, j = self.index(trim)
        return float(self.rmse[i, j]), self.errors[:, i, j]

    def trims(self) -> list:
        """All trims, alpha-major."""
        return [TrimSpec(int(a), int(b)) for a in self.alphas for b in self.betas]

    def ranking(self) -> np.ndarray:
        """Flat (alpha-major) cell indices ordered best first.

        Ties in RMSE go to the smaller ``alpha + beta``, then smaller ``alpha``.
        """
        a = np.repeat(self.alphas, len(self.betas))
        b = np.tile(self.betas, len(self.alphas))
        return np.lexsort((a, a + b, self.rmse.ravel()))

    def trim_at(self, flat: int) -> TrimSpec:
        i, j = divmod(int(flat), len(self.betas))
        return TrimSpec(int(self.alphas[i]), int(self.betas[j]))

    def effective_bandwidth(self, bandwidth: int | None = None) -> int:
        """Requested bandwidth (default: the target's), capped at ``n - 1``."""
        bw = self.target.default_bandwidth if bandwidth is None else int(bandwidth)
        return max(0, min(bw, len(self.months) - 1))


@dataclass(frozen=True)
class TrimSet:
    members: tuple
    criterion: str

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, trim):
        return trim in self.members


def evaluate_grid(chained: ChainedGrid, target: TrendSeries, sample: SampleSpec) -> TrimGrid:
    """Errors and RMSE of every chained trim series against ``target``."""
    months, ia, ib = np.intersect1d(chained.months, target.months, assume_unique=True,
                                    return_indices=True)
    keep = sample.mask(months)
    if not keep.any():
        raise EmptyOverlap(f"no months in {sample.label} where both grid and target exist")
    ia, ib = ia[keep], ib[keep]
    errors = chained.values[ia] - np.asarray(target.values)[ib][:, None, None]
    rmse = np.sqrt(np.mean(errors ** 2, axis=0))
    return TrimGrid(chained.alphas, chained.betas, months[keep], rmse, errors,
                    target.spec, sample)


def sweep(panel: CategoryPanel, target: TrendSeries, sample: SampleSpec,
          bounds: GridBounds = FULL_GRID, workers: int = 1, chained: ChainedGrid | None = None) -> TrimGrid:
    """RMSE of every trim in ``bounds`` against ``target`` over ``sample``.

    Pass ``chained`` to reuse a :func:`chained_grid` across targets and samples.
    """
    if chained is None:
        chained = chained_grid(panel, bounds, workers)
    return evaluate_grid(chained, target, sample)


def best_trim(grid: TrimGrid):
    """``(TrimSpec, rmse)`` of the lowest-RMSE cell."""
    flat = int(grid.ranking()[0])
    return grid.trim_at(flat), float(grid.rmse.ravel()[flat])


def dm_pvalues_vs_best(grid: TrimGrid, bandwidth: int | None = None) -> np.ndarray:
    """DM p-value of every cell against the best cell, shaped like ``rmse``."""
    best, _ = best_trim(grid)
    _, ref = grid.cell(best)
    n = len(grid.months)
    flat = dm_pvalues(grid.errors.reshape(n, -1), ref, grid.effective_bandwidth(bandwidth))
    return flat.reshape(grid.rmse.shape)


def equivalence_set(grid: TrimGrid, level: float = 0.05, bandwidth: int | None = None,
                    pvalues: np.ndarray | None = None) -> TrimSet:
    """Trims whose DM p-value against the best trim is at least ``level``.

    Members are listed best first.  The best trim is always a member.
    """
    if pvalues is None:
        pvalues = dm_pvalues_vs_best(grid, bandwidth)
    p = pvalues.ravel()
    order = grid.ranking()
    members = [grid.trim_at(f) for k, f in enumerate(order) if k == 0 or p[f] >= level]
    return TrimSet(tuple(members), f"equivalence@{level:g}")


def top_k(grid: TrimGrid, k: int) -> TrimSet:
    """The ``k`` lowest-RMSE trims, best first."""
    if not 1 <= k <= grid.size:
        raise KTooLarge(f"k must be in [1, {grid.size}], got {k}")
    return TrimSet(tuple(grid.trim_at(f) for f in grid.ranking()[:k]), f"top_{k}")


def official_comparison(grid: TrimGrid, officials=(OFFICIAL_TRIM, MEDIAN_TRIM),
                        bandwidth: int | None = None) -> dict:
    """Best trim against the better of the official trims present in the grid."""
    best, best_rmse = best_trim(grid)
    present = [t for t in officials if t in grid]
    out = {"best": best, "best_rmse": best_rmse, "official": None,
           "official_rmse": None, "dm": None}
    if not present:
        return out
    official = min(present, key=lambda t: grid.cell(t)[0])
    o_rmse, o_err = grid.cell(official)
    _, b_err = grid.cell(best)
    out.update(official=official, official_rmse=o_rmse,
               dm=dm_summary(o_err, b_err, grid.effective_bandwidth(bandwidth)))
    return out


# --- prediction ranges -----------------------------------------------------

@dataclass(frozen=True)
class PredictionRange:
    months: np.ndarray
    low: np.ndarray
    high: np.ndarray
    criterion: str

    @property
    def average(self) -> float:
        """Time average of ``high - low``."""
        return float(np.mean(self.high - self.low))


def prediction_range(source, trims: TrimSet, sample: SampleSpec) -> PredictionRange:
    """Per-month min and max of chained inflation across ``trims``.

    ``source`` is a :class:`CategoryPanel` or a :class:`ChainedGrid` that
    covers every trim in the set.
    """
    members = list(trims)
    if not members:
        raise ConfigError("empty trim set")
    if isinstance(source, ChainedGrid):
        chained = source
    else:
        bounds = GridBounds(min(t.alpha for t in members), max(t.alpha for t in members),
                            min(t.beta for t in members), max(t.beta for t in members))
        chained = chained_grid(source, bounds)
    keep = sample.mask(chained.months)
    if not keep.any():
        raise EmptyOverlap(f"no chained months in {sample.label}")
    stack = np.stack([chained.series(t)[keep] for t in members], axis=1)
    return PredictionRange(chained.months[keep], stack.min(axis=1), stack.max(axis=1),
                           getattr(trims, "criterion", ""))


# --- cross-sectional diagnostics --------------------------------------------

def _sections_in(source, sample: SampleSpec):
    sections = source if isinstance(source, list) else cross_sections(source)
    picked = [xs for xs in sections if sample.mask(np.datetime64(xs.month, "M"))]
    if not picked:
        raise EmptyOverlap(f"no monthly cross-sections in {sample.label}")
    return picked


def percentile_span(xs: CrossSection, trim: TrimSpec) -> float:
    """Gross-relative gap between the ``1 - beta`` and ``alpha`` percentiles."""
    return xs.quantile(trim.upper) - xs.quantile(trim.lower)


def avg_rate_range_by_trim(source, sample: SampleSpec, bounds: GridBounds = FULL_GRID) -> dict:
    """Average annualized spread of category inflation kept by each trim.

    For every month the ``alpha`` and ``1 - beta`` weighted percentiles of the
    relatives are annualized; the result is the time average of their gap.

    ``source`` is a panel or a list of cross-sections.
    """
    sections = _sections_in(source, sample)
    alphas, betas = bounds.alphas, bounds.betas
    lo = np.empty((len(sections), len(alphas)))
    hi = np.empty((len(sections), len(betas)))
    for t, xs in enumerate(sections):
        lo[t] = annualize([xs.quantile(a / 100) for a in alphas])
        hi[t] = annualize([xs.quantile(1 - b / 100) for b in betas])
    span = (hi[:, None, :] - lo[:, :, None]).mean(axis=0)
    return {TrimSpec(int(a), int(b)): float(span[i, j])
            for i, a in enumerate(alphas) for j, b in enumerate(betas)}


@dataclass(frozen=True)
class InclusionStats:
    included_frac: float
    excl_low_frac: float
    excl_high_frac: float


def month_inclusion(xs: CrossSection, trim: TrimSpec):
    """Boolean ``(included, excluded_low, excluded_high)`` in sorted order.

    A category is included when any of its weight survives the trim.  For the
    median only the median category is included.
    """
    n = len(xs)
    if trim.is_median:
        k = xs.quantile_index(0.5)
        pos = np.arange(n)
        return pos == k, pos < k, pos > k
    inc = xs.surviving_mass(trim.lower, trim.upper) > INCLUSION_EPS
    low = ~inc & (xs.cum[1:] <= trim.lower + INCLUSION_EPS)
    high = ~inc & (xs.cum[:-1] >= trim.upper - INCLUSION_EPS)
    return inc, low, high


def inclusion_stats(source, trim: TrimSpec, sample: SampleSpec, categories=None) -> dict:
    """Share of sample months each category is included or fully trimmed.

    ``source`` is a panel or a list of cross-sections.  Months where a
    category is absent from the cross-section count in the denominator only.
    """
    sections = _sections_in(source, sample)
    if categories is None:
        categories = (source.categories if isinstance(source, CategoryPanel)
                      else sorted({c for xs in sections for c in xs.ids}))
    counts = {c: np.zeros(3) for c in categories}
    for xs in sections:
        flags = np.stack(month_inclusion(xs, trim), axis=1)
        for cat, row in zip(xs.ids, flags):
            counts[str(cat)] += row
    n = len(sections)
    return {c: InclusionStats(*(v / n).tolist()) for c, v in counts.items()}
