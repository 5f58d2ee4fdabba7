"""Losses, forecast-comparison inference and descriptive statistics.

All variances use population (``1/n``) scaling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    EmptyOverlap,
    InsufficientHistory,
    LengthMismatch,
    WindowTooLarge,
    ZeroMean,
    ZeroVariance,
)
from .panel import format_month, parse_month

REGIME_THRESHOLDS = (2.5, 5.0)


@dataclass(frozen=True)
class SampleSpec:
    """Inclusive month range."""

    start: np.datetime64
    end: np.datetime64

    def __post_init__(self):
        start = np.datetime64(self.start, "M")
        end = np.datetime64(self.end, "M")
        if start > end:
            raise ConfigError(f"sample start {start} after end {end}")
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "end", end)

    @classmethod
    def parse(cls, text: str) -> "SampleSpec":
        """``"1970-2022"`` (whole years) or ``"1970-01:2022-10"``."""
        text = text.strip()
        try:
            if ":" in text:
                a, b = text.split(":")
                return cls(parse_month(a), parse_month(b))
            a, b = text.split("-")
            return cls(np.datetime64(f"{int(a):04d}-01", "M"), np.datetime64(f"{int(b):04d}-12", "M"))
        except ValueError:
            raise ConfigError(f"bad sample {text!r}, expected YYYY-YYYY or YYYY-MM:YYYY-MM") from None

    def mask(self, months: np.ndarray) -> np.ndarray:
        return (months >= self.start) & (months <= self.end)

    @property
    def label(self) -> str:
        return f"{format_month(self.start)}:{format_month(self.end)}"


FULL_SAMPLE = SampleSpec(np.datetime64("1000-01", "M"), np.datetime64("9999-12", "M"))


@dataclass(frozen=True)
class DmResult:
    statistic: float
    p_value: float
    bandwidth: int
    n: int
    degenerate: bool = False


def align(a_months, a_values, b_months, b_values, sample: SampleSpec | None = None):
    """Months where both series are defined (and inside ``sample``)."""
    months, ia, ib = np.intersect1d(np.asarray(a_months, dtype="datetime64[M]"),
                                    np.asarray(b_months, dtype="datetime64[M]"),
                                    assume_unique=True, return_indices=True)
    a = np.asarray(a_values, dtype=float)[ia]
    b = np.asarray(b_values, dtype=float)[ib]
    if sample is not None:
        keep = sample.mask(months)
        months, a, b = months[keep], a[keep], b[keep]
    return months, a, b


def forecast_errors(series, target, sample: SampleSpec | None = None):
    """Months and ``series - target`` over the common, in-sample months."""
    months, a, b = align(series.months, series.values, target.months, target.values, sample)
    if len(months) == 0:
        raise EmptyOverlap("series and target do not overlap in the sample")
    return months, a - b


def rmse(series, target, sample: SampleSpec | None = None) -> float:
    """Root-mean-square gap between ``series`` and ``target``."""
    _, err = forecast_errors(series, target, sample)
    return float(np.sqrt(np.mean(err ** 2)))


def newey_west_lrv(d, bandwidth: int) -> float:
    """Bartlett-kernel long-run variance of ``d``.

    ``gamma_0 + 2 * sum_{k=1}^{bw} (1 - k/(bw+1)) * gamma_k`` with
    autocovariances about the sample mean scaled by ``1/n``.
    """
    d = np.asarray(d, dtype=float)
    n = len(d)
    if n < 2:
        raise InsufficientHistory("need at least 2 observations")
    if not 0 <= bandwidth < n:
        raise ConfigError(f"bandwidth must be in [0, {n - 1}], got {bandwidth}")
    if np.all(d == d[0]):
        raise ZeroVariance("loss differential is constant")
    u = d - d.mean()
    lrv = u @ u / n
    for k in range(1, bandwidth + 1):
        lrv += 2.0 * (1.0 - k / (bandwidth + 1)) * (u[k:] @ u[:-k]) / n
    if lrv <= 0:
        raise ZeroVariance("long-run variance is not positive")
    return float(lrv)


def normal_sf_two_sided(z: float) -> float:
    """``2 * Phi(-|z|)``."""
    return math.erfc(abs(z) / math.sqrt(2.0))


def dm_test(errors_a, errors_b, bandwidth: int) -> DmResult:
    """Diebold-Mariano test of equal squared-error loss.

    The loss differential is ``errors_a**2 - errors_b**2``; a positive
    statistic means ``a`` has the larger loss.
    """
    a = np.asarray(errors_a, dtype=float)
    b = np.asarray(errors_b, dtype=float)
    if a.shape != b.shape:
        raise LengthMismatch(f"error sequences differ in length: {len(a)} vs {len(b)}")
    d = a ** 2 - b ** 2
    n = len(d)
    lrv = newey_west_lrv(d, bandwidth)
    stat = float(d.mean() / math.sqrt(lrv / n))
    return DmResult(stat, normal_sf_two_sided(stat), bandwidth, n)


def dm_summary(errors_a, errors_b, bandwidth: int) -> DmResult:
    """:func:`dm_test` that reports identical losses as statistic 0, p 1."""
    try:
        return dm_test(errors_a, errors_b, bandwidth)
    except ZeroVariance:
        return DmResult(0.0, 1.0, bandwidth, len(errors_a), degenerate=True)


def dm_pvalues(errors: np.ndarray, reference: np.ndarray, bandwidth: int) -> np.ndarray:
    """Two-sided DM p-values of each column of ``errors`` against ``reference``.

    Vectorized form of :func:`dm_summary` for an ``(n, m)`` error matrix;
    degenerate columns get p = 1.
    """
    errors = np.asarray(errors, dtype=float)
    reference = np.asarray(reference, dtype=float)
    n = errors.shape[0]
    if not 0 <= bandwidth < n:
        raise ConfigError(f"bandwidth must be in [0, {n - 1}], got {bandwidth}")
    d = errors ** 2 - (reference ** 2)[:, None]
    u = d - d.mean(axis=0)
    lrv = np.einsum("ij,ij->j", u, u) / n
    for k in range(1, bandwidth + 1):
        lrv += 2.0 * (1.0 - k / (bandwidth + 1)) * np.einsum("ij,ij->j", u[k:], u[:-k]) / n
    out = np.ones(d.shape[1])
    ok = ~np.all(d == d[:1], axis=0) & (lrv > 0)
    stat = d.mean(axis=0)[ok] / np.sqrt(lrv[ok] / n)
    out[ok] = [normal_sf_two_sided(z) for z in stat]
    return out


def _sample_values(series, sample):
    values = np.asarray(series.values, dtype=float)
    if sample is not None:
        values = values[sample.mask(series.months)]
    return values


def coef_variation(series, sample: SampleSpec | None = None) -> float:
    """Population standard deviation over mean."""
    values = _sample_values(series, sample)
    if len(values) == 0:
        raise EmptyOverlap("no observations in sample")
    mean = values.mean()
    if mean == 0:
        raise ZeroMean("mean is zero")
    return float(values.std() / mean)


@dataclass(frozen=True)
class RegimeRow:
    regime: str
    mean: float | None
    sd: float | None
    cov: float | None
    month_count: int


def regime_summary(series, headline, thresholds=REGIME_THRESHOLDS) -> list:
    """Mean, sd and coefficient of variation of ``series`` by headline regime.

    Regimes are ``headline < lo``, ``lo <= headline < hi``, ``hi <= headline``
    followed by the full sample.  Empty regimes have ``None`` statistics.
    """
    lo, hi = thresholds
    _, x, h = align(series.months, series.values, headline.months, headline.values)
    groups = [
        (f"pi<{lo:g}", h < lo),
        (f"{lo:g}<=pi<{hi:g}", (h >= lo) & (h < hi)),
        (f"{hi:g}<=pi", h >= hi),
        ("full", np.ones(len(h), dtype=bool)),
    ]
    rows = []
    for name, mask in groups:
        v = x[mask]
        if len(v) == 0:
            rows.append(RegimeRow(name, None, None, None, 0))
            continue
        mean, sd = float(v.mean()), float(v.std())
        rows.append(RegimeRow(name, mean, sd, sd / mean if mean != 0 else None, len(v)))
    return rows


def rolling_std(series, window: int = 24):
    """Trailing-window population standard deviation.

    Returns the months (from the ``window``-th onward) and the values.
    """
    values = np.asarray(series.values, dtype=float)
    if window < 1 or len(values) < window:
        raise WindowTooLarge(f"window {window} exceeds series length {len(values)}")
    sd = np.lib.stride_tricks.sliding_window_view(values, window).std(axis=-1)
    return series.months[window - 1:], sd


def sign_match(series, headline) -> float:
    """Share of months where the change in ``series`` has the sign of headline's."""
    _, x, h = align(series.months, series.values, headline.months, headline.values)
    if len(x) < 2:
        raise InsufficientHistory("need at least 2 aligned months")
    return float(np.mean(np.sign(np.diff(x)) == np.sign(np.diff(h))))
