"""Ex-post trend-inflation targets built from a headline series.

Four targets are provided:

* ``centered`` -- ``window``-month centered moving average.  Even windows are
  split left-heavy: 36 months cover ``t-18 .. t+17``.
* ``future`` -- mean of months ``t+lead+1 .. t+lead+window`` (12, 12 gives
  ``t+13 .. t+24``).
* ``forward`` -- the same with ``lead=0`` and ``window=24``.
* ``bandpass`` -- trend of a Christiano-Fitzgerald random-walk filter that
  removes cycles shorter than ``cutoff_period`` months.

Moving averages are emitted only where the whole window is observed.  The
band-pass trend is defined on every month.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, SeriesTooShort, WindowTooLarge
from .indices import InflationSeries

TREND_KINDS = ("centered", "future", "forward", "bandpass")


@dataclass(frozen=True)
class TrendSpec:
    """Definition of one trend target.

    ``window`` is ignored for ``bandpass``; ``cutoff_period`` only applies to
    ``bandpass``.  ``name`` labels the target in reports and defaults to the
    conventional name of the kind.
    """

    kind: str
    window: int = 36
    lead: int = 0
    cutoff_period: int = 39
    name: str = ""

    def __post_init__(self):
        if self.kind not in TREND_KINDS:
            raise ConfigError(f"unknown trend kind {self.kind!r}; choose from {TREND_KINDS}")
        if self.window < 1:
            raise ConfigError("window must be >= 1")
        if self.lead < 0:
            raise ConfigError("lead must be >= 0")
        if self.kind == "bandpass" and self.cutoff_period < 2:
            raise ConfigError("cutoff_period must be >= 2")
        if not self.name:
            default = {"centered": "current"}.get(self.kind, self.kind)
            object.__setattr__(self, "name", default)

    @property
    def default_bandwidth(self) -> int:
        """Newey-West bandwidth matching the overlap of the target window."""
        if self.kind == "bandpass":
            return self.cutoff_period - 1
        return self.window - 1

    @classmethod
    def from_dict(cls, d: dict) -> "TrendSpec":
        kind = d.get("kind")
        base = PRESETS.get(d.get("preset", kind))
        if base is None and kind is None:
            raise ConfigError(f"trend needs a kind: {d}")
        fields = dict(kind=base.kind, window=base.window, lead=base.lead,
                      cutoff_period=base.cutoff_period, name=base.name) if base else {}
        for key in ("kind", "window", "lead", "cutoff_period", "name"):
            if key in d:
                fields[key] = d[key]
        if "name" not in d and base is not None and fields["kind"] != base.kind:
            fields["name"] = ""
        return cls(**fields)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "window": self.window, "lead": self.lead,
                "cutoff_period": self.cutoff_period, "name": self.name}


CURRENT = TrendSpec("centered", window=36)
FUTURE = TrendSpec("future", window=12, lead=12)
FORWARD = TrendSpec("forward", window=24, lead=0)
BANDPASS = TrendSpec("bandpass", window=1, cutoff_period=39)

PRESETS = {
    "current": CURRENT, "centered": CURRENT,
    "future": FUTURE, "forward": FORWARD, "bandpass": BANDPASS,
}


@dataclass(frozen=True)
class TrendSeries:
    months: np.ndarray
    values: np.ndarray
    spec: TrendSpec

    def __len__(self):
        return len(self.values)


def _windowed_mean(values: np.ndarray, offset: int, window: int):
    """Mean of ``values[t+offset : t+offset+window]`` where fully observed.

    Returns the first valid ``t`` and the means.
    """
    n = len(values)
    start = max(0, -offset)
    stop = min(n, n - offset - window + 1)
    if stop <= start:
        raise WindowTooLarge(f"window {window} at offset {offset} never fits {n} months")
    windows = np.lib.stride_tricks.sliding_window_view(values, window)
    return start, windows[start + offset: stop + offset].mean(axis=-1)


def _series(headline: InflationSeries, start: int, values, spec: TrendSpec) -> TrendSeries:
    months = headline.months[start:start + len(values)]
    return TrendSeries(months, np.asarray(values, dtype=float), spec)


def centered_ma(headline: InflationSeries, window: int = 36) -> TrendSeries:
    """Centered moving average; even windows take one more month before ``t``."""
    before = window // 2
    start, values = _windowed_mean(np.asarray(headline.values), -before, window)
    return _series(headline, start, values, TrendSpec("centered", window=window))


def forward_ma(headline: InflationSeries, lead: int, window: int) -> TrendSeries:
    """Mean of headline over ``t+lead+1 .. t+lead+window``."""
    start, values = _windowed_mean(np.asarray(headline.values), lead + 1, window)
    kind = "forward" if lead == 0 else "future"
    return _series(headline, start, values, TrendSpec(kind, window=window, lead=lead))


def lowpass_coefficients(n: int, cutoff_period: float) -> np.ndarray:
    """Ideal low-pass weights ``b_0 .. b_{n-1}`` for cycles >= ``cutoff_period``."""
    w = 2 * np.pi / cutoff_period
    j = np.arange(1, n)
    return np.concatenate(([w / np.pi], np.sin(w * j) / (np.pi * j)))


def cf_lowpass_weights(n: int, cutoff_period: float = 39) -> np.ndarray:
    """Full-sample random-walk CF low-pass weights.

    Row ``t`` holds the weights applied to observations ``0 .. n-1`` to form
    the trend at ``t``.  Interior observations get the ideal weight
    ``b_{|s-t|}``; each endpoint also absorbs the ideal weights of the
    unobserved tail beyond it (a random walk repeats the endpoint forever),
    so every row sums to one.
    """
    b = lowpass_coefficients(n, cutoff_period)
    # sum_{j>=1} b_j = (1 - b_0) / 2, so the tail past lag k-1 is that minus a partial sum
    half = (1.0 - b[0]) / 2.0
    partial = np.concatenate(([0.0], np.cumsum(b[1:])))  # partial[k] = sum_{j=1}^{k} b_j
    t = np.arange(n)
    lags = np.abs(t[:, None] - t[None, :])
    W = b[lags]
    # right endpoint: weights for lags >= n-1-t, i.e. everything from s = n-1 on
    k_right = n - 1 - t
    right = np.where(k_right == 0, b[0] + half, half - partial[np.maximum(k_right - 1, 0)])
    k_left = t
    left = np.where(k_left == 0, b[0] + half, half - partial[np.maximum(k_left - 1, 0)])
    if n == 1:
        return np.ones((1, 1))
    W[:, -1] = right
    W[:, 0] = left
    # t == 0 or t == n-1: the endpoint is the point itself and carries b_0 plus its tail
    W[0, 0] = b[0] + half
    W[-1, -1] = b[0] + half
    return W


def cf_lowpass(headline: InflationSeries, cutoff_period: float = 39, drift: bool = True) -> TrendSeries:
    """Christiano-Fitzgerald random-walk low-pass trend.

    Parameters
    ----------
    headline : InflationSeries
    cutoff_period : float
        Shortest cycle length (months) kept in the trend.
    drift : bool
        Remove the straight line through the end points before filtering and
        add it back afterwards.
    """
    x = np.asarray(headline.values, dtype=float)
    n = len(x)
    if n <= cutoff_period:
        raise SeriesTooShort(f"need more than {cutoff_period} months, have {n}")
    line = np.zeros(n)
    if drift:
        line = np.arange(n) * (x[-1] - x[0]) / (n - 1)
    trend = cf_lowpass_weights(n, cutoff_period) @ (x - line) + line
    spec = TrendSpec("bandpass", window=1, cutoff_period=int(cutoff_period))
    return TrendSeries(headline.months, trend, spec)


def trend(headline: InflationSeries, spec: TrendSpec) -> TrendSeries:
    """Build the target described by ``spec``."""
    if spec.kind == "centered":
        out = centered_ma(headline, spec.window)
    elif spec.kind in ("future", "forward"):
        out = forward_ma(headline, spec.lead, spec.window)
    else:
        out = cf_lowpass(headline, spec.cutoff_period)
    return TrendSeries(out.months, out.values, spec)
