"""Period estimation for a scalar time series.

Times are integer minutes since the epoch (UTC); frequencies are in cycles
per day throughout.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .grid_io import iso_timestamp
from .errors import (BinNotFound, NoCompleteDays, NonPositiveFrequency, NoSignal,
                     OutOfRange, TooFewSamples)

MINUTES_PER_DAY = 1440
# relative size below which a positive-frequency coefficient counts as zero
SIGNAL_RTOL = 1e-10
# powers this close to the maximum (relative) are treated as tied
TIE_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class TimeSeries:
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.int64).ravel()
        v = np.asarray(self.values, dtype=np.float64).ravel()
        if t.shape != v.shape:
            raise ValueError("times and values differ in length")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must strictly increase")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.times.size


@dataclass(frozen=True, eq=False)
class UniformSeries:
    t0: int
    dt: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).ravel()
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if v.size < 2:
            raise TooFewSamples("a uniform series needs at least 2 samples")
        object.__setattr__(self, "t0", int(self.t0))
        object.__setattr__(self, "dt", int(self.dt))
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.values.size, dtype=np.int64)

    @property
    def dt_days(self) -> float:
        return self.dt / MINUTES_PER_DAY


@dataclass(frozen=True, eq=False)
class Spectrum:
    coefficients: np.ndarray
    freq_bins: np.ndarray  # cycles/day, numpy.fft.fftfreq layout
    dt: int
    t0: int = 0

    @property
    def n(self) -> int:
        return self.coefficients.size

    @property
    def power(self) -> np.ndarray:
        return np.abs(self.coefficients) ** 2

    def positive_bins(self) -> np.ndarray:
        return np.arange(1, self.n // 2 + 1)

    def bin_frequency(self, k: int) -> float:
        return k / (self.n * self.dt / MINUTES_PER_DAY)


def resample_linear(ts: TimeSeries, dt: int, t0: Optional[int] = None) -> UniformSeries:
    """Linear interpolation onto ``t0 + k*dt`` inside ``[ts.times[0], ts.times[-1]]``.

    ``t0`` defaults to the first sample time.
    """
    if len(ts) < 2:
        raise TooFewSamples(f"need at least 2 samples, got {len(ts)}")
    dt = int(dt)
    if dt <= 0:
        raise ValueError("dt must be positive")
    t, v = ts.times, ts.values
    t0 = int(t[0]) if t0 is None else int(t0)
    if t0 < t[0] or t0 > t[-1]:
        raise OutOfRange(f"grid start {t0} lies outside [{t[0]}, {t[-1]}]")
    grid = np.arange(t0, int(t[-1]) + 1, dt, dtype=np.int64)
    if grid.size < 2:
        raise TooFewSamples("series span is shorter than one step")
    j = np.searchsorted(t, grid, side="right") - 1
    exact = t[j] == grid
    jn = np.minimum(j + 1, t.size - 1)
    frac = np.where(exact, 0.0, (grid - t[j]) / np.where(exact, 1, t[jn] - t[j]))
    out = np.where(exact, v[j], v[j] + frac * (v[jn] - v[j]))
    return UniformSeries(t0, dt, out)


def truncate_full_days(series: Union[TimeSeries, UniformSeries], dt: Optional[int] = None):
    """Keep only UTC days whose first and last grid slots are both present.

    For a :class:`TimeSeries` the slot spacing ``dt`` must be given; for a
    :class:`UniformSeries` it is the series step.
    """
    uniform = isinstance(series, UniformSeries)
    if uniform:
        dt = series.dt
    elif dt is None:
        raise ValueError("dt is required to truncate an irregular series")
    times = series.times
    if times.size == 0:
        raise NoCompleteDays("empty series")
    present = set(times.tolist())
    days = np.floor_divide(times, MINUTES_PER_DAY)
    last_slot = ((MINUTES_PER_DAY - 1) // dt) * dt
    full = {int(d) for d in np.unique(days)
            if d * MINUTES_PER_DAY in present and d * MINUTES_PER_DAY + last_slot in present}
    if not full:
        raise NoCompleteDays("no UTC day is fully covered")
    keep = np.isin(days, sorted(full))
    if uniform:
        idx = np.nonzero(keep)[0]
        if np.any(np.diff(idx) != 1):
            raise NoCompleteDays("fully covered days are not contiguous")
        return UniformSeries(int(times[idx[0]]), dt, series.values[idx])
    return TimeSeries(times[keep], series.values[keep])


def dft(u: UniformSeries) -> Spectrum:
    """Discrete Fourier transform ``F_n = sum_k f_k exp(-2 pi i n k / N)``."""
    f = np.asarray(u.values, dtype=np.float64)
    if f.size < 2:
        raise TooFewSamples("need at least 2 samples")
    return Spectrum(np.fft.fft(f), np.fft.fftfreq(f.size, d=u.dt_days), u.dt, u.t0)


def inverse_dft(coefficients) -> np.ndarray:
    return np.fft.ifft(np.asarray(coefficients, dtype=np.complex128))


def power_spectrum(s: Spectrum) -> list:
    """``(frequency, |F_n|^2)`` for the positive bins ``n = 1 .. N//2``."""
    power = s.power
    return [(s.bin_frequency(k), float(power[k])) for k in s.positive_bins()]


def _has_signal(s: Spectrum) -> bool:
    power = s.power
    scale = np.sqrt(power.sum())  # sqrt(N * sum f^2) by Parseval
    pos = power[1:s.n // 2 + 1]
    return bool(pos.size) and scale > 0 and np.sqrt(pos.max()) > SIGNAL_RTOL * scale


def dominant_frequency(s: Spectrum) -> float:
    """Frequency of the strongest positive bin; ties go to the lowest frequency."""
    if s.n < 4:
        raise TooFewSamples("need at least 4 samples to pick a dominant frequency")
    if not _has_signal(s):
        raise NoSignal("all positive-frequency power is zero")
    pos = s.power[1:s.n // 2 + 1]
    best = int(np.argmax(pos >= pos.max() * (1 - TIE_RTOL))) + 1
    return s.bin_frequency(best)


def period_hours(f: float) -> float:
    """Cycle length in hours for a frequency in cycles/day."""
    if not f > 0:
        raise NonPositiveFrequency(f"frequency must be positive, got {f}")
    return 24.0 / f


def _bin_index(s: Spectrum, f: float) -> int:
    for k in s.positive_bins():
        if np.isclose(s.bin_frequency(k), f, rtol=1e-9, atol=0):
            return int(k)
    raise BinNotFound(f"{f} cycles/day is not a positive bin frequency of this spectrum")


def reconstruct(s: Spectrum, f: float) -> UniformSeries:
    """Inverse DFT keeping only the DC bin, the bin at ``f`` and its mirror."""
    k = _bin_index(s, f)
    kept = np.zeros_like(s.coefficients)
    for idx in {0, k, (s.n - k) % s.n}:
        kept[idx] = s.coefficients[idx]
    out = inverse_dft(kept)
    scale = max(np.abs(out).max(), 1.0)
    assert np.abs(out.imag).max() <= 1e-9 * scale, "reconstruction is not real"
    return UniformSeries(s.t0, s.dt, out.real)


# -- CSV export ------------------------------------------------------------------

def spectrum_csv(s: Spectrum) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["freq_cycles_per_day", "power"])
    for f, p in power_spectrum(s):
        w.writerow([repr(float(f)), repr(float(p))])
    return buf.getvalue()


def series_csv(times, values) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["timestamp_iso8601", "value_km"])
    for t, v in zip(times, values):
        w.writerow([iso_timestamp(int(t)), repr(float(v))])
    return buf.getvalue()


def write_spectrum_csv(path, s: Spectrum) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(spectrum_csv(s))


def write_series_csv(path, times, values) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(series_csv(times, values))
