"""End-to-end detection: lag differences -> per-frame max persistence -> period."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import NamedTuple, Optional

import numpy as np

from . import cubical, morphology, spectral
from .errors import (AllForeground, DiurnalError, NoCompleteDays, NoPairs, NoSignal,
                     TooFewSamples)
from .grid_io import FrameStack, iso_timestamp, load_stack

ALL_FOREGROUND = "AllForeground"
ALL_BACKGROUND = "AllBackground"
NO_LAG_PARTNER = "NoLagPartner"


@dataclass(frozen=True)
class PipelineConfig:
    mu: float = 80.0
    lag_minutes: int = 360
    opening_enabled: bool = False
    kernel: Optional[tuple] = None  # None: ~16 km square, see morphology.default_kernel
    km_per_pixel: Optional[float] = None  # None: take it from the stack
    dt_minutes: Optional[int] = None  # None: smallest spacing in the series
    crop: Optional[tuple] = None
    gridsat_convert: bool = False
    workers: Optional[int] = None  # None: DIURNAL_TDA_THREADS, 0 = auto

    def __post_init__(self):
        if self.lag_minutes <= 0:
            raise ValueError("lag_minutes must be positive")
        if self.dt_minutes is not None and self.dt_minutes <= 0:
            raise ValueError("dt_minutes must be positive")
        if self.kernel is not None and min(self.kernel) < 1:
            raise ValueError("kernel must be at least 1x1")
        if self.km_per_pixel is not None and not self.km_per_pixel > 0:
            raise ValueError("km_per_pixel must be positive")

    def structuring_element(self, km_per_pixel: float) -> morphology.StructuringElement:
        if self.kernel is None:
            return morphology.default_kernel(km_per_pixel)
        return morphology.StructuringElement(*self.kernel)


class FrameStages(NamedTuple):
    diff: np.ndarray
    mask: np.ndarray
    opened: Optional[np.ndarray]
    distance: np.ndarray
    diagram: cubical.PersistenceDiagram
    max_persistence: float
    flags: tuple


@dataclass(frozen=True, eq=False)
class DetectionReport:
    config: PipelineConfig
    km_per_pixel: float
    series: spectral.TimeSeries
    uniform: spectral.UniformSeries
    analysed: spectral.UniformSeries
    spectrum: spectral.Spectrum
    dominant_freq: float
    period_hours: float
    reconstruction: spectral.UniformSeries
    frame_flags: dict = field(default_factory=dict)
    dropped_by_truncation: int = 0

    def to_dict(self) -> dict:
        cfg = asdict(self.config)
        cfg["km_per_pixel"] = self.km_per_pixel
        frames = []
        for t, v in zip(self.series.times.tolist(), self.series.values.tolist()):
            frames.append({"timestamp": iso_timestamp(t), "max_persistence_km": v,
                           "flags": list(self.frame_flags.get(t, ()))})
        skipped = [iso_timestamp(t) for t, f in sorted(self.frame_flags.items())
                   if NO_LAG_PARTNER in f]
        return {
            "config": cfg,
            "frames": frames,
            "skipped_frames": skipped,
            "analysis_window": {
                "start": iso_timestamp(int(self.analysed.t0)),
                "samples": len(self.analysed),
                "dt_minutes": self.analysed.dt,
                "dropped_by_truncation": self.dropped_by_truncation,
            },
            "dominant_frequency_cycles_per_day": self.dominant_freq,
            "period_hours": self.period_hours,
        }


def lag_difference(stack: FrameStack, lag_minutes: int) -> list:
    """``(t, S(t + lag) - S(t))`` for every frame with an exact partner."""
    if len(stack) < 2:
        raise NoPairs("need at least two frames")
    grids = {f.timestamp: f.grid.values for f in stack}
    out = [(t, grids[t + lag_minutes] - g) for t, g in grids.items() if t + lag_minutes in grids]
    if not out:
        raise NoPairs(f"no frame has a partner {lag_minutes} minutes later")
    return out


def unpaired(stack: FrameStack, lag_minutes: int) -> list:
    stamps = set(stack.timestamps)
    return [t for t in stack.timestamps if t + lag_minutes not in stamps]


def frame_stages(diff, cfg: PipelineConfig, km_per_pixel: float) -> FrameStages:
    """Every intermediate of the per-frame computation."""
    diff = np.asarray(diff, dtype=np.float64)
    mask = morphology.threshold(diff, cfg.mu)
    opened = None
    if cfg.opening_enabled:
        # opening acts on the above-threshold set, clearing specks smaller than the kernel
        above = morphology.opening(~mask, cfg.structuring_element(km_per_pixel))
        opened = ~above
    final = mask if opened is None else opened
    flags = ()
    if not final.any():
        flags = (ALL_BACKGROUND,)
    try:
        distance = morphology.distance_transform(final, km_per_pixel)
    except AllForeground:
        distance = np.zeros(diff.shape)
        flags = (ALL_FOREGROUND,)
    if flags:
        diagram = cubical.PersistenceDiagram((), 1)
    else:
        diagram = cubical.compute_persistence(cubical.build_filtration(distance), 1)
    return FrameStages(diff, mask, opened, distance, diagram, diagram.max_persistence(), flags)


def frame_max_persistence(diff, cfg: PipelineConfig, km_per_pixel: float = 1.0) -> tuple:
    """``(max persistence in km, flags)`` for one difference grid."""
    st = frame_stages(diff, cfg, km_per_pixel)
    return st.max_persistence, st.flags


def _worker_count(cfg: PipelineConfig) -> int:
    n = cfg.workers
    if n is None:
        n = int(os.environ.get("DIURNAL_TDA_THREADS", "0") or 0)
    return n if n > 0 else (os.cpu_count() or 1)


def _frame_job(args):
    diff, cfg, kmpp = args
    return frame_max_persistence(diff, cfg, kmpp)


def max_persistence_series(stack: FrameStack, cfg: PipelineConfig) -> tuple:
    """Max persistence per lag pair, as a TimeSeries, plus per-frame flags."""
    kmpp = cfg.km_per_pixel or stack.km_per_pixel
    diffs = lag_difference(stack, cfg.lag_minutes)
    jobs = [(d, cfg, kmpp) for _, d in diffs]
    workers = min(_worker_count(cfg), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_frame_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_frame_job(j) for j in jobs]
    flags = {t: tuple(fl) for (t, _), (_, fl) in zip(diffs, results) if fl}
    for t in unpaired(stack, cfg.lag_minutes):
        flags[t] = flags.get(t, ()) + (NO_LAG_PARTNER,)
    series = spectral.TimeSeries([t for t, _ in diffs], [v for v, _ in results])
    return series, flags


def analyse_series(series: spectral.TimeSeries, dt_minutes: Optional[int] = None) -> dict:
    """Resample, truncate to full days, and extract the dominant period."""
    if len(series) < 2:
        raise TooFewSamples("need at least two lag pairs")
    dt = int(dt_minutes or np.diff(series.times).min())
    t0 = -(-int(series.times[0]) // dt) * dt
    uniform = spectral.resample_linear(series, dt, t0)
    analysed = spectral.truncate_full_days(uniform)
    spectrum = spectral.dft(analysed)
    freq = spectral.dominant_frequency(spectrum)
    return {
        "uniform": uniform,
        "analysed": analysed,
        "spectrum": spectrum,
        "dominant_freq": freq,
        "period_hours": spectral.period_hours(freq),
        "reconstruction": spectral.reconstruct(spectrum, freq),
        "dropped_by_truncation": len(uniform) - len(analysed),
    }


def run(stack: FrameStack, cfg: PipelineConfig = PipelineConfig()) -> DetectionReport:
    series, flags = max_persistence_series(stack, cfg)
    try:
        result = analyse_series(series, cfg.dt_minutes)
    except (NoCompleteDays, NoSignal) as exc:
        raise type(exc)(f"mu={cfg.mu:g}: {exc}") from None
    return DetectionReport(config=cfg, km_per_pixel=cfg.km_per_pixel or stack.km_per_pixel,
                           series=series, frame_flags=flags, **result)


class SweepRow(NamedTuple):
    mu: float
    period_hours: Optional[float]
    status: str


def threshold_sweep(stack: FrameStack, cfg: PipelineConfig, mus) -> list:
    """Run the pipeline once per threshold, recording failures instead of raising."""
    rows = []
    for mu in mus:
        try:
            report = run(stack, replace(cfg, mu=float(mu)))
        except DiurnalError as exc:
            rows.append(SweepRow(float(mu), None, exc.code))
        else:
            rows.append(SweepRow(float(mu), report.period_hours, "ok"))
    return rows


def load_for(directory, cfg: PipelineConfig) -> FrameStack:
    return load_stack(directory, km_per_pixel=cfg.km_per_pixel,
                      gridsat_convert=cfg.gridsat_convert or None,
                      crop=cfg.crop, workers=cfg.workers)
