"""Synthetic storm-like frame stacks with a known diurnal pulse.

Each frame is a fixed radial background plus a warm disk whose radius grows
at ``pulse_speed_km_per_hr`` and snaps back to zero once per period, ringed
by a cool band of width ``ring_width_km`` just outside it.  A lag difference
``S(t + lag) - S(t)`` therefore contains an annulus of value ``>= warm``
between the two disk radii, enclosing a zero-valued hole; everywhere else
it is at most ``cool``.  Any threshold in ``(cool, warm]`` isolates exactly
the annulus.

Salt noise is a spike of ``warm`` added to frame ``t + lag`` at isolated
pixels well inside the hole of the ``t`` difference, so it shows up as
above-threshold specks there and only pushes values down elsewhere.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import BadParams
from .grid_io import Frame, FrameStack, Grid, parse_timestamp, write_stack

DEFAULT_START = parse_timestamp("20070901T0000Z")


@dataclass(frozen=True)
class SynthParams:
    rows: int = 128
    cols: int = 128
    km_per_pixel: float = 8.0
    period_hours: float = 24.0
    pulse_speed_km_per_hr: float = 18.0
    ring_width_km: float = 80.0
    cool_amplitude: float = 30.0
    warm_amplitude: float = 120.0
    sample_dt_minutes: int = 180
    duration_days: int = 4
    salt_count: int = 0
    rng_seed: int = 0
    drift_km_per_hr: tuple = (0.0, 0.0)  # (dx, dy): columns, rows
    lag_minutes: int = 360
    start: int = DEFAULT_START  # minutes since epoch
    phase_hours: float = 0.0  # time of day at which the pulse restarts

    def validate(self) -> "SynthParams":
        problems = []
        if self.rows < 4 or self.cols < 4:
            problems.append("rows and cols must be at least 4")
        if not self.km_per_pixel > 0:
            problems.append("km_per_pixel must be positive")
        if not self.period_hours > 0:
            problems.append("period_hours must be positive")
        if self.pulse_speed_km_per_hr < 0 or self.ring_width_km < 0:
            problems.append("pulse speed and ring width must be non-negative")
        if self.cool_amplitude < 0 or self.warm_amplitude < 0:
            problems.append("amplitudes must be non-negative")
        if self.sample_dt_minutes <= 0 or 1440 % self.sample_dt_minutes:
            problems.append("sample_dt_minutes must be a positive divisor of 1440")
        if self.lag_minutes <= 0 or (self.sample_dt_minutes > 0
                                     and self.lag_minutes % self.sample_dt_minutes):
            problems.append("lag_minutes must be a positive multiple of sample_dt_minutes")
        if self.duration_days < 2:
            problems.append("duration_days must be at least 2")
        if self.salt_count < 0:
            problems.append("salt_count must be non-negative")
        if len(self.drift_km_per_hr) != 2:
            problems.append("drift must be a (dx, dy) pair")
        if problems:
            raise BadParams("; ".join(problems))
        return self

    @property
    def times(self) -> list:
        """Frame times covering ``duration_days`` of lag pairs."""
        end = self.start + self.duration_days * 1440 - self.sample_dt_minutes + self.lag_minutes
        return list(range(self.start, end + 1, self.sample_dt_minutes))


def pulse_radius(params: SynthParams, t: int) -> float:
    hours = (t - params.start) / 60.0 - params.phase_hours
    return params.pulse_speed_km_per_hr * (hours % params.period_hours)


def _radius_km(params: SynthParams, t: int) -> np.ndarray:
    hours = (t - params.start) / 60.0
    dx, dy = params.drift_km_per_hr
    cy = (params.rows - 1) / 2.0 + dy * hours / params.km_per_pixel
    cx = (params.cols - 1) / 2.0 + dx * hours / params.km_per_pixel
    yy, xx = np.mgrid[:params.rows, :params.cols]
    return np.hypot(yy - cy, xx - cx) * params.km_per_pixel


def _background(params: SynthParams) -> np.ndarray:
    r = _radius_km(params, params.start)
    return np.round(190.0 + 40.0 * r / r.max())


def render(params: SynthParams, t: int) -> np.ndarray:
    """Noise-free brightness field at time ``t``."""
    r = _radius_km(params, t)
    R = pulse_radius(params, t)
    field = _background(params)
    field = field + params.warm_amplitude * (r < R)
    field = field - params.cool_amplitude * ((r >= R) & (r < R + params.ring_width_km))
    return field


def _salt(params: SynthParams, t: int, index: int) -> list:
    """Pixels for the noise in the difference starting at ``t``."""
    if params.salt_count == 0 or t < params.start:
        return []
    R = pulse_radius(params, t)
    if pulse_radius(params, t + params.lag_minutes) <= R:
        return []  # the pulse restarted inside this window: no hole
    hours = params.lag_minutes / 60.0
    drift = float(np.hypot(*params.drift_km_per_hr)) * hours
    margin = 3.0 * params.km_per_pixel + drift
    inside = np.argwhere(_radius_km(params, t) < R - margin)
    if inside.size == 0:
        return []
    rng = np.random.default_rng([params.rng_seed, index])
    chosen = []
    for i, j in inside[rng.permutation(len(inside))]:
        if all(max(abs(i - a), abs(j - b)) >= 3 for a, b in chosen):
            chosen.append((int(i), int(j)))
            if len(chosen) == params.salt_count:
                break
    return chosen


def generate(params: SynthParams) -> FrameStack:
    params.validate()
    frames = []
    for index, t in enumerate(params.times):
        field = render(params, t)
        for i, j in _salt(params, t - params.lag_minutes, index):
            field[i, j] += params.warm_amplitude
        frames.append(Frame(t, Grid(field, params.km_per_pixel)))
    return FrameStack(tuple(frames), params.km_per_pixel)


def truth(params: SynthParams) -> dict:
    return {"period_hours": params.period_hours, "params": asdict(params)}


def write_synth(directory, params: SynthParams, fmt: str = "csv") -> Path:
    """Generate a stack and write it, with ``manifest.json`` and ``truth.json``."""
    stack = generate(params)
    directory = Path(directory)
    write_stack(directory, stack, fmt)
    doc = truth(params)
    doc["params"]["drift_km_per_hr"] = list(params.drift_km_per_hr)
    (directory / "truth.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return directory
