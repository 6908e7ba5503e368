"""Loading and normalising timestamped image stacks.

Frames live one per file in a directory, named ``YYYYMMDDTHHMMZ.csv`` or
``YYYYMMDDTHHMMZ.f32grid``.  Timestamps are taken from file names only and
are stored as integer minutes since the Unix epoch (UTC).
"""

from __future__ import annotations

import json
import os
import re
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import (AllMissing, BadCropSize, BadTimestamp, DataError,
                     DimensionMismatch, NoFrames, ParseError, Unresolvable)

FRAME_RE = re.compile(r"^(\d{8}T\d{4}Z)\.(csv|f32grid)$")
F32_MAGIC = b"F32G"
F32_HEADER = struct.Struct("<4sIII")
FILL_TOKEN = "NA"
MANIFEST = "manifest.json"

GRIDSAT_SCALE = 0.01
GRIDSAT_OFFSET = 200.0
GRIDSAT_INTERCEPT = 22.858
GRIDSAT_SLOPE = 0.919565


@dataclass(frozen=True, eq=False)
class Grid:
    """A finite ``rows x cols`` field with its pixel size in kilometres."""

    values: np.ndarray
    km_per_pixel: float = 1.0

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise DimensionMismatch(f"grid must be a non-empty 2-D array, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DataError("grid contains non-finite values")
        if not self.km_per_pixel > 0:
            raise DataError(f"km_per_pixel must be positive, got {self.km_per_pixel}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "km_per_pixel", float(self.km_per_pixel))

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple:
        return self.values.shape


class Frame(NamedTuple):
    timestamp: int  # minutes since epoch, UTC
    grid: Grid


@dataclass(frozen=True, eq=False)
class FrameStack:
    frames: tuple
    km_per_pixel: float = 1.0

    def __post_init__(self):
        frames = tuple(Frame(int(t), g) for t, g in self.frames)
        for prev, cur in zip(frames, frames[1:]):
            if cur.timestamp <= prev.timestamp:
                raise BadTimestamp(
                    f"timestamps must strictly increase: {format_timestamp(prev.timestamp)} "
                    f"then {format_timestamp(cur.timestamp)}")
        for f in frames:
            if f.grid.shape != frames[0].grid.shape:
                raise DimensionMismatch(
                    f"frame {format_timestamp(f.timestamp)} has shape {f.grid.shape}, "
                    f"expected {frames[0].grid.shape}")
            if f.grid.km_per_pixel != float(self.km_per_pixel):
                raise DimensionMismatch("all frames must share the stack km_per_pixel")
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "km_per_pixel", float(self.km_per_pixel))

    def __len__(self):
        return len(self.frames)

    def __iter__(self):
        return iter(self.frames)

    @property
    def timestamps(self) -> list:
        return [f.timestamp for f in self.frames]

    @property
    def shape(self) -> Optional[tuple]:
        return self.frames[0].grid.shape if self.frames else None

    def at(self, timestamp: int) -> Grid:
        for f in self.frames:
            if f.timestamp == timestamp:
                return f.grid
        raise KeyError(timestamp)

    @classmethod
    def from_arrays(cls, frames, km_per_pixel=1.0) -> "FrameStack":
        """Build a stack from ``(timestamp, array)`` pairs."""
        return cls(tuple(Frame(t, Grid(a, km_per_pixel)) for t, a in frames), km_per_pixel)


# -- timestamps ---------------------------------------------------------------

def parse_timestamp(stamp: str) -> int:
    """``YYYYMMDDTHHMMZ`` -> minutes since the epoch."""
    try:
        dt = datetime.strptime(stamp, "%Y%m%dT%H%MZ").replace(tzinfo=timezone.utc)
    except ValueError as exc:
        raise BadTimestamp(f"invalid timestamp {stamp!r}: {exc}") from None
    return int(dt.timestamp()) // 60


def format_timestamp(minutes: int) -> str:
    return datetime.fromtimestamp(int(minutes) * 60, tz=timezone.utc).strftime("%Y%m%dT%H%MZ")


def iso_timestamp(minutes: int) -> str:
    return datetime.fromtimestamp(int(minutes) * 60, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


# -- value conversion and repair ----------------------------------------------

def convert_gridsat(raw):
    """Map GridSat integer-coded samples to brightness values.

    Works elementwise on scalars and arrays; NaN fill markers pass through.
    """
    return ((np.asarray(raw, dtype=np.float64) * GRIDSAT_SCALE + GRIDSAT_OFFSET)
            - GRIDSAT_INTERCEPT) / GRIDSAT_SLOPE


def fill_missing(values, mask=None) -> np.ndarray:
    """Replace flagged cells by the mean of unflagged cells around them.

    Parameters
    ----------
    values : array_like
        2-D array. Flagged cells are NaN unless ``mask`` is given.
    mask : array_like of bool, optional
        True where a cell is a fill marker.

    Returns
    -------
    ndarray
        Copy of ``values`` with flagged cells replaced by the mean of the
        unflagged cells in the 5x5 window centred on them (clipped at the
        borders). Cells with no unflagged neighbour in that window fall back
        to a 7x7 window. Only originally unflagged cells ever contribute.
    """
    out = np.array(values, dtype=np.float64)
    flagged = np.isnan(out) if mask is None else np.asarray(mask, dtype=bool)
    if flagged.shape != out.shape:
        raise DimensionMismatch("mask shape does not match values")
    if not flagged.any():
        return out
    if flagged.all():
        raise AllMissing("every cell is a fill value")

    valid = ~flagged
    rows, cols = out.shape
    pending = list(zip(*np.nonzero(flagged)))
    for half in (2, 3):
        unresolved = []
        for i, j in pending:
            r0, r1 = max(i - half, 0), min(i + half + 1, rows)
            c0, c1 = max(j - half, 0), min(j + half + 1, cols)
            ok = valid[r0:r1, c0:c1]
            if ok.any():
                out[i, j] = _mean(out[r0:r1, c0:c1][ok])
            else:
                unresolved.append((i, j))
        pending = unresolved
        if not pending:
            break
    if pending:
        i, j = pending[0]
        raise Unresolvable(f"cell ({i}, {j}) has no valid neighbour within a 7x7 window")
    return out


def _mean(v: np.ndarray) -> float:
    return float(np.sum(v) / v.size)


def crop_center(values, out_rows: int, out_cols: int) -> np.ndarray:
    """Centred submatrix; odd margins lose their extra row/column at the bottom/right."""
    a = np.asarray(values)
    rows, cols = a.shape
    if not (1 <= out_rows <= rows and 1 <= out_cols <= cols):
        raise BadCropSize(f"cannot crop {rows}x{cols} to {out_rows}x{out_cols}")
    top = (rows - out_rows) // 2
    left = (cols - out_cols) // 2
    return a[top:top + out_rows, left:left + out_cols].copy()


# -- frame files ----------------------------------------------------------------

def read_csv_frame(path) -> np.ndarray:
    """Read a CSV frame; ``NA`` cells come back as NaN."""
    path = Path(path)
    rows = []
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            row = []
            for tok in line.split(","):
                tok = tok.strip()
                if tok == FILL_TOKEN:
                    row.append(np.nan)
                    continue
                try:
                    v = float(tok)
                except ValueError:
                    raise ParseError(f"cannot parse {tok!r}", path, lineno) from None
                if not np.isfinite(v):
                    raise ParseError(f"non-finite value {tok!r} (use {FILL_TOKEN} for fill cells)",
                                     path, lineno)
                row.append(v)
            if rows and len(row) != len(rows[0]):
                raise ParseError(f"expected {len(rows[0])} columns, found {len(row)}", path, lineno)
            rows.append(row)
    if not rows:
        raise ParseError("empty frame file", path)
    return np.array(rows, dtype=np.float64)


def read_f32_frame(path) -> np.ndarray:
    path = Path(path)
    data = path.read_bytes()
    if len(data) < F32_HEADER.size:
        raise ParseError("truncated header", path)
    magic, rows, cols, reserved = F32_HEADER.unpack_from(data)
    if magic != F32_MAGIC or reserved != 0:
        raise ParseError("bad f32grid header", path)
    if rows < 1 or cols < 1:
        raise ParseError(f"bad dimensions {rows}x{cols}", path)
    expected = F32_HEADER.size + 4 * rows * cols
    if len(data) != expected:
        raise ParseError(f"expected {expected} bytes, found {len(data)}", path)
    a = np.frombuffer(data, dtype="<f4", offset=F32_HEADER.size).reshape(rows, cols)
    if np.isinf(a).any():
        raise ParseError("infinite value in f32grid", path)
    return a.astype(np.float64)


def _fmt(v: float) -> str:
    if np.isnan(v):
        return FILL_TOKEN
    return f"{v:.10g}"


def write_csv_frame(path, values) -> None:
    a = np.asarray(values, dtype=np.float64)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for row in a:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_f32_frame(path, values) -> None:
    a = np.asarray(values, dtype="<f4")
    rows, cols = a.shape
    with open(path, "wb") as fh:
        fh.write(F32_HEADER.pack(F32_MAGIC, rows, cols, 0))
        fh.write(np.ascontiguousarray(a).tobytes())


def write_stack(directory, stack: FrameStack, fmt: str = "csv", manifest: Optional[dict] = None) -> list:
    """Write every frame of ``stack`` into ``directory``; returns the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    writer = {"csv": write_csv_frame, "f32grid": write_f32_frame, "binary": write_f32_frame}[fmt]
    ext = "csv" if fmt == "csv" else "f32grid"
    paths = []
    for frame in stack:
        p = directory / f"{format_timestamp(frame.timestamp)}.{ext}"
        writer(p, frame.grid.values)
        paths.append(p)
    meta = {"km_per_pixel": stack.km_per_pixel, "gridsat_convert": False, "fill_missing": True}
    meta.update(manifest or {})
    (directory / MANIFEST).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return paths


def read_manifest(directory) -> dict:
    p = Path(directory) / MANIFEST
    if not p.exists():
        return {}
    try:
        meta = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", p, exc.lineno) from None
    if not isinstance(meta, dict):
        raise ParseError("manifest must be a JSON object", p)
    return meta


def _threads(workers: Optional[int]) -> int:
    if workers is None:
        workers = int(os.environ.get("DIURNAL_TDA_THREADS", "0") or 0)
    return workers if workers > 0 else (os.cpu_count() or 1)


def load_stack(directory, *, km_per_pixel: Optional[float] = None,
               gridsat_convert: Optional[bool] = None, fill: Optional[bool] = None,
               crop: Optional[Sequence[int]] = None, workers: Optional[int] = None) -> FrameStack:
    """Load every frame file in ``directory`` into a :class:`FrameStack`.

    Keyword arguments override the matching ``manifest.json`` keys; anything
    left unset falls back to the manifest, then to ``km_per_pixel=1``, no
    GridSat conversion, and fill interpolation on.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise NoFrames(f"{directory} is not a directory")
    meta = read_manifest(directory)
    kmpp = float(km_per_pixel if km_per_pixel is not None else meta.get("km_per_pixel", 1.0))
    convert = bool(gridsat_convert if gridsat_convert is not None else meta.get("gridsat_convert", False))
    do_fill = bool(fill if fill is not None else meta.get("fill_missing", True))

    entries = []
    for name in sorted(os.listdir(directory)):
        m = FRAME_RE.match(name)
        if m:
            entries.append((parse_timestamp(m.group(1)), directory / name, m.group(2)))
    if not entries:
        raise NoFrames(f"no frame files in {directory}")
    stamps = [t for t, _, _ in entries]
    if len(set(stamps)) != len(stamps):
        dup = next(t for t in stamps if stamps.count(t) > 1)
        raise BadTimestamp(f"duplicate timestamp {format_timestamp(dup)}")

    def _load(entry):
        t, path, ext = entry
        raw = read_csv_frame(path) if ext == "csv" else read_f32_frame(path)
        return t, path, raw

    with ThreadPoolExecutor(max_workers=min(_threads(workers), len(entries))) as pool:
        loaded = sorted(pool.map(_load, entries), key=lambda e: e[0])

    shape = loaded[0][2].shape
    frames = []
    for t, path, raw in loaded:
        if raw.shape != shape:
            raise DimensionMismatch(f"{path.name} is {raw.shape[0]}x{raw.shape[1]}, "
                                    f"expected {shape[0]}x{shape[1]}")
        values = convert_gridsat(raw) if convert else raw
        if np.isnan(values).any():
            if not do_fill:
                raise DataError(f"{path.name} contains fill cells and fill interpolation is off")
            try:
                values = fill_missing(values)
            except DataError as exc:
                raise type(exc)(f"{path.name}: {exc}") from None
        if crop is not None:
            values = crop_center(values, int(crop[0]), int(crop[1]))
        frames.append(Frame(t, Grid(values, kmpp)))
    return FrameStack(tuple(frames), kmpp)
