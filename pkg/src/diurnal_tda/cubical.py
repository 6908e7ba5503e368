"""Sublevel-set persistent homology of 2-D images on cubical complexes.

An ``m x n`` image is a function on the squares of the cubical set
``[0, m] x [0, n]``; every edge and vertex takes the minimum value of the
squares it bounds.  Cells are addressed in doubled coordinates: cell ``(r, c)``
of a ``(2m+1) x (2n+1)`` array is the product of the elementary intervals
``[r//2, r//2 + 1]`` or ``[r//2]`` (odd or even ``r``) and likewise for
``c``.  Squares sit at odd/odd positions, vertices at even/even.

Persistence is computed over Z2 with the standard column reduction, using
the twist order: the square boundary matrix is reduced first, which yields
every dimension-1 pair directly, and its pivot edges are then cleared from
the edge boundary matrix before dimension 0 is reduced.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from .errors import ParseError


class Cell(NamedTuple):
    row: int
    col: int

    @property
    def dim(self) -> int:
        return (self.row & 1) + (self.col & 1)

    @property
    def anchor(self) -> tuple:
        return self.row // 2, self.col // 2

    @property
    def nondegenerate(self) -> tuple:
        return bool(self.row & 1), bool(self.col & 1)

    def primary_faces(self) -> list:
        r, c = self
        faces = []
        if r & 1:
            faces += [Cell(r - 1, c), Cell(r + 1, c)]
        if c & 1:
            faces += [Cell(r, c - 1), Cell(r, c + 1)]
        return faces


@dataclass(frozen=True, eq=False)
class CubicalFiltration:
    """Cell values of the full cubical complex on an image."""

    shape: tuple
    values: np.ndarray  # (2m+1, 2n+1), indexed by doubled coordinates

    @property
    def cell_shape(self) -> tuple:
        return self.values.shape

    def __len__(self):
        return self.values.size

    def value(self, cell) -> float:
        return float(self.values[cell[0], cell[1]])

    def cells(self, dim=None) -> Iterator[Cell]:
        R, C = self.values.shape
        for r in range(R):
            for c in range(C):
                cell = Cell(r, c)
                if dim is None or cell.dim == dim:
                    yield cell

    def dims(self) -> np.ndarray:
        R, C = self.values.shape
        return (np.arange(R)[:, None] & 1) + (np.arange(C)[None, :] & 1)

    def order(self) -> np.ndarray:
        """Flat cell indices sorted by (value, dim, row-major index)."""
        v = self.values.ravel()
        return np.lexsort((np.arange(v.size), self.dims().ravel(), v))


def build_filtration(grid) -> CubicalFiltration:
    """Extend image values to all cells by the minimum over cofaces."""
    g = np.asarray(getattr(grid, "values", grid), dtype=np.float64)
    if g.ndim != 2 or g.size == 0:
        raise ValueError("grid must be a non-empty 2-D array")
    if not np.all(np.isfinite(g)):
        raise ValueError("grid values must be finite")
    m, n = g.shape
    squares = np.full((2 * m + 1, 2 * n + 1), np.inf)
    squares[1::2, 1::2] = g
    # every coface of a cell lies in its 3x3 neighbourhood, and no two
    # squares share one, so a 3x3 minimum filter does the extension
    p = np.pad(squares, 1, constant_values=np.inf)
    rows = np.minimum(np.minimum(p[:-2], p[1:-1]), p[2:])
    values = np.minimum(np.minimum(rows[:, :-2], rows[:, 1:-1]), rows[:, 2:])
    values.setflags(write=False)
    return CubicalFiltration((m, n), values)


class PersistencePair(NamedTuple):
    birth: float
    death: float
    dim: int = 1

    @property
    def persistence(self) -> float:
        return self.death - self.birth


@dataclass(frozen=True)
class PersistenceDiagram:
    """Multiset of pairs in one homology dimension, kept in sorted order."""

    pairs: tuple
    dim: int = 1

    def __post_init__(self):
        pairs = tuple(sorted(PersistencePair(float(b), float(d), self.dim) for b, d, *_ in self.pairs))
        for p in pairs:
            if not p.birth < p.death:
                raise ValueError(f"pair {p[:2]} does not have birth < death")
        object.__setattr__(self, "pairs", pairs)

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def as_array(self) -> np.ndarray:
        return np.array([p[:2] for p in self.pairs], dtype=np.float64).reshape(-1, 2)

    def max_persistence(self) -> float:
        return max_persistence(self)


def max_persistence(diagram: Iterable) -> float:
    return max((d - b for b, d, *_ in diagram), default=0.0)


def _reduce(columns, pivots) -> Iterator[tuple]:
    """Column reduction over Z2.

    ``columns`` yields ``(key, face_ranks)``; ``pivots`` maps pivot rank to
    the reduced column owning it and is updated in place. Yields
    ``(key, pivot)`` per column, with pivot ``None`` for a zero column.
    """
    for key, col in columns:
        col = set(col)
        while col:
            low = max(col)
            other = pivots.get(low)
            if other is None:
                pivots[low] = col
                break
            col ^= other
        yield key, (max(col) if col else None)


def compute_persistence(f, dim: int = 1) -> PersistenceDiagram:
    """Sublevel-set persistence diagram of a filtration (or a raw image).

    Only ``dim`` 0 and 1 are meaningful for a planar complex. The single
    essential class in dimension 0 is reported with ``death = inf``;
    zero-persistence pairs are dropped.
    """
    if not isinstance(f, CubicalFiltration):
        f = build_filtration(f)
    if dim not in (0, 1):
        raise ValueError(f"dim must be 0 or 1, got {dim}")

    vals = f.values.ravel()
    dims = f.dims().ravel()
    order = f.order()
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    rank = rank.tolist()
    order_l = order.tolist()
    width = f.values.shape[1]

    def faces(c, d):
        if d == 2:
            return rank[c - 1], rank[c + 1], rank[c - width], rank[c + width]
        if (c // width) & 1:  # vertical edge: odd row
            return rank[c - width], rank[c + width]
        return rank[c - 1], rank[c + 1]

    sq_order = order[dims[order] == 2].tolist()
    edge_pivots: dict = {}
    h1 = []
    for c, low in _reduce(((c, faces(c, 2)) for c in sq_order), edge_pivots):
        # a planar complex has no 2-cycles, so every square kills a loop
        assert low is not None, "nonzero H2 in a planar cubical complex"
        h1.append((vals[order_l[low]], vals[c]))
    if dim == 1:
        return PersistenceDiagram(tuple((b, d) for b, d in h1 if b < d), 1)

    edges = [c for c in order[dims[order] == 1].tolist() if rank[c] not in edge_pivots]
    vertex_pivots: dict = {}
    h0 = []
    for c, low in _reduce(((c, faces(c, 1)) for c in edges), vertex_pivots):
        assert low is not None, "positive edge survived clearing"
        h0.append((vals[order_l[low]], vals[c]))
    births = [r for r in range(order.size) if dims[order_l[r]] == 0 and r not in vertex_pivots]
    assert len(births) == 1, "the full rectangle is connected"
    h0.append((vals[order_l[births[0]]], math.inf))
    return PersistenceDiagram(tuple((b, d) for b, d in h0 if b < d), 0)


def persistence_of_grid(grid, dim: int = 1) -> PersistenceDiagram:
    return compute_persistence(build_filtration(grid), dim)


# -- file formats -------------------------------------------------------------

def _num(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if float(x).is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def diagram_csv(diagrams) -> str:
    """``dim,birth,death`` rows for one or more diagrams."""
    if isinstance(diagrams, PersistenceDiagram):
        diagrams = [diagrams]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["dim", "birth", "death"])
    for d in diagrams:
        for p in d:
            w.writerow([d.dim, _num(p.birth), _num(p.death)])
    return buf.getvalue()


def write_diagram_csv(path, diagrams) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(diagram_csv(diagrams))


def read_diagram_csv(path) -> dict:
    """Read a diagram CSV into ``{dim: PersistenceDiagram}``."""
    out: dict = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["dim", "birth", "death"]:
            raise ParseError("expected header dim,birth,death", path, 1)
        for lineno, row in enumerate(reader, start=2):
            try:
                dim, b, d = int(row[0]), float(row[1]), float(row[2])
            except (ValueError, IndexError):
                raise ParseError(f"bad row {row!r}", path, lineno) from None
            out.setdefault(dim, []).append((b, d))
    return {k: PersistenceDiagram(tuple(v), k) for k, v in out.items()}


def read_perseus(path) -> np.ndarray:
    """Read a dense cubical file: ``2``, then ``m``, ``n``, then m*n values row-major."""
    with open(path) as fh:
        tokens = fh.read().split()
    try:
        ndim = int(tokens[0])
        if ndim != 2:
            raise ParseError(f"only 2-D cubical data is supported, got dimension {ndim}", path, 1)
        m, n = int(tokens[1]), int(tokens[2])
        values = np.array([float(t) for t in tokens[3:]], dtype=np.float64)
    except (IndexError, ValueError):
        raise ParseError("malformed dense cubical file", path) from None
    if m < 1 or n < 1 or values.size != m * n:
        raise ParseError(f"expected {m}*{n} values, found {values.size}", path)
    return values.reshape(m, n)


def write_perseus(path, grid) -> None:
    g = np.asarray(grid)
    m, n = g.shape
    with open(path, "w") as fh:
        fh.write(f"2\n{m}\n{n}\n")
        for v in g.ravel():
            fh.write(_num(float(v)) + "\n")
