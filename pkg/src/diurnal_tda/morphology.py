"""Binary thresholding, rectangular morphology and the chessboard distance transform.

Binary images are boolean numpy arrays.  Morphology uses an all-ones
``k_rows x k_cols`` kernel anchored at ``((k_rows-1)//2, (k_cols-1)//2)``;
pixels outside the image count as 0 for both erosion and dilation.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import AllForeground, KernelTooLarge


class StructuringElement(NamedTuple):
    k_rows: int
    k_cols: int

    @property
    def anchor(self) -> tuple:
        return (self.k_rows - 1) // 2, (self.k_cols - 1) // 2

    @classmethod
    def square(cls, k: int) -> "StructuringElement":
        return cls(k, k)


def default_kernel(km_per_pixel: float) -> StructuringElement:
    """Kernel spanning roughly 16 km: 8x8 at 2 km/pixel, 2x2 at 8 km/pixel."""
    k = max(1, int(round(16.0 / km_per_pixel)))
    return StructuringElement(k, k)


def threshold(diff, mu: float) -> np.ndarray:
    """True where ``diff < mu`` (strict)."""
    return np.asarray(diff) < mu


def _shift(b: np.ndarray, offset: int, axis: int) -> np.ndarray:
    # out[p] = b[p + offset] along axis, zero outside the image
    out = np.zeros_like(b)
    n = b.shape[axis]
    if abs(offset) >= n:
        return out
    src = [slice(None)] * 2
    dst = [slice(None)] * 2
    if offset >= 0:
        src[axis] = slice(offset, n)
        dst[axis] = slice(0, n - offset)
    else:
        src[axis] = slice(0, n + offset)
        dst[axis] = slice(-offset, n)
    out[tuple(dst)] = b[tuple(src)]
    return out


def _check(b, se) -> tuple:
    b = np.asarray(b, dtype=bool)
    if b.ndim != 2:
        raise ValueError("binary image must be 2-D")
    se = StructuringElement(int(se[0]), int(se[1]))
    if se.k_rows < 1 or se.k_cols < 1 or se.k_rows > min(b.shape) or se.k_cols > min(b.shape):
        raise KernelTooLarge(f"kernel {se.k_rows}x{se.k_cols} does not fit a "
                             f"{b.shape[0]}x{b.shape[1]} image")
    return b, se


def erode(b, se) -> np.ndarray:
    """Pixel stays 1 only if every kernel cell, anchored on it, covers a 1."""
    b, se = _check(b, se)
    out = b
    for axis, (k, a) in enumerate(zip(se, se.anchor)):
        acc = np.ones_like(out)
        for d in range(-a, k - a):
            acc &= _shift(out, d, axis)
        out = acc
    return out


def dilate(b, se) -> np.ndarray:
    """Pixel becomes 1 if some kernel placement that covers it contains a 1.

    This is dilation by the reflected kernel, the adjoint of :func:`erode`,
    so that ``opening`` is anti-extensive and idempotent for even kernels too.
    """
    b, se = _check(b, se)
    out = b
    for axis, (k, a) in enumerate(zip(se, se.anchor)):
        acc = np.zeros_like(out)
        for d in range(-a, k - a):
            acc |= _shift(out, -d, axis)
        out = acc
    return out


def opening(b, se) -> np.ndarray:
    return dilate(erode(b, se), se)


def distance_transform(b, km_per_pixel: float = 1.0) -> np.ndarray:
    """Chessboard distance from every pixel to the nearest 0 pixel, in km.

    Implemented as repeated 3x3 erosion of the foreground: a pixel at
    Chebyshev distance ``k`` from the background survives exactly ``k``
    erosions. Pixels outside the image are never background.
    """
    fg = np.asarray(b, dtype=bool)
    if fg.all():
        raise AllForeground("binary image has no 0 pixel")
    dist = np.zeros(fg.shape, dtype=np.int64)
    cur = fg.copy()
    while cur.any():
        dist += cur
        # 3x3 erosion with out-of-image treated as foreground
        p = np.pad(cur, 1, constant_values=True)
        rows = p[:-2] & p[1:-1] & p[2:]
        cur = rows[:, :-2] & rows[:, 1:-1] & rows[:, 2:]
    return dist * float(km_per_pixel)
