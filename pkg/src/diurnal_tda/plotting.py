"""Report figures, rendered to SVG with matplotlib.

Output is byte-stable for identical input: the SVG id salt is fixed and
the date metadata is dropped.
"""

from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .spectral import MINUTES_PER_DAY, power_spectrum  # noqa: E402

STYLE = {
    "svg.hashsalt": "diurnal-tda",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
}


def _svg(fig) -> bytes:
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return buf.getvalue()


def _days(times, origin):
    return (np.asarray(times, dtype=np.float64) - origin) / MINUTES_PER_DAY


def series_figure(report) -> bytes:
    """Max persistence against time with the reconstructed sinusoid and day lines."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(7, 3))
        t = report.series.times
        origin = (int(t[0]) // MINUTES_PER_DAY) * MINUTES_PER_DAY
        ax.plot(_days(t, origin), report.series.values, "o-", color="k", ms=3, lw=1,
                label="max persistence")
        rec = report.reconstruction
        ax.plot(_days(rec.times, origin), rec.values, "--", color="tab:blue", lw=1.2,
                label=f"reconstruction ({report.period_hours:.3g} h)")
        last = _days([t[-1]], origin)[0]
        for d in range(0, int(np.ceil(last)) + 1):
            ax.axvline(d, color="0.75", lw=0.8, zorder=0)
        ax.set_xlabel("days since first UTC midnight")
        ax.set_ylabel("max persistence (km)")
        ax.legend(frameon=False, loc="upper right")
        fig.tight_layout()
        return _svg(fig)


def spectrum_figure(report) -> bytes:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 3))
        bins = power_spectrum(report.spectrum)
        f = [b[0] for b in bins]
        p = [b[1] for b in bins]
        ax.plot(f, p, "o-", color="k", ms=3, lw=1)
        ax.axvline(report.dominant_freq, color="tab:red", lw=0.8, ls=":")
        ax.set_xlabel("frequency (cycles/day)")
        ax.set_ylabel("power")
        fig.tight_layout()
        return _svg(fig)


def frame_figure(stages) -> bytes:
    """Four panels for one difference: input, mask, distance, diagram."""
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(2, 2, figsize=(6, 6))
        (a, b), (c, d) = axes
        a.imshow(stages.diff, cmap="RdBu_r")
        a.set_title("lag difference")
        mask = stages.mask if stages.opened is None else stages.opened
        b.imshow(mask, cmap="gray")
        b.set_title("thresholded" if stages.opened is None else "thresholded, opened")
        c.imshow(stages.distance, cmap="viridis")
        c.set_title("distance transform (km)")
        for ax in (a, b, c):
            ax.set_xticks([])
            ax.set_yticks([])
        pts = stages.diagram.as_array()
        hi = max(float(stages.distance.max()), 1.0)
        d.plot([0, hi], [0, hi], color="0.6", lw=0.8)
        if len(pts):
            d.plot(pts[:, 0], pts[:, 1], "o", color="k", ms=4)
        d.set_xlabel("birth (km)")
        d.set_ylabel("death (km)")
        d.set_title("H1 diagram")
        fig.tight_layout()
        return _svg(fig)
