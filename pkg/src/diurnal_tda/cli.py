"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 no periodic signal.
Failures print a single ``error code=<name> message=<json string>`` line on
standard error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import cubical, pipeline, plotting, spectral, synth
from .errors import DataError, DiurnalError, NoResultError, UsageError
from .grid_io import parse_timestamp

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NO_SIGNAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _pair(text: str) -> tuple:
    try:
        r, c = text.lower().split("x")
        out = int(r), int(c)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected RxC, got {text!r}") from None
    if min(out) < 1:
        raise argparse.ArgumentTypeError("dimensions must be positive")
    return out


def parse_mu_list(text: str) -> list:
    """``35,40,45`` or inclusive ``start:stop:step``."""
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        try:
            start, stop, step = (float(x) for x in text.split(":"))
        except ValueError:
            raise UsageError(f"bad range {text!r}, expected start:stop:step") from None
        if step <= 0:
            raise UsageError("range step must be positive")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [start + k * step for k in range(max(n, 0))]
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad mu list {text!r}") from None


def _pipeline_flags(p):
    p.add_argument("input", help="directory of frame files")
    p.add_argument("--mu", type=float, default=80.0, help="threshold (default 80)")
    p.add_argument("--lag-hours", type=float, default=6.0, help="difference lag (default 6)")
    p.add_argument("--open", dest="opening", action="store_true", help="open before distance transform")
    p.add_argument("--no-open", dest="opening", action="store_false")
    p.set_defaults(opening=False)
    p.add_argument("--kernel", type=_pair, help="opening kernel RxC (default ~16 km square)")
    p.add_argument("--km-per-pixel", type=float, help="override the manifest pixel size")
    p.add_argument("--dt-minutes", type=int, help="resampling step (default: smallest spacing)")
    p.add_argument("--crop", type=_pair, help="centre crop RxC")
    p.add_argument("--gridsat-convert", action="store_true", help="apply GridSat value conversion")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="diurnal-tda", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="detect the dominant period of a stack")
    _pipeline_flags(p)

    p = sub.add_parser("sweep", help="run over a list of thresholds")
    _pipeline_flags(p)
    p.add_argument("--mu-list", required=True, help="comma list or start:stop:step")

    p = sub.add_parser("frame", help="write the per-stage grids for one difference")
    _pipeline_flags(p)
    p.add_argument("--timestamp", required=True, help="YYYYMMDDTHHMMZ of the earlier frame")
    p.add_argument("--plot", action="store_true", help="also write frame.svg")

    p = sub.add_parser("synth", help="generate a synthetic stack")
    d = synth.SynthParams()
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--rows", type=int, default=d.rows)
    p.add_argument("--cols", type=int, default=d.cols)
    p.add_argument("--km-per-pixel", type=float, default=d.km_per_pixel)
    p.add_argument("--period-hours", type=float, default=d.period_hours)
    p.add_argument("--speed", type=float, default=d.pulse_speed_km_per_hr, help="km/h")
    p.add_argument("--ring-width", type=float, default=d.ring_width_km, help="km")
    p.add_argument("--warm", type=float, default=d.warm_amplitude)
    p.add_argument("--cool", type=float, default=d.cool_amplitude)
    p.add_argument("--dt-minutes", type=int, default=d.sample_dt_minutes)
    p.add_argument("--days", type=int, default=d.duration_days)
    p.add_argument("--salt", type=int, default=d.salt_count, help="noise pixels per frame")
    p.add_argument("--drift", type=float, nargs=2, default=d.drift_km_per_hr,
                   metavar=("DX", "DY"), help="centre drift, km/h")
    p.add_argument("--lag-hours", type=float, default=d.lag_minutes / 60)
    p.add_argument("--seed", type=int, default=d.rng_seed)
    p.add_argument("--format", choices=("csv", "binary"), default="csv")
    return parser


def _config(args) -> pipeline.PipelineConfig:
    try:
        return pipeline.PipelineConfig(
            mu=args.mu, lag_minutes=int(round(args.lag_hours * 60)), opening_enabled=args.opening,
            kernel=args.kernel, km_per_pixel=args.km_per_pixel, dt_minutes=args.dt_minutes,
            crop=args.crop, gridsat_convert=args.gridsat_convert)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _num(x: float) -> str:
    return f"{x:.10g}"


def _write_all(out: Path, files: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for name, data in files.items():
        mode = "wb" if isinstance(data, bytes) else "w"
        with open(out / name, mode) as fh:
            fh.write(data)


def _grid_csv(values) -> str:
    buf = io.StringIO()
    a = np.asarray(values)
    if a.dtype == bool:
        a = a.astype(np.int64)
    for row in a:
        buf.write(",".join(_num(float(v)) for v in row) + "\n")
    return buf.getvalue()


def cmd_run(args) -> int:
    cfg = _config(args)
    stack = pipeline.load_for(args.input, cfg)
    report = pipeline.run(stack, cfg)
    files = {
        "series.csv": spectral.series_csv(report.series.times, report.series.values),
        "spectrum.csv": spectral.spectrum_csv(report.spectrum),
        "reconstruction.csv": spectral.series_csv(report.reconstruction.times, report.reconstruction.values),
        "series.svg": plotting.series_figure(report),
        "spectrum.svg": plotting.spectrum_figure(report),
    }
    doc = report.to_dict()
    doc["files"] = sorted(files)
    files["report.json"] = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    _write_all(args.out, files)
    print(f"period_hours={_num(report.period_hours)}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    mus = parse_mu_list(args.mu_list)
    if not mus:
        raise UsageError("--mu-list is empty")
    cfg = _config(args)
    stack = pipeline.load_for(args.input, cfg)
    rows = pipeline.threshold_sweep(stack, cfg, mus)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["mu", "period_hours", "status"])
    for r in rows:
        w.writerow([_num(r.mu), "" if r.period_hours is None else _num(r.period_hours), r.status])
    _write_all(args.out, {"sweep.csv": buf.getvalue()})
    sys.stdout.write(buf.getvalue())
    return EXIT_OK


def cmd_frame(args) -> int:
    cfg = _config(args)
    stack = pipeline.load_for(args.input, cfg)
    t = parse_timestamp(args.timestamp)
    stamps = set(stack.timestamps)
    if t not in stamps:
        raise DataError(f"no frame at {args.timestamp}")
    if t + cfg.lag_minutes not in stamps:
        raise DataError(f"frame {args.timestamp} has no partner {cfg.lag_minutes} minutes later")
    diff = stack.at(t + cfg.lag_minutes).values - stack.at(t).values
    kmpp = cfg.km_per_pixel or stack.km_per_pixel
    st = pipeline.frame_stages(diff, cfg, kmpp)
    files = {"diff.csv": _grid_csv(st.diff), "mask.csv": _grid_csv(st.mask),
             "distance.csv": _grid_csv(st.distance), "diagram.csv": cubical.diagram_csv(st.diagram)}
    if st.opened is not None:
        files["opened.csv"] = _grid_csv(st.opened)
    if args.plot:
        files["frame.svg"] = plotting.frame_figure(st)
    _write_all(args.out, files)
    flags = ",".join(st.flags) or "none"
    print(f"max_persistence_km={_num(st.max_persistence)} flags={flags}")
    return EXIT_OK


def cmd_synth(args) -> int:
    params = synth.SynthParams(
        rows=args.rows, cols=args.cols, km_per_pixel=args.km_per_pixel,
        period_hours=args.period_hours, pulse_speed_km_per_hr=args.speed,
        ring_width_km=args.ring_width, cool_amplitude=args.cool, warm_amplitude=args.warm,
        sample_dt_minutes=args.dt_minutes, duration_days=args.days, salt_count=args.salt,
        rng_seed=args.seed, drift_km_per_hr=tuple(args.drift),
        lag_minutes=int(round(args.lag_hours * 60)))
    params.validate()
    synth.write_synth(args.out, params, "csv" if args.format == "csv" else "f32grid")
    print(f"frames={len(params.times)} out={args.out}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "frame": cmd_frame, "synth": cmd_synth}


def _fail(exc: Exception, code: str, status: int) -> int:
    print(f"error code={code} message={json.dumps(str(exc))}", file=sys.stderr)
    return status


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        return _fail(exc, exc.code, EXIT_USAGE)
    except NoResultError as exc:
        return _fail(exc, exc.code, EXIT_NO_SIGNAL)
    except DiurnalError as exc:
        return _fail(exc, exc.code, EXIT_DATA)
    except OSError as exc:
        return _fail(exc, "io", EXIT_DATA)


if __name__ == "__main__":
    sys.exit(main())
