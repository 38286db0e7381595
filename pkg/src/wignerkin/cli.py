"""Command-line front end writing plot-ready CSV / JSON.

Exit codes: 0 computed (whatever the verdict), 2 invalid input, 3 numerical
guard tripped, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import dynamics as dyn
from . import homodyne as hd
from .errors import NumericalGuardError
from .kernels import BACKEND
from .phase_space import GridSpec, rasterize, write_grid_csv, write_grid_sidecar
from .states import CatStateParams, CatWigner, CoherentStateParams, CoherentWigner, Convention

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("wignerkin")


class ValidationError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _common(p: argparse.ArgumentParser, *, state_default="cat", window_default="12",
            out_default="out.csv", format_default="csv") -> None:
    g = p.add_argument_group("state")
    g.add_argument("--state", choices=["cat", "coherent"], default=state_default,
                   help="even cat |a>+|-a> or a single coherent state")
    g.add_argument("--x0", type=float, default=None,
                   help="position displacement; sqrt(2) = 1.4142... for cat, 0 for coherent")
    g.add_argument("--p0", type=float, default=0.0, help="momentum displacement")
    g.add_argument("--mass", type=float, default=1.0, help="particle mass (hbar = 1)")
    g.add_argument("--convention", choices=[c.value for c in Convention],
                   default=Convention.PAPER_SCALED.value,
                   help="cat-state scale: as-printed three-term form, paper (half of it, "
                        "matching the closed-form pi_2), or unit-norm")
    g = p.add_argument_group("grid")
    g.add_argument("--grid-n", type=int, default=1024,
                   help="nodes per axis; even values are bumped to n+1 so x=0 is a grid line")
    g.add_argument("--grid-window", default=window_default,
                   help="half-width of the symmetric window in x and p")
    for name in ("x-min", "x-max", "p-min", "p-max"):
        g.add_argument(f"--{name}", type=float, default=None,
                       help="explicit bound overriding --grid-window")
    g = p.add_argument_group("output")
    g.add_argument("--seed", type=int, default=42, help="64-bit unsigned random seed")
    g.add_argument("--out", default=out_default, help="output path")
    g.add_argument("--format", choices=["csv", "json"], default=format_default,
                   help="csv writes the table plus a .json sidecar; json writes one document")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="wignerkin", description=__doc__, formatter_class=fmt)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("wigner", formatter_class=fmt,
                       help="rasterise the Wigner function (contour-plot data)")
    _common(p, out_default="wigner.csv")
    p.add_argument("--t", type=float, default=0.0, help="free-flight time before sampling")

    p = sub.add_parser("pi2", formatter_class=fmt,
                       help="pi_2(0;t): grid moment against the closed form")
    _common(p, window_default="auto", out_default="pi2.csv")
    p.add_argument("--t-min", type=float, default=0.0, help="first time")
    p.add_argument("--t-max", type=float, default=3.0, help="last time")
    p.add_argument("--t-points", type=int, default=61, help="number of evenly spaced times")
    p.epilog = ("--grid-window auto uses +-12 for t/m <= 1.5 and +-16 beyond.  The analytic "
                "column is the paper-scaled closed form evaluated at t/m; it needs p0 = 0.")

    p = sub.add_parser("absdev", formatter_class=fmt,
                       help="<|x|>(t), its derivatives and the classical curvature bound")
    _common(p, out_default="absdev.csv")
    p.add_argument("--t-min", type=float, default=0.0, help="first time")
    p.add_argument("--t-max", type=float, default=1.0, help="last time")
    p.add_argument("--t-points", type=int, default=21, help="number of evenly spaced times")
    p.add_argument("--tol-neg", type=float, default=dyn.TOL_NEG,
                   help="d2 below -tol-neg counts as a violation")

    p = sub.add_parser("homodyne", formatter_class=fmt,
                       help="simulated homodyne curvature witness")
    _common(p, out_default="homodyne.json", format_default="json")
    p.add_argument("--taus", type=_floats, default=[-0.2, 0.0, 0.2],
                   help="tau = tan(theta) schedule; must hold 0 and a pair +-h")
    p.add_argument("--samples", type=int, default=1_000_000, help="samples per angle")
    p.add_argument("--resamples", type=int, default=hd.DEFAULT_RESAMPLES,
                   help="bootstrap resamples")
    p.add_argument("--confidence", type=float, default=hd.DEFAULT_CONFIDENCE,
                   help="two-sided bootstrap confidence level")
    p.add_argument("--raw-out", default=None, help="optional theta,sample CSV of raw draws")
    return parser


def _state(args):
    if args.x0 is None:
        args.x0 = math.sqrt(2.0) if args.state == "cat" else 0.0
    if not (math.isfinite(args.x0) and math.isfinite(args.p0)):
        raise ValidationError("x0/p0", "must be finite")
    if not (math.isfinite(args.mass) and args.mass > 0):
        raise ValidationError("mass", f"must be positive, got {args.mass}")
    if args.state == "cat":
        params = CatStateParams(args.x0, args.p0, Convention.parse(args.convention))
        return CatWigner(params), {"kind": "cat", "x0": args.x0, "p0": args.p0,
                                   "convention": params.convention.value}
    params = CoherentStateParams(args.x0, args.p0)
    return CoherentWigner(params), {"kind": "coherent", "x0": args.x0, "p0": args.p0}


def _grid(args, window: float | None = None) -> GridSpec:
    if args.grid_n < 8:
        raise ValidationError("grid-n", f"must be >= 8, got {args.grid_n}")
    if window is None:
        try:
            window = float(args.grid_window)
        except ValueError:
            raise ValidationError("grid-window", f"expected a number, got {args.grid_window!r}")
    if not (math.isfinite(window) and window > 0):
        raise ValidationError("grid-window", f"must be positive, got {window}")
    n = args.grid_n + (args.grid_n % 2 == 0)
    bounds = [-window if args.x_min is None else args.x_min,
              window if args.x_max is None else args.x_max,
              -window if args.p_min is None else args.p_min,
              window if args.p_max is None else args.p_max]
    if not bounds[0] < bounds[1]:
        raise ValidationError("x-min/x-max", f"need x_min < x_max, got {bounds[0]} >= {bounds[1]}")
    if not bounds[2] < bounds[3]:
        raise ValidationError("p-min/p-max", f"need p_min < p_max, got {bounds[2]} >= {bounds[3]}")
    return GridSpec(*bounds, n, n)


def _time_grid(args) -> np.ndarray:
    if args.t_points < 1:
        raise ValidationError("t-points", "must be >= 1")
    if not (math.isfinite(args.t_min) and math.isfinite(args.t_max)):
        raise ValidationError("t-min/t-max", "must be finite")
    if args.t_points > 1 and not args.t_min < args.t_max:
        raise ValidationError("t-min/t-max", "need t_min < t_max for more than one point")
    if args.t_points == 1:
        return np.array([args.t_min])
    return np.linspace(args.t_min, args.t_max, args.t_points)


def _check_seed(args) -> None:
    if not 0 <= args.seed < 2 ** 64:
        raise ValidationError("seed", "must be a 64-bit unsigned integer")


def _sidecar_path(out: Path) -> Path:
    return out.with_suffix(".json") if out.suffix != ".json" else out.with_suffix(".meta.json")


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _write_table(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(v if isinstance(v, str) else f"{v:.17g}" for v in row) + "\n")


def cmd_wigner(args) -> int:
    f, state = _state(args)
    spec = _grid(args)
    _check_seed(args)
    if not math.isfinite(args.t):
        raise ValidationError("t", "must be finite")
    f = dyn.evolve_free(f, dyn.EvolutionSpec(args.mass, args.t))
    g = rasterize(f, spec)
    extra = {"state": state, "t": args.t, "mass": args.mass,
             "min_value": float(g.values.min()), "negative_cells": int((g.values < 0).sum()),
             "kernel_backend": BACKEND}
    i0 = spec.x_index(0.0)
    if i0 is not None:
        extra["min_on_x0_line"] = float(g.values[i0].min())
    out = Path(args.out)
    if args.format == "csv":
        write_grid_csv(g, out)
        write_grid_sidecar(g, _sidecar_path(out), extra)
    else:
        doc = {"grid": spec.to_dict(), "convention": g.convention_tag, "integral": g.integral,
               **extra, "x": spec.xs.tolist(), "p": spec.ps.tolist(), "w": g.values.tolist()}
        _write_json(out, doc)
    return EXIT_OK


def cmd_pi2(args) -> int:
    if args.state != "cat":
        raise ValidationError("state", "pi2 compares against the cat-state closed form")
    f, state = _state(args)
    ts = _time_grid(args)
    _check_seed(args)
    auto = str(args.grid_window).strip().lower() == "auto"
    fixed = None if auto else _grid(args)
    if auto:
        _grid(args, 12.0)
    analytic = args.p0 == 0.0
    numeric = []
    for t in ts:
        spec = _grid(args, 12.0 if abs(t / args.mass) <= 1.5 else 16.0) if auto else fixed
        numeric.append(dyn.pi2_origin_numeric(f, float(t), args.mass, spec))
    numeric = np.array(numeric)
    exact = (np.array([dyn.pi2_origin_analytic(t / args.mass, args.x0) for t in ts])
             if analytic else None)
    window = dyn.negativity_window(abs(args.x0)) if analytic else None
    crossings = [float(ts[k] - numeric[k] * (ts[k + 1] - ts[k]) / (numeric[k + 1] - numeric[k]))
                 for k in range(len(ts) - 1) if numeric[k] * numeric[k + 1] < 0]
    meta = {"state": state, "mass": args.mass, "numeric_convention": state["convention"],
            "analytic_column": "paper-scaled closed form at t/m" if analytic else None,
            "negativity_window": None if window is None else window * args.mass,
            "numeric_sign_changes": crossings, "grid_window": args.grid_window,
            "grid_n": args.grid_n, "kernel_backend": BACKEND}
    header = ["t", "pi2_numeric"] + (["pi2_analytic"] if analytic else [])
    rows = [[t, v] + ([exact[k]] if analytic else []) for k, (t, v) in enumerate(zip(ts, numeric))]
    out = Path(args.out)
    if args.format == "csv":
        _write_table(out, header, rows)
        _write_json(_sidecar_path(out), meta)
    else:
        _write_json(out, {**meta, "columns": header, "rows": [[float(v) for v in r] for r in rows]})
    return EXIT_OK


def cmd_absdev(args) -> int:
    f, state = _state(args)
    spec = _grid(args)
    ts = _time_grid(args)
    _check_seed(args)
    if spec.x_index(0.0) is None:
        raise ValidationError("grid", "x = 0 must be a grid line (symmetric x window)")
    if not (math.isfinite(args.tol_neg) and args.tol_neg >= 0):
        raise ValidationError("tol-neg", "must be a nonnegative number")
    curve = dyn.absdev_curve(f, ts, args.mass, spec)
    report = dyn.classicality_check(curve, args.tol_neg)
    meta = {"state": state, "mass": args.mass, "grid": spec.to_dict(), "tol_neg": args.tol_neg,
            "violation_times": list(report.violation_times),
            "classically_consistent": report.consistent, "kernel_backend": BACKEND}
    if state["kind"] == "cat" and args.p0 == 0.0:
        w = dyn.negativity_window(abs(args.x0))
        meta["negativity_window"] = None if w is None else w * args.mass
    out = Path(args.out)
    if args.format == "csv":
        dyn.write_absdev_csv(curve, out, report)
        _write_json(_sidecar_path(out), meta)
    else:
        rows = [{"t": float(t), "absdev": float(a), "d1": float(b), "d2": float(c),
                 "violation_flag": bool(v)}
                for t, a, b, c, v in zip(curve.t_values, curve.absdev, curve.d1, curve.d2,
                                         report.violation_mask)]
        _write_json(out, {**meta, "rows": rows})
    return EXIT_OK


def cmd_homodyne(args) -> int:
    f, state = _state(args)
    spec = _grid(args)
    _check_seed(args)
    if args.samples < 1:
        raise ValidationError("samples", "must be positive")
    if args.resamples < 1:
        raise ValidationError("resamples", "must be positive")
    if not 0 < args.confidence < 1:
        raise ValidationError("confidence", "must lie in (0, 1)")
    try:
        taus = np.asarray(args.taus, dtype=float)
        hd._central_offsets(taus)
        [hd.QuadratureAngle.from_tau(t) for t in taus]
    except ValueError as exc:
        raise ValidationError("taus", str(exc))
    g = rasterize(f, spec)
    keep = args.raw_out is not None or args.format == "csv"
    experiment = hd.HomodyneExperiment(g, taus, args.samples, args.confidence, args.resamples)
    est, run = experiment.run(args.seed, keep_samples=keep)
    record = hd.run_record(est, run, g, state)
    record["resamples"] = args.resamples
    out = Path(args.out)
    if args.format == "csv":
        hd.write_samples_csv(run, out)
        Path(_sidecar_path(out)).write_text(hd.dumps_record(record))
    else:
        out.write_text(hd.dumps_record(record))
    if args.raw_out is not None:
        hd.write_samples_csv(run, args.raw_out)
    return EXIT_OK


COMMANDS = {"wigner": cmd_wigner, "pi2": cmd_pi2, "absdev": cmd_absdev, "homodyne": cmd_homodyne}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"wignerkin {args.command}: invalid {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"wignerkin {args.command}: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalGuardError as exc:
        print(f"wignerkin {args.command}: numerical guard: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"wignerkin {args.command}: I/O error on {exc.filename or args.out}: "
              f"{exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
