"""Command-line surface: validate, geometry, maximal, oscillation,
convolve, verify, gallery.

Every run records its config (and a digest of it) next to its outputs;
identical configs reproduce byte-identical CSV/JSON.  Figures are SVG
files written alongside the delimited output.  OSCILLAT_THREADS caps
the compiled kernels' thread pool (they are sequential by default, so
results never depend on it).
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import io as oio
from . import plots
from .covers import build_cover, build_partition, discrete_convolution
from .functions import SampledFunction
from .gallery import GALLERY_NAMES, build_example, continuity_experiment, evaluate_oracle
from .maximal import (default_family, enumerate_balls, fractional_maximal,
                      maximal_rows)
from .oscillation import function_summary, oscillation_rows
from .space import (estimate_doubling_constant, estimate_geometry,
                    fit_annular_decay, fit_lower_mass_bound, validate_space)
from .verify import run_suite


def _apply_thread_cap():
    cap = os.environ.get("OSCILLAT_THREADS")
    if cap:
        try:
            import numba
            numba.set_num_threads(max(int(cap), 1))
        except Exception:
            pass


def _common(parser):
    parser.add_argument("--seed", type=int, default=0,
                        help="seed recorded in outputs; feeds any randomness")
    parser.add_argument("--timestamp", action="store_true",
                        help="embed timestamps in SVG output (default: off)")


def _cmd_validate(args):
    space = oio.load_space(args.space)
    report = validate_space(space)
    payload = {"usable": report.usable, "violations": report.violations,
               "config": {"command": "validate", "space": str(args.space),
                          "seed": args.seed}}
    if args.out:
        oio.write_report(args.out, payload)
    print(f"usable: {report.usable}; violations: {len(report.violations)}")
    return 0 if report.usable else 1


def _cmd_geometry(args):
    space = oio.load_space(args.space)
    if not validate_space(space).usable:
        print("space failed validation", file=sys.stderr)
        return 1
    fit = estimate_geometry(space, q=args.q)
    payload = {"doubling_constant": fit.doubling_constant,
               "lower_mass_bound": {"Q": fit.lmb[0], "c_L": fit.lmb[1]},
               "relative_lower_mass_bound": {"Q": fit.rlmb[0], "c": fit.rlmb[1]},
               "annular_decay": {"beta": fit.annular[0], "C_beta": fit.annular[1],
                                 "admitted": fit.annular[2]},
               "config": {"command": "geometry", "space": str(args.space),
                          "q": args.q, "seed": args.seed}}
    if args.out:
        oio.write_report(args.out, payload)
    print(f"doubling={fit.doubling_constant:.6g} lmb={fit.lmb} "
          f"annular={fit.annular}")
    return 0


def _load_pair(args):
    space = oio.load_space(args.space)
    f = oio.load_function(space, args.function)
    return space, f


def _family_for(space, args):
    if args.rmin is not None and args.rmax is not None:
        return enumerate_balls(space, args.rmin, args.rmax,
                               convention=args.convention)
    return default_family(space, convention=args.convention)


def _cmd_maximal(args):
    space, f = _load_pair(args)
    family = _family_for(space, args)
    q = args.q if args.alpha > 0 else None
    field = fractional_maximal(space, f, args.alpha, family, q)
    config = {"command": "maximal", "space": str(args.space),
              "function": str(args.function), "alpha": args.alpha,
              "convention": family.convention, "rmin": family.r_min,
              "rmax": family.r_max, "q": q, "seed": args.seed}
    oio.write_csv(args.out, ["x", "value", "argmax_center", "argmax_radius"],
                  maximal_rows(field), config=config)
    if args.plot:
        plots.plot_field(space.points, field.values, args.plot,
                         title=f"maximal field, alpha={args.alpha} "
                               f"({family.convention})",
                         with_timestamp=args.timestamp)
    print(f"wrote {args.out} ({space.n_points} sites, family size {family.size})")
    return 0


def _cmd_oscillation(args):
    space, f = _load_pair(args)
    family = _family_for(space, args)
    config = {"command": "oscillation", "space": str(args.space),
              "function": str(args.function), "p": args.p, "seed": args.seed}
    rows = oscillation_rows(space, f, family, p=args.p)
    oio.write_csv(args.out, ["center", "radius", "mean", "oscillation"],
                  rows, config=config)
    if args.summary:
        summary = function_summary(space, f, family, p=args.p)
        summary["config"] = config
        oio.write_report(args.summary, summary)
        print(f"bmo={summary['bmo']:.6g} blo={summary['blo']:.6g}")
    return 0


def _cmd_convolve(args):
    space, f = _load_pair(args)
    cover = build_cover(space, args.delta)
    partition = build_partition(space, cover)
    fd = discrete_convolution(space, f, args.delta, parts=(cover, partition))
    config = {"command": "convolve", "space": str(args.space),
              "function": str(args.function), "delta": args.delta,
              "seed": args.seed}
    rows = list(zip(space.points.tolist(), f.point_values.tolist(),
                    fd.point_values.tolist()))
    oio.write_csv(args.out, ["x", "f", "f_delta"], rows, config=config)
    if args.plot:
        plots.plot_function_pair(space.points, f.point_values, fd.point_values,
                                 args.plot, labels=("f", "f_delta"),
                                 title=f"discrete convolution, delta={args.delta}",
                                 with_timestamp=args.timestamp)
    if args.audit:
        oio.write_report(args.audit, {"partition": partition.to_json(),
                                      "config": config})
    print(f"cover: {cover.n_balls} balls; overlap {cover.overlap_bound}")
    return 0


def _cmd_verify(args):
    space = oio.load_space(args.space) if args.space else None
    reports = run_suite(args.suite, space=space, n_grid=args.n, seed=args.seed)
    ok = all(r.holds for r in reports)
    payload = {"suite": args.suite, "passed": ok,
               "checks": [r.to_dict() for r in reports],
               "config": {"command": "verify", "suite": args.suite,
                          "n": args.n, "seed": args.seed,
                          "space": str(args.space) if args.space else None}}
    if args.out:
        oio.write_report(args.out, payload)
    for r in reports:
        status = "pass" if r.holds else "FAIL"
        print(f"[{status}] {r.name}: fitted={r.fitted_constant:.6g}")
    return 0 if ok else 1


def _cmd_gallery(args):
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    ex = build_example(args.name, n_grid=args.n, truncation=args.L,
                       alpha=args.alpha)
    space = ex.space
    config = {"command": "gallery", "name": args.name, "n": args.n,
              "L": args.L, "alpha": args.alpha, "n_shift": args.n_shift,
              "seed": args.seed}
    stem = outdir / args.name
    if args.name in ("vmo-not-vmomu", "vmomu-not-vmo"):
        from .oscillation import p_oscillation
        rows = [(b.center, b.intrinsic_radius, b.measure,
                 p_oscillation(space, ex.f, b, 1.0)) for b in ex.witness_balls]
        if args.emit in ("csv", "both"):
            oio.write_csv(f"{stem}.csv",
                          ["center", "radius", "measure", "oscillation"],
                          rows, config=config)
        if args.emit in ("svg", "both"):
            plots.plot_field(space.points, ex.f.point_values, f"{stem}.svg",
                             label="f", title=args.name,
                             with_timestamp=args.timestamp)
        print(f"witness oscillations: "
              f"{', '.join(f'{r[3]:.4f}' for r in rows[:8])} ...")
        return 0
    family = default_family(space)
    q = 1.0 if ex.alpha > 0 else None
    f_run = ex.shifted(args.n_shift) if args.n_shift else ex.f
    field = fractional_maximal(space, f_run, ex.alpha, family, q)
    oracle = evaluate_oracle(ex, space.points,
                             n=args.n_shift if args.n_shift else None)
    if args.emit in ("csv", "both"):
        rows = list(zip(space.points.tolist(), field.values.tolist(),
                        [float(v) for v in np.atleast_1d(oracle)]))
        oio.write_csv(f"{stem}.csv", ["x", "field", "oracle"], rows,
                      config=config)
    if args.emit in ("svg", "both"):
        plots.plot_field(space.points, field.values, f"{stem}.svg",
                         oracle=np.atleast_1d(oracle),
                         title=f"{args.name}, alpha={ex.alpha}",
                         with_timestamp=args.timestamp)
    reg = np.isfinite(np.atleast_1d(oracle))
    err = np.abs(field.values[reg] - np.atleast_1d(oracle)[reg]).max()
    print(f"max |field - oracle| on the derived region: {err:.3e}")
    return 0


def _cmd_continuity(args):
    report = continuity_experiment(args.name, range(1, args.n_max + 1),
                                   alpha=args.alpha, n_grid=args.n)
    payload = {"check": report.to_dict(),
               "config": {"command": "continuity", **report.config,
                          "seed": args.seed}}
    if args.out:
        oio.write_report(args.out, payload)
    status = "pass" if report.holds else "FAIL"
    print(f"[{status}] {report.name}: min gap {report.worst_ratio:.4f}")
    return 0 if report.holds else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="oscillat",
        description="maximal functions and mean oscillation on finite "
                    "doubling metric measure spaces")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check the metric-measure axioms")
    p.add_argument("--space", required=True)
    p.add_argument("--out")
    _common(p)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("geometry", help="doubling/lower-mass/annular fits")
    p.add_argument("--space", required=True)
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--out")
    _common(p)
    p.set_defaults(func=_cmd_geometry)

    p = sub.add_parser("maximal", help="fractional maximal field")
    p.add_argument("--space", required=True)
    p.add_argument("--function", required=True)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--convention", choices=["intrinsic", "prescribed"],
                   default=None)
    p.add_argument("--rmin", type=float, default=None)
    p.add_argument("--rmax", type=float, default=None)
    p.add_argument("--q", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.add_argument("--plot")
    _common(p)
    p.set_defaults(func=_cmd_maximal)

    p = sub.add_parser("oscillation", help="per-ball oscillation table")
    p.add_argument("--space", required=True)
    p.add_argument("--function", required=True)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--rmin", type=float, default=None)
    p.add_argument("--rmax", type=float, default=None)
    p.add_argument("--convention", choices=["intrinsic", "prescribed"],
                   default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--summary")
    _common(p)
    p.set_defaults(func=_cmd_oscillation)

    p = sub.add_parser("convolve", help="discrete convolution at scale delta")
    p.add_argument("--space", required=True)
    p.add_argument("--function", required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--plot")
    p.add_argument("--audit", help="JSON dump of the cover/partition")
    _common(p)
    p.set_defaults(func=_cmd_convolve)

    p = sub.add_parser("verify", help="run a named check suite")
    p.add_argument("--suite", required=True,
                   choices=["all", "sublinearity", "types", "blo",
                            "osc-lemmas", "sarason"])
    p.add_argument("--space")
    p.add_argument("--n", type=int, default=512)
    p.add_argument("--out")
    _common(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("gallery", help="named example with oracle overlay")
    p.add_argument("--name", required=True, choices=list(GALLERY_NAMES))
    p.add_argument("--emit", choices=["csv", "svg", "both"], default="csv")
    p.add_argument("--out", default="gallery-out")
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--L", type=float, default=64.0)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--n-shift", type=int, default=0,
                   help="emit the field of f_n = f - n instead of f")
    _common(p)
    p.set_defaults(func=_cmd_gallery)

    p = sub.add_parser("continuity", help="discontinuity witness experiment")
    p.add_argument("--name", required=True,
                   choices=["unbounded-discont", "bounded-discont-M",
                            "bounded-discont-Malpha"])
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--out")
    _common(p)
    p.set_defaults(func=_cmd_continuity)

    return ap


def main(argv=None) -> int:
    _apply_thread_cap()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
