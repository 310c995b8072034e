"""Command-line interface.

    zoomrbf gen-points --count 500 [--cap cx,cy,cz,radius] --out pts.txt
    zoomrbf fit --schedule run.json --target builtin:paper --out model.txt
    zoomrbf evaluate --model model.txt --points pts.txt [--out values.txt]
    zoomrbf verify-kernel --delta 1 --ell-max 50
    zoomrbf reproduce-table1 [--config run.json] [--out-csv t1.csv] [--out-grid g.csv]
    zoomrbf reproduce-table2 ...
    zoomrbf oneshot ...
"""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from zoomrbf import __version__
from zoomrbf._parallel import set_workers
from zoomrbf.config import ConfigError, load_config
from zoomrbf.experiment import (
    oneshot_config,
    zoom_config,
    paper_target,
    run_experiment,
    superlocal_config,
    write_grid_csv,
    write_table_csv,
)
from zoomrbf.geometry import GeometryError, SphericalCap, UnitVector, read_point_set, write_point_set
from zoomrbf.kernels import KernelError, ScaledZonalKernel, decay_check, legendre_coefficients
from zoomrbf.multiscale import evaluate_model, fit, read_model, write_model
from zoomrbf.points import equal_area_cap, equal_area_sphere

log = logging.getLogger("zoomrbf")

TARGETS = {"builtin:paper": paper_target}


def _parse_cap(text: str) -> SphericalCap:
    try:
        cx, cy, cz, r = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected cx,cy,cz,radius") from None
    try:
        return SphericalCap(UnitVector(cx, cy, cz), r)
    except GeometryError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zoomrbf", description="Multiscale zoom-in RBF interpolation on the sphere.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--threads", type=_positive_int, default=None,
                   help="cap on worker threads (default: $ZOOMRBF_THREADS or 1)")
    p.add_argument("-q", "--quiet", action="store_true", help="suppress progress lines on stderr")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")

    g = sub.add_parser("gen-points", help="write an equal-area point set")
    g.add_argument("--count", type=_positive_int, required=True)
    g.add_argument("--cap", type=_parse_cap, default=None, help="cx,cy,cz,radius (default: whole sphere)")
    g.add_argument("--out", required=True)

    f = sub.add_parser("fit", help="fit a multiscale model and save it")
    f.add_argument("--schedule", "--config", dest="config", required=True, help="JSON run configuration")
    f.add_argument("--target", default="builtin:paper", choices=sorted(TARGETS))
    f.add_argument("--out", required=True)

    e = sub.add_parser("evaluate", help="evaluate a saved model at the points of a point file")
    e.add_argument("--model", required=True)
    e.add_argument("--points", required=True)
    e.add_argument("--out", default=None, help="write values here instead of stdout")

    v = sub.add_parser("verify-kernel", help="tabulate Legendre coefficients of the scaled kernel")
    v.add_argument("--delta", type=float, default=1.0)
    v.add_argument("--ell-max", type=int, default=50)
    v.add_argument("--quad-order", type=int, default=None)

    for name, help_ in (
        ("reproduce-table1", "nine-level global/local/superlocal run"),
        ("reproduce-table2", "three superlocal levels only"),
        ("oneshot", "single level at the finest scale"),
    ):
        r = sub.add_parser(name, help=help_)
        r.add_argument("--config", default=None, help="JSON run configuration (default: the built-in one)")
        r.add_argument("--out-csv", default=None)
        r.add_argument("--out-grid", default=None)
    return p


def _cmd_gen_points(args) -> int:
    ps = equal_area_sphere(args.count) if args.cap is None else equal_area_cap(args.cap, args.count)
    write_point_set(ps, args.out)
    print(f"wrote {len(ps)} points to {args.out}")
    return 0


def _cmd_fit(args) -> int:
    config = load_config(args.config)
    model = fit(TARGETS[args.target], config.schedule(), tol=config.cg_tol, kappa_tol=config.kappa_tol)
    write_model(model, args.out)
    print("level,N,delta,h,kappa,node_residual")
    for j, lv in enumerate(model.levels, 1):
        print(f"{j},{lv.count},{lv.delta:.6e},{lv.mesh_norm:.6e},{lv.kappa:.6e},{lv.node_residual:.3e}")
    return 0


def _cmd_evaluate(args) -> int:
    model = read_model(args.model)
    pts = read_point_set(args.points, validate=False)
    vals = np.atleast_1d(evaluate_model(model, pts.points))
    text = "".join(f"{v:.16e}\n" for v in vals)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_verify_kernel(args) -> int:
    if args.ell_max < 10:
        raise KernelError("--ell-max must be at least 10")
    k = ScaledZonalKernel(args.delta)
    coeffs = legendre_coefficients(k, args.ell_max, args.quad_order)
    print(f"{'ell':>4} {'coefficient':>15} {'scaled':>15}")
    for ell, c in enumerate(coeffs):
        print(f"{ell:>4d} {c:>15.8e} {c * (1 + k.delta * ell) ** (2 * k.sigma):>15.8e}")
    lo, hi = decay_check(k, args.ell_max, args.quad_order)
    print(f"c_low = {lo:.6e}  c_high = {hi:.6e}  ratio = {hi / lo:.4g}")
    return 0


def _cmd_reproduce(args, default) -> int:
    config = load_config(args.config) if args.config else default()
    report = run_experiment(config)
    print(report.format_table())
    if args.out_csv:
        write_table_csv(report, args.out_csv)
    if args.out_grid:
        write_grid_csv(report, args.out_grid)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(message)s",
        stream=sys.stderr,
    )
    set_workers(args.threads)
    handlers = {
        "gen-points": _cmd_gen_points,
        "fit": _cmd_fit,
        "evaluate": _cmd_evaluate,
        "verify-kernel": _cmd_verify_kernel,
        "reproduce-table1": lambda a: _cmd_reproduce(a, zoom_config),
        "reproduce-table2": lambda a: _cmd_reproduce(a, superlocal_config),
        "oneshot": lambda a: _cmd_reproduce(a, oneshot_config),
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, GeometryError, KernelError, ValueError, OSError, RuntimeError) as exc:
        print(f"zoomrbf {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
