"""
Command-line interface.

Subcommands
-----------
ingest          average a scattered CSV onto an equiangular grid
synthesize      sample a synthetic field with known parts
separate        multiscale separation into internal, external and toroidal parts
pyramid         the separated parts at every scale J0..Jmax
kernel-table    tabulate a regularized zonal kernel and its derivatives
oracle-compare  compare the separation with the brute-force spectral projection

Exit codes: 0 success, 2 precondition failure (including invalid
arguments), 3 under-resolution, 4 I/O or file format errors.
"""

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import io as sio
from .config import RunConfig, parse_grid
from .errors import DomainError, InputFormatError, PreconditionError, UnderResolutionError
from .ingest import ingest
from .kernels import (
    RegularizationConfig,
    green_reg_profile,
    s_profile,
    single_layer_reg_profile,
)
from .multiscale import separate
from .quadrature import build_grid
from .synthetic import (
    PART_NAMES,
    SyntheticSpec,
    make_field,
    relative_sup_errors,
    spectral_oracle,
)

__all__ = ["main", "build_parser", "run_separation", "load_input", "DEFAULT_TERMS"]

log = logging.getLogger("sphsep")

EXIT_OK = 0
EXIT_PRECONDITION = 2
EXIT_UNDER_RESOLUTION = 3
EXIT_IO = 4

DEFAULT_TERMS = ((1, 2, 1, 1.0), (2, 3, 2, 1.0), (3, 4, 3, 1.0))
KERNELS = ("green", "single-layer", "dinv-green")
TRUTH_FILE = "truth.json"


def _cfg(args):
    n_lat, n_lon = parse_grid(args.grid)
    return RunConfig(
        J0=args.j0,
        Jmax=args.jmax,
        green_order=args.green_order,
        single_layer_order=args.single_layer_order,
        n_lat=n_lat,
        n_lon=n_lon,
        bin_deg=args.bin_deg,
        huber_c=args.huber_c,
        radial_tol=args.radial_tol,
        min_nodes=args.min_nodes,
    )


def load_input(path, cfg):
    """Read a grid field, or ingest a scattered dataset.

    Returns the field and the flagged (interpolated) node indices.
    """
    path = Path(path)
    if sio.is_scattered(path):
        res = ingest(sio.read_scattered(path), cfg)
        return res.field, res.filled_indices.tolist()
    return sio.read_field(path), []


def _load_truth(path, grid):
    spec = SyntheticSpec.from_dict(json.loads(Path(path).read_text()))
    return make_field(spec, grid).parts


def _find_truth(input_path, explicit):
    if explicit:
        return Path(explicit)
    cand = Path(input_path).parent / TRUTH_FILE
    return cand if cand.exists() else None


def _rho_schedule(J0, Jmax):
    return {str(j): math.ldexp(1.0, -j) for j in range(J0, Jmax + 1)}


def run_separation(input_path, cfg, out_dir, fmt="csv", truth=None):
    """Separate the field in ``input_path`` and write all results.

    Writes ``internal``, ``external`` and ``toroidal`` fields, the wavelet
    details ``detail_J{j}_{part}``, a ``residual`` (input minus internal
    part) and ``manifest.json``. Returns the manifest.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    field, filled = load_input(input_path, cfg)
    res = separate(
        field,
        cfg.J0,
        cfg.Jmax,
        cfg.green_order,
        cfg.single_layer_order,
        radial_tol=cfg.radial_tol,
        min_nodes=cfg.min_nodes,
    )
    parts = res.parts
    for name in PART_NAMES:
        sio.write_field(sio.field_path(out, name, fmt), parts[name], fmt)
    for j, detail in sorted(res.details.items()):
        for name in PART_NAMES:
            sio.write_field(sio.field_path(out, f"detail_J{j}_{name}", fmt), detail[name], fmt)
    residual = field - parts["internal"]
    sio.write_field(sio.field_path(out, "residual", fmt), residual, fmt)

    manifest = {
        "input": Path(input_path).name,
        "J0": res.J0,
        "Jmax": res.Jmax,
        "green_order": res.green_order,
        "single_layer_order": res.single_layer_order,
        "rho_schedule": _rho_schedule(res.J0, res.Jmax),
        "grid": {"n_lat": field.grid.n_lat, "n_lon": field.grid.n_lon, "radius": field.grid.radius},
        "config": cfg.to_dict(),
        "diagnostics": {
            "radial_mean": res.radial_mean,
            "input_sup": field.sup(),
            "residual_sup": residual.sup(),
            "part_sup": {name: parts[name].sup() for name in PART_NAMES},
        },
        "filled_cells": filled,
    }
    truth = _find_truth(input_path, truth)
    if truth is not None:
        manifest["truth"] = truth.name
        manifest["diagnostics"]["relative_sup_error"] = relative_sup_errors(
            parts, _load_truth(truth, field.grid)
        )
    sio.write_json(out / "manifest.json", manifest)
    return manifest


# ---------------------------------------------------------------------------
# subcommands


def _cmd_ingest(args):
    cfg = _cfg(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    res = ingest(sio.read_scattered(args.input), cfg)
    sio.write_field(sio.field_path(out, "field", args.format), res.field, args.format)
    sio.write_json(
        out / "ingest.json",
        {
            "input": Path(args.input).name,
            "config": cfg.to_dict(),
            "records": int(res.counts.sum()),
            "empty_cells": int(res.filled.sum()),
            "filled_cells": res.filled_indices.tolist(),
        },
    )


def _parse_term(text):
    parts = text.split(",")
    if len(parts) not in (3, 4):
        raise DomainError(f"term must be i,n,k[,amplitude], got {text!r}")
    i, n, k = (int(p) for p in parts[:3])
    amp = float(parts[3]) if len(parts) == 4 else 1.0
    return (i, n, k, amp)


def _cmd_synthesize(args):
    n_lat, n_lon = parse_grid(args.grid)
    terms = [_parse_term(t) for t in args.term] if args.term else list(DEFAULT_TERMS)
    spec = SyntheticSpec(terms, args.radius)
    sf = make_field(spec, build_grid(n_lat, n_lon, args.radius))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sio.write_field(sio.field_path(out, "field", args.format), sf.field, args.format)
    truth = spec.to_dict()
    truth["grid"] = {"n_lat": n_lat, "n_lon": n_lon}
    truth["part_sup"] = {name: sf.parts[name].sup() for name in PART_NAMES}
    sio.write_json(out / TRUTH_FILE, truth)


def _cmd_separate(args):
    run_separation(args.input, _cfg(args), args.out, args.format, args.truth)


def _cmd_pyramid(args):
    cfg = _cfg(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    field, filled = load_input(args.input, cfg)
    res = separate(
        field, cfg.J0, cfg.Jmax, cfg.green_order, cfg.single_layer_order,
        radial_tol=cfg.radial_tol, min_nodes=cfg.min_nodes,
    )
    sups = {}
    for J in range(res.J0, res.Jmax + 1):
        parts = res.at_scale(J)
        sups[str(J)] = {name: parts[name].sup() for name in PART_NAMES}
        for name in PART_NAMES:
            sio.write_field(sio.field_path(out, f"scale_J{J}_{name}", args.format), parts[name], args.format)
    sio.write_json(
        out / "manifest.json",
        {
            "input": Path(args.input).name,
            "J0": res.J0,
            "Jmax": res.Jmax,
            "rho_schedule": _rho_schedule(res.J0, res.Jmax),
            "config": cfg.to_dict(),
            "part_sup_by_scale": sups,
            "filled_cells": filled,
        },
    )


def kernel_table(kernel, J, order, points):
    """Columns ``t, value, deriv1, deriv2`` of a regularized kernel at ``rho = 2^-J``."""
    cfg = RegularizationConfig.from_scale(J, order)
    profile = {
        "green": green_reg_profile,
        "single-layer": single_layer_reg_profile,
        "dinv-green": s_profile,
    }[kernel](cfg)
    t = np.linspace(-1.0, 1.0, points)
    return np.column_stack([t, profile.value(t), profile.deriv1(t), profile.deriv2(t)])


def _cmd_kernel_table(args):
    order = args.order or (args.green_order if args.kernel == "green" else args.single_layer_order)
    table = kernel_table(args.kernel, args.scale, order, args.points)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"kernel_{args.kernel}_J{args.scale}_n{order}"
    cols = ("t", "value", "deriv1", "deriv2")
    if args.format == "json":
        sio.write_json(out / f"{stem}.json", {c: table[:, i].tolist() for i, c in enumerate(cols)})
    else:
        np.savetxt(out / f"{stem}.csv", table, fmt="%.17g", delimiter=",", header=",".join(cols), comments="")


def oracle_compare(field, cfg, lmax):
    """Relative sup differences between the separation and the spectral oracle."""
    res = separate(
        field, cfg.J0, cfg.Jmax, cfg.green_order, cfg.single_layer_order,
        radial_tol=cfg.radial_tol, min_nodes=cfg.min_nodes,
    )
    oracle = spectral_oracle(field, lmax).parts(field.grid)
    return res, oracle, relative_sup_errors(res.parts, oracle)


def _cmd_oracle_compare(args):
    cfg = _cfg(args)
    field, filled = load_input(args.input, cfg)
    res, oracle, diff = oracle_compare(field, cfg, args.lmax)
    report = {
        "input": Path(args.input).name,
        "J0": cfg.J0,
        "Jmax": cfg.Jmax,
        "lmax": args.lmax,
        "config": cfg.to_dict(),
        "relative_sup_difference": diff,
        "oracle_part_sup": {name: oracle[name].sup() for name in PART_NAMES},
        "filled_cells": filled,
    }
    truth = _find_truth(args.input, args.truth)
    if truth is not None:
        report["truth"] = truth.name
        report["relative_sup_error"] = relative_sup_errors(res.parts, _load_truth(truth, field.grid))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sio.write_json(out / "oracle_compare.json", report)
    print(json.dumps(diff, sort_keys=True))


# ---------------------------------------------------------------------------
# parser


def _common(p, scales=True):
    d = RunConfig()
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--format", choices=sio.FORMATS, default="csv", help="grid field file format")
    p.add_argument("--grid", default=f"{d.n_lat}x{d.n_lon}", help="grid size NxM (latitudes x longitudes)")
    p.add_argument("--bin-deg", type=float, default=d.bin_deg, help="averaging cell side in degrees")
    p.add_argument("--huber-c", type=float, default=d.huber_c, help="Huber constant")
    p.add_argument("--green-order", type=int, default=d.green_order, choices=(1, 2, 3))
    p.add_argument("--single-layer-order", type=int, default=d.single_layer_order, choices=(1, 2, 3))
    p.add_argument("--j0", type=int, default=d.J0, help="coarsest scale")
    p.add_argument("--jmax", type=int, default=d.Jmax, help="finest scale")
    p.add_argument("--radial-tol", type=float, default=None, help="tolerance on the radial mean")
    p.add_argument("--min-nodes", type=int, default=d.min_nodes, help="minimum nodes per wavelet cap")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sphsep",
        description="Multiscale separation of spherical vector fields into internal, external and toroidal parts.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="average scattered records onto an equiangular grid")
    p.add_argument("input", help="CSV with columns " + ",".join(sio.SCATTERED_COLUMNS))
    _common(p)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("synthesize", help="sample a synthetic field with known parts")
    p.add_argument("--term", action="append", help="i,n,k[,amplitude]; repeatable (default: 3-term field)")
    p.add_argument("--radius", type=float, default=1.0)
    _common(p)
    p.set_defaults(func=_cmd_synthesize)

    for name, func, helptext in (
        ("separate", _cmd_separate, "separate a field into internal, external and toroidal parts"),
        ("pyramid", _cmd_pyramid, "write the separated parts at every scale"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("input", help="grid field file or scattered CSV")
        if name == "separate":
            p.add_argument("--truth", help="ground-truth manifest (default: truth.json next to input)")
        _common(p)
        p.set_defaults(func=func)

    p = sub.add_parser("kernel-table", help="tabulate a regularized kernel")
    p.add_argument("--kernel", choices=KERNELS, default="green")
    p.add_argument("--scale", type=int, default=4, help="scale index J, rho = 2^-J")
    p.add_argument("--order", type=int, choices=(1, 2, 3), help="Taylor order (default per kernel)")
    p.add_argument("--points", type=int, default=401, help="number of t samples on [-1, 1]")
    _common(p)
    p.set_defaults(func=_cmd_kernel_table)

    p = sub.add_parser("oracle-compare", help="compare the separation with the spectral projection")
    p.add_argument("input", help="grid field file or scattered CSV")
    p.add_argument("--lmax", type=int, default=8, help="degree of the spectral projection")
    p.add_argument("--truth", help="ground-truth manifest (default: truth.json next to input)")
    _common(p)
    p.set_defaults(func=_cmd_oracle_compare)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        args.func(args)
    except UnderResolutionError as exc:
        print(f"sphsep: under-resolution at scale {exc.scale}: {exc}", file=sys.stderr)
        return EXIT_UNDER_RESOLUTION
    except PreconditionError as exc:
        print(f"sphsep: precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (InputFormatError, OSError) as exc:
        print(f"sphsep: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DomainError as exc:
        print(f"sphsep: invalid input: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
