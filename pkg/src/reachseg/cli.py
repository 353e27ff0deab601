"""Command-line interface: ``reachseg <subcommand> ...``.

Exit codes: 0 success or pass, 1 fail or infeasible, 2 usage error, 3 I/O or
parse error. Every subcommand accepts ``--config FILE`` holding ``key = value``
lines named after its flags; flags given on the command line win.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import io as rio
from .convergence import SUITES, verify_suite
from .energy import EnergyParams, PhiModel, total_energy
from .errors import ParseError, PreconditionError
from .example import example_ball
from .optimizer import Schedule, optimize_fixed_k, optimize_variable_k
from .sphere import check_region, regularize_raster

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _add_image_args(p):
    p.add_argument("--image", help="input graymap (P2 or P5)")
    p.add_argument("--pixel-size", type=float, default=1.0, help="physical size of one pixel")
    p.add_argument("--origin", type=float, nargs=2, default=(0.0, 0.0), metavar=("X", "Y"),
                   help="lower-left corner of pixel (0, 0)")


def _add_energy_args(p):
    p.add_argument("--radius", type=float, help="ball radius R")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--phi", default="power:2", help="power:P, nm:NU,A,B or quadratic:C0,C2")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reachseg",
                                     description="Curvature-regularized segmentation with a "
                                                 "uniform ball condition.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="ball test on a region file")
    p.add_argument("region", nargs="?", help="region, region list or segmentation file")
    p.add_argument("--radius", type=float)
    p.add_argument("--tol", type=float, default=0.02)
    p.add_argument("--out", help="write the report as JSON here")

    p = sub.add_parser("energy", help="evaluate G_k of a segmentation on an image")
    _add_image_args(p)
    _add_energy_args(p)
    p.add_argument("--segmentation", help="segmentation file (layer 0 in front)")
    p.add_argument("--out", help="write the breakdown as JSON here")

    p = sub.add_parser("segment", help="minimize G_k over layers in U_R")
    _add_image_args(p)
    _add_energy_args(p)
    p.add_argument("--k", type=int, help="maximum number of layers")
    p.add_argument("--variable-k", action="store_true", help="let the layer count vary")
    p.add_argument("--iters", type=int, default=20000)
    p.add_argument("--seed", type=int, help="random seed (required)")
    p.add_argument("--T0", type=float, help="initial temperature (default 5%% of seed energy)")
    p.add_argument("--cooling", type=float, default=Schedule.cooling)
    p.add_argument("--init", help="starting segmentation file instead of the image seed")
    p.add_argument("--out", help="output directory")

    p = sub.add_parser("verify", help="numerical convergence diagnostics")
    p.add_argument("--suite", choices=SUITES)
    p.add_argument("--radius", type=float)
    p.add_argument("--out", help="report file (default: stdout)")

    p = sub.add_parser("example-ball", help="the disk-minimizer experiment")
    p.add_argument("--radius", type=float, default=2.0)
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--seed", type=int, help="random seed (required)")
    p.add_argument("--optimize", action="store_true", help="also run the optimizer from a noisy seed")
    p.add_argument("--iters", type=int, default=20000)
    p.add_argument("--alpha", type=float, default=10.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--out", help="report file (default: stdout)")

    p = sub.add_parser("regularize", help="threshold an image and extract U_R regions")
    _add_image_args(p)
    p.add_argument("--radius", type=float)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--tol", type=float, default=0.02)
    p.add_argument("--out", help="output region-list file")

    for sp in sub.choices.values():
        sp.add_argument("--config", help="key = value file with defaults for these flags")
    return parser


REQUIRED = {
    "check": ("region", "radius"),
    "energy": ("image", "radius", "segmentation"),
    "segment": ("image", "radius", "seed", "out"),
    "verify": ("suite", "radius"),
    "example-ball": ("seed",),
    "regularize": ("image", "radius", "out"),
}


def _subparser(parser, name):
    for action in parser._subparsers._group_actions:
        return action.choices[name]


def _apply_config(parser, argv):
    """Parse, fold in ``--config`` values as defaults, parse again."""
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    sp = _subparser(parser, args.command)
    actions = {a.dest: a for a in sp._actions if a.dest not in ("help", "config")}
    values = rio.read_config(args.config, actions)
    defaults = {}
    for key, text in values.items():
        action = actions[key]
        if isinstance(action, argparse._StoreTrueAction):
            low = text.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ParseError(f"config key {key!r} expects true or false, got {text!r}")
            defaults[key] = low in ("true", "1", "yes")
        elif action.nargs not in (None, "?"):
            defaults[key] = [action.type(t) if action.type else t for t in text.split()]
        else:
            try:
                defaults[key] = action.type(text) if action.type else text
            except ValueError:
                raise ParseError(f"config key {key!r}: cannot parse {text!r}") from None
    sp.set_defaults(**defaults)
    return parser.parse_args(argv)


def _require(args):
    missing = [k for k in REQUIRED[args.command] if getattr(args, k, None) is None]
    if missing:
        flags = ", ".join(k if k == "region" else "--" + k.replace("_", "-") for k in missing)
        raise UsageError(f"{args.command}: missing {flags}")


def _params(args) -> EnergyParams:
    try:
        phi = PhiModel.parse(args.phi)
        return EnergyParams(args.alpha, args.beta, args.gamma, args.radius, phi)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _image(args):
    return rio.read_pgm(args.image, args.pixel_size, tuple(args.origin))


def _emit(text: str, out):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_check(args) -> int:
    regions = rio.read_regions(args.region)
    rep = check_region(regions, args.radius, args.tol)
    doc = rep.to_dict()
    print(f"{'PASS' if rep.passed else 'FAIL'}: {len(regions)} region(s), R={args.radius:g}, "
          f"tol={args.tol:g}, worst margin {rep.worst_violation:.6g}")
    if not rep.passed:
        print("failing regions: " + ", ".join(map(str, rep.failing_regions())))
    if args.out:
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_energy(args) -> int:
    img = _image(args)
    params = _params(args)
    seg = rio.read_segmentation(args.segmentation, img.grid)
    bd = total_energy(seg, img, params)
    _emit(bd.to_json() + "\n", args.out)
    return EXIT_OK if bd.feasible else EXIT_FAIL


def cmd_segment(args) -> int:
    if args.k is None and not args.variable_k:
        raise UsageError("segment: give --k K or --variable-k")
    if args.k is not None and args.variable_k:
        raise UsageError("segment: --k and --variable-k are exclusive")
    img = _image(args)
    params = _params(args)
    try:
        schedule = Schedule(iterations=args.iters, T0=args.T0, cooling=args.cooling, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    init = rio.read_segmentation(args.init, img.grid) if args.init else None
    if args.variable_k:
        rep = optimize_variable_k(img, params, schedule, init=init)
    else:
        rep = optimize_fixed_k(img, params, schedule, args.k, init=init)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rio.write_segmentation(out / "segmentation.json", rep.final)
    for i, layer in enumerate(rep.final.layers):
        rio.write_region(out / f"layer_{i:03d}.json", layer)
    (out / "energy.json").write_text(rep.breakdown.to_json() + "\n", encoding="utf-8")
    (out / "trace.csv").write_text(rep.trace_csv(), encoding="utf-8")
    rio.write_label_image(rep.final, img.grid, out / "labels.pgm")
    print(f"G = {rep.best_energy:.6f} with {rep.final.k} layer(s); "
          f"{'feasible' if rep.feasible else 'INFEASIBLE'}; results in {out}")
    return EXIT_OK if rep.feasible else EXIT_FAIL


def cmd_verify(args) -> int:
    res = verify_suite(args.suite, args.radius)
    _emit(res.to_text(), args.out)
    if args.out:
        print(f"{args.suite}: {'PASS' if res.passed else 'FAIL'}")
    return EXIT_OK if res.passed else EXIT_FAIL


def cmd_example_ball(args) -> int:
    rep = example_ball(args.radius, args.grid, args.seed, optimize=args.optimize,
                       alpha=args.alpha, beta=args.beta, gamma=args.gamma, iterations=args.iters)
    _emit(rep.to_text(), args.out)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_regularize(args) -> int:
    img = _image(args)
    mask = img.values > args.threshold
    regions = regularize_raster(mask, args.radius, img.pixel_size, img.origin, args.tol)
    rio.write_regions(args.out, regions)
    print(f"{len(regions)} region(s) written to {args.out}")
    return EXIT_OK if regions else EXIT_FAIL


COMMANDS = {
    "check": cmd_check,
    "energy": cmd_energy,
    "segment": cmd_segment,
    "verify": cmd_verify,
    "example-ball": cmd_example_ball,
    "regularize": cmd_regularize,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except SystemExit as exc:  # argparse usage errors and --help
        return int(exc.code or 0)
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        _require(args)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
