"""Command line front end.

Subcommands: sample, recover, eval, sweep-eta1, sweep-eta2, table1, table2,
fig6. Every flag can also be supplied through a flat key=value config file
(--config); explicit flags override file values. Exit codes: 0 success,
1 usage error, 2 data error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import harness
from .images import ImageFormatError, load_image, quality_report, save_image
from .masks import (
    MaskBudgetError,
    MeasurementsFormatError,
    load_mask,
    load_measurements,
)
from .recovery import InitMode, NumericalError, TvConfig, recover

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

logger = logging.getLogger("marsense")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems must exit 1, not argparse's 2
        raise UsageError(message)


def _comma_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad float list {text!r}") from exc


def _comma_names(text: str) -> tuple[str, ...]:
    return tuple(tok.strip() for tok in text.split(",") if tok.strip())


def _add_common(p: _Parser, *, image_default=None) -> None:
    p.add_argument("--config", help="flat key=value file mirroring the flags")
    p.add_argument("--image", default=image_default, help="source image path, or 'phantom'/'ball'")
    p.add_argument("--n", type=int, default=None, help="generator size for phantom/ball")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--format", dest="table_format", choices=("csv", "json"), default="csv")


def _add_acquisition(p: _Parser) -> None:
    p.add_argument("--strategy", type=_comma_names, default=("mar",), help="comma list of random|mar|trps")
    p.add_argument("--eta1", type=float, default=0.30)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--eta2", type=float, default=None, help="target deliberate share of the samples")
    group.add_argument("--edge-budget", type=int, default=None, help="edge pixel count before morphology")
    p.add_argument("--morph", choices=("none", "dilate", "close"), default="dilate")
    p.add_argument("--factor", type=int, default=4, help="low-res decimation factor")
    p.add_argument("--edge-source", choices=("predicted", "true"), default="predicted")
    p.add_argument("--trps-fraction", type=float, default=0.6, help="first-stage share of the TRPS budget")
    p.add_argument("--trps-predictor", choices=("tv", "nearest"), default="tv")


def _add_recovery(p: _Parser) -> None:
    p.add_argument("--alpha", type=float, default=8.0)
    p.add_argument("--eps", type=float, default=2.55)
    p.add_argument("--iters", type=int, default=300)
    p.add_argument("--grad-tol", type=float, default=1e-4)
    p.add_argument("--init", choices=("mean", "zero", "bicubic"), default="mean")


def build_parser() -> _Parser:
    parser = _Parser(prog="marsense", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", parents=[], help="build a sampling mask and take measurements")
    _add_common(p)
    _add_acquisition(p)
    p.add_argument("--mask-format", choices=("pgm", "pbm"), default="pgm")
    p.add_argument("--meas-format", choices=("bin", "txt", "json"), default="bin")

    p = sub.add_parser("recover", help="TV recovery from persisted measurements")
    p.add_argument("--config", help="flat key=value file mirroring the flags")
    p.add_argument("--meas", required=True, help="measurements file")
    p.add_argument("--mask", required=True, help="mask raster matching the measurements")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--trace", default=None, help="objective trace CSV path")
    p.add_argument("--factor", type=int, default=4)
    _add_recovery(p)

    p = sub.add_parser("eval", help="PSNR/SSIM between a reference and a test image")
    _add_common(p)
    p.add_argument("--test", required=True, help="image to score against the reference")

    p = sub.add_parser("sweep-eta1", help="quality along a sampling-ratio grid")
    _add_common(p, image_default="phantom")
    _add_acquisition(p)
    _add_recovery(p)
    p.add_argument("--grid", type=_comma_floats, default=(0.2, 0.3, 0.4, 0.5))
    p.set_defaults(strategy=("random", "mar"))

    p = sub.add_parser("sweep-eta2", help="quality along a deliberate-share grid at fixed eta1")
    _add_common(p, image_default="phantom")
    _add_acquisition(p)
    _add_recovery(p)
    p.add_argument("--grid", type=_comma_floats, default=(0.2, 0.45, 0.74, 0.9, 0.99))
    p.set_defaults(strategy=("mar", "random"), eta1=0.445)

    p = sub.add_parser("table1", help="random vs mixed-mask recovery per image")
    _add_common(p, image_default="phantom")
    _add_acquisition(p)
    _add_recovery(p)
    p.add_argument("--images", type=_comma_names, default=(), help="extra image paths")

    p = sub.add_parser("table2", help="moderate vs extreme deliberate share at fixed eta1")
    _add_common(p, image_default="phantom")
    _add_acquisition(p)
    _add_recovery(p)
    p.add_argument("--images", type=_comma_names, default=(), help="extra image paths")
    p.set_defaults(eta1=0.445)
    p.add_argument("--grid", type=_comma_floats, default=(0.74, 0.99))

    p = sub.add_parser("fig6", help="dense CS vs random vs mixed masks on the ball image")
    _add_common(p, image_default="ball")
    _add_acquisition(p)
    _add_recovery(p)

    return parser


def _apply_config_file(parser: _Parser, argv: list[str], args: argparse.Namespace) -> argparse.Namespace:
    if not getattr(args, "config", None):
        return args
    path = Path(args.config)
    if not path.exists():
        raise FileNotFoundError(f"config file {path} not found")
    sub_actions = None
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            sub_actions = action
    subparser = sub_actions.choices[args.command]
    by_dest = {a.dest: a for a in subparser._actions}
    overrides = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        dest = key.replace("-", "_")
        if dest not in by_dest:
            raise UsageError(f"{path}:{lineno}: unknown option {key!r} for {args.command}")
        action = by_dest[dest]
        overrides[dest] = action.type(value) if action.type else value
    subparser.set_defaults(**overrides)
    return parser.parse_args(argv)  # explicit flags still win over file values


def _spec_from_args(args) -> harness.ExperimentSpec:
    return harness.ExperimentSpec(
        image=args.image,
        size=args.n,
        extra_images=tuple(getattr(args, "images", ())),
        strategies=tuple(args.strategy),
        eta1=args.eta1,
        eta1_grid=tuple(getattr(args, "grid", ())) or (0.2, 0.3, 0.4, 0.5),
        eta2_grid=tuple(getattr(args, "grid", ())) or (0.74, 0.99),
        edge_budget=args.edge_budget,
        target_eta2=args.eta2,
        factor=args.factor,
        morph=args.morph,
        edge_source=args.edge_source,
        trps_first_stage_fraction=args.trps_fraction,
        trps_predictor=args.trps_predictor,
        alpha=getattr(args, "alpha", 8.0),
        eps_tv=getattr(args, "eps", 2.55),
        max_iters=getattr(args, "iters", 300),
        grad_tol=getattr(args, "grad_tol", 1e-4),
        init=getattr(args, "init", "mean"),
        seed=args.seed,
        out_dir=args.out,
        mask_format=getattr(args, "mask_format", "pgm"),
        meas_format=getattr(args, "meas_format", "bin"),
        table_format=args.table_format,
    )


def cmd_sample(args) -> int:
    if args.image is None:
        raise UsageError("sample: --image is required")
    if args.out is None:
        raise UsageError("sample: --out is required")
    if len(args.strategy) != 1:
        raise UsageError("sample: exactly one --strategy")
    label, arr = harness.load_source_image(args.image, args.n)
    spec = _spec_from_args(args)
    cfg = spec.acquisition_config(args.strategy[0], args.eta1, target_eta2=args.eta2, edge_budget=args.edge_budget)
    from .masks import apply_mask, build_mask_bundle, save_mask, save_measurements

    bundle = build_mask_bundle(arr, cfg)
    meas = apply_mask(arr, bundle.s_m)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ext = ".pbm" if args.mask_format == "pbm" else ".pgm"
    for name, mask in (("mask_l", bundle.s_l), ("mask_a", bundle.s_a), ("mask_r", bundle.s_r), ("mask_m", bundle.s_m)):
        save_mask(mask, out / f"{name}{ext}")
    meas_ext = {"bin": ".bin", "txt": ".txt", "json": ".json"}[args.meas_format]
    save_measurements(meas, out / f"measurements{meas_ext}", fmt=args.meas_format)
    doc = {
        "image": label,
        "strategy": args.strategy[0],
        "eta1": bundle.eta1,
        "eta2": bundle.eta2,
        "counts": {
            "lowres": bundle.s_l.popcount,
            "adaptive": bundle.s_a.popcount,
            "random": bundle.s_r.popcount,
            "mixed": bundle.s_m.popcount,
        },
        "seed": args.seed,
    }
    (out / "bundle.json").write_text(json.dumps(doc, indent=1) + "\n", encoding="ascii")
    harness.write_manifest(out, spec, "sample")
    print(f"sampled {label}: eta1={bundle.eta1:.6f} eta2={bundle.eta2:.6f} -> {out}")
    return EXIT_OK


def cmd_recover(args) -> int:
    meas = load_measurements(args.meas)
    bits = load_mask(args.mask)
    cfg = TvConfig(alpha=args.alpha, eps_tv=args.eps, max_iters=args.iters, grad_tol=args.grad_tol)
    result = recover(meas, bits, cfg, init_mode=InitMode(args.init), trace_path=args.trace)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        save_image(result.image, out / "recovered.pgm")
        np.save(out / "recovered.npy", result.image)
        doc = {
            "iterations": result.iterations,
            "converged": result.converged,
            "final_grad_norm": result.final_grad_norm,
            "objective_first": result.objective_trace[0],
            "objective_last": result.objective_trace[-1],
        }
        (out / "recovery.json").write_text(json.dumps(doc, indent=1) + "\n", encoding="ascii")
    print(
        f"recovered {meas.width}x{meas.height} from {meas.count} samples: "
        f"iters={result.iterations} converged={result.converged}"
    )
    return EXIT_OK


def cmd_eval(args) -> int:
    if args.image is None:
        raise UsageError("eval: --image is required")
    _, ref = harness.load_source_image(args.image, args.n)
    test = load_image(args.test)
    report = quality_report(ref, test)
    if args.table_format == "json":
        text = json.dumps({"mse": report.mse, "psnr_db": report.psnr_db, "ssim": report.ssim}, indent=1)
    else:
        text = "mse,psnr_db,ssim\n" + f"{report.mse:.6f},{report.psnr_db:.6f},{report.ssim:.8f}"
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        suffix = ".json" if args.table_format == "json" else ".csv"
        (out / f"eval{suffix}").write_text(text + "\n", encoding="ascii")
    print(text)
    return EXIT_OK


def _print_rows(rows) -> None:
    print(",".join(harness.RESULT_COLUMNS))
    for row in rows:
        print(",".join(row.csv_values()))


def cmd_sweep_eta1(args) -> int:
    spec = _spec_from_args(args)
    spec.eta1_grid = tuple(args.grid)
    _print_rows(harness.sweep_eta1(spec))
    return EXIT_OK


def cmd_sweep_eta2(args) -> int:
    spec = _spec_from_args(args)
    spec.eta2_grid = tuple(args.grid)
    _print_rows(harness.sweep_eta2(spec))
    return EXIT_OK


def cmd_table1(args) -> int:
    spec = _spec_from_args(args)
    _print_rows(harness.reproduce_table1(spec))
    return EXIT_OK


def cmd_table2(args) -> int:
    spec = _spec_from_args(args)
    spec.eta2_grid = tuple(args.grid)
    _print_rows(harness.reproduce_table2(spec))
    return EXIT_OK


def cmd_fig6(args) -> int:
    spec = _spec_from_args(args)
    _print_rows(harness.compare_fig6(spec))
    return EXIT_OK


_COMMANDS = {
    "sample": cmd_sample,
    "recover": cmd_recover,
    "eval": cmd_eval,
    "sweep-eta1": cmd_sweep_eta1,
    "sweep-eta2": cmd_sweep_eta2,
    "table1": cmd_table1,
    "table2": cmd_table2,
    "fig6": cmd_fig6,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args = _apply_config_file(parser, argv, args)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, ImageFormatError, MeasurementsFormatError, MaskBudgetError, ValueError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, RuntimeError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
