"""Command-line entry point: ``relu-regions <subcommand>``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bounds
from .experiment import ExperimentConfig, run_experiment
from .network import InitSpec, he_init, load
from .regions import AffineSlice, default_window, enumerate_regions
from .svg import SvgStyle, render_svg
from .training import finite_difference_gradcheck
from .data import make_memorization_dataset


def _ints(text):
    return [int(t) for t in text.split(",") if t.strip()]


def _experiment_config(args, init_only):
    doc = json.loads(Path(args.config).read_text()) if args.config else {}
    cfg = ExperimentConfig.from_json(doc)
    if args.widths:
        cfg.widths = _ints(args.widths)
    if args.runs is not None:
        cfg.runs = args.runs
    if args.seed is not None:
        cfg.seed = args.seed
    if args.output_dir:
        cfg.output_dir = args.output_dir
    if args.bias_std is not None:
        cfg.init = {**cfg.init, "bias_std": args.bias_std}
    if args.weight_scale is not None:
        cfg.init = {**cfg.init, "weight_scale": args.weight_scale}
    if args.slices is not None:
        cfg.slices = {**cfg.slices, "count": args.slices}
    if args.policy:
        cfg.slices = {**cfg.slices, "policy": args.policy}
    if args.workers is not None:
        cfg.workers = args.workers
    if init_only:
        cfg.train = {**cfg.train, "epochs": 0, "checkpoints": [0]}
    else:
        if args.epochs is not None:
            cfg.train = {**cfg.train, "epochs": args.epochs}
        if args.checkpoints:
            cfg.train = {**cfg.train, "checkpoints": [float(c) for c in args.checkpoints.split(",")]}
        if args.lr is not None:
            cfg.train = {**cfg.train, "lr": args.lr}
    return cfg


def _report(series, out):
    print("checkpoint  mean_count  std_count  mean_acc", file=out)
    for e, m, s, a in zip(series.epochs, series.mean_count, series.std_count, series.mean_accuracy):
        print(f"{e:10g}  {m:10.1f}  {s:9.1f}  {a:8.3f}", file=out)
    print(f"predicted (neurons^k / k!): {series.predicted:g}", file=out)
    for f in series.failed_runs:
        print(f"run {f['run']} FAILED: {f['error'].splitlines()[0]}", file=sys.stderr)
    return 1 if series.failed_runs else 0


def cmd_count(args, init_only):
    cfg = _experiment_config(args, init_only)
    series = run_experiment(cfg)
    return _report(series, sys.stdout)


def cmd_bounds(args):
    n_neurons = args.neurons if args.neurons is not None else sum(_ints(args.widths))
    rows = [bounds.bounds_table(n_neurons, n, T=args.T, volume=args.volume) for n in _ints(args.n_in)]
    if args.json:
        print(json.dumps(rows, indent=2))
    else:
        keys = list(rows[0])
        print("  ".join(f"{k:>25}" for k in keys))
        for r in rows:
            print("  ".join(f"{r[k]:>25g}" if isinstance(r[k], float) else f"{r[k]:>25}" for k in keys))
    return 0


def cmd_render(args):
    if args.network:
        net = load(args.network)
    else:
        net = he_init(args.input_dim, _ints(args.widths) + [1],
                      InitSpec(bias_std=args.bias_std, seed=args.seed))
    if net.input_dim < 2:
        slc = AffineSlice(np.zeros(net.input_dim), np.eye(net.input_dim)[:1])
    else:
        slc = AffineSlice.coordinate_plane(net.input_dim, 1 if args.line else 2)
    census = enumerate_regions(net, slc, default_window(slc, B=args.B), degenerate="assign")
    Path(args.out).write_text(render_svg(census, SvgStyle(width=args.width)))
    if args.census_json:
        Path(args.census_json).write_text(json.dumps(census.to_json()))
    print(f"{census.activation_count} activation regions, {census.linear_count} linear regions -> {args.out}")
    return 0


def cmd_gradcheck(args):
    net = he_init(args.input_dim, _ints(args.widths) + [2], InitSpec(bias_std=0.1, seed=args.seed))
    ds = make_memorization_dataset(args.points, args.input_dim, seed=args.seed)
    err, info = finite_difference_gradcheck(net, ds, args.probes, seed=args.seed, return_details=True)
    print(f"max relative error {err:.3e} over {info['probes']} probes "
          f"({info['skipped_kinks']} kink probes skipped)")
    return 0 if err < args.tol else 1


def build_parser():
    p = argparse.ArgumentParser(prog="relu-regions", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    for name, help_ in (("init-count", "count regions at initialisation"),
                        ("train-count", "count regions through training")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", help="experiment config JSON")
        s.add_argument("--widths", help="hidden widths, e.g. 20,20,20")
        s.add_argument("--runs", type=int)
        s.add_argument("--seed", type=int)
        s.add_argument("--slices", type=int, help="slices per run")
        s.add_argument("--policy", choices=["auto", "input-plane", "origin-plane",
                                            "three-point-plane", "origin-line"])
        s.add_argument("--bias-std", type=float)
        s.add_argument("--weight-scale", type=float)
        s.add_argument("--workers", type=int)
        s.add_argument("--output-dir")
        if name == "train-count":
            s.add_argument("--epochs", type=float)
            s.add_argument("--checkpoints", help="comma-separated epochs")
            s.add_argument("--lr", type=float)
        s.set_defaults(func=lambda a, n=name: cmd_count(a, n == "init-count"))

    s = sub.add_parser("bounds", help="closed-form region counts")
    s.add_argument("--neurons", type=int)
    s.add_argument("--widths", default="32,32,32")
    s.add_argument("--n-in", default="1,2", help="comma-separated input dimensions")
    s.add_argument("--T", type=float, default=1.0)
    s.add_argument("--volume", type=float, default=1.0)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("render", help="SVG of the cell complex on a slice")
    s.add_argument("--network", help="network JSON (default: fresh random net)")
    s.add_argument("--widths", default="8,8,8,8,8")
    s.add_argument("--input-dim", type=int, default=2)
    s.add_argument("--bias-std", type=float, default=0.1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--B", type=float, default=3.0)
    s.add_argument("--line", action="store_true")
    s.add_argument("--width", type=int, default=600)
    s.add_argument("--census-json")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_render)

    s = sub.add_parser("gradcheck", help="backprop vs central differences")
    s.add_argument("--widths", default="8,8,8")
    s.add_argument("--input-dim", type=int, default=2)
    s.add_argument("--points", type=int, default=64)
    s.add_argument("--probes", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tol", type=float, default=1e-4)
    s.set_defaults(func=cmd_gradcheck)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
