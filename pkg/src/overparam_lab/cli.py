"""Command line entry point: ``overparam-lab {train,sweep,verify,plot}``."""
import argparse
import json
import sys
from pathlib import Path

from .config import ExperimentConfig, load_config
from .errors import InvalidParameter
from .harness import (ENV_OUT, RunSpec, _write_log, emit_plots, output_dir, run_sweep, train_one)
from .networks import save_checkpoint
from .verify import SUITES, run_verification


def _config(args):
    cfg = load_config(args.config) if args.config else ExperimentConfig().validate()
    if getattr(args, "paper_scale", False):
        cfg = cfg.paper_scale()
    if getattr(args, "seed", None) is not None:
        cfg.seeds = [args.seed]
    return cfg


def cmd_train(args):
    """Train the first arch / grid cell / learning rate of the config and save a checkpoint."""
    cfg = _config(args)
    out = output_dir(cfg, args.out)
    arch = cfg.archs[0]
    spec = RunSpec(arch, "-", cfg.data.m[0], cfg.data.N[0], cfg.seeds[0], cfg.lr_values(arch)[0],
                   cfg.sgd.wd_grid[0], cfg.sgd.reg24_grid[0])
    row, log, net = train_one(cfg, spec)
    _write_log(out / f"train-{spec.run_id}.csv", log, spec, cfg)
    save_checkpoint(net, out / f"train-{spec.run_id}.npz")
    print(json.dumps(row, default=float))
    return 0 if row["status"] == "ok" else 1


def cmd_sweep(args):
    cfg = _config(args)
    summary = run_sweep(cfg, out=args.out, jobs=args.jobs)
    for r in summary.records:
        print(f"{r['arch']:12s} {r['variant']:6s} m={r['m']:<6d} N={r['N']:<6d} lr={r['lr']:<8g} "
              f"median test {r['median_test_loss']:.4f}")
    return 0


def cmd_verify(args):
    out = output_dir(ExperimentConfig(), args.out)
    report, ok = run_verification(args.suite, seed=args.seed or 0, out=out)
    print(f"{args.suite}: {'PASS' if ok else 'FAIL'}  ({out / ('verify_' + args.suite + '.json')})")
    return 0 if ok else 1


def cmd_plot(args):
    cfg = _config(args)
    out = output_dir(cfg, args.out)
    summaries = sorted(Path(out).glob("*_summary.csv"))
    if not summaries:
        raise InvalidParameter(f"no *_summary.csv in {out}; run a sweep first")
    for path in summaries:
        for svg in emit_plots(path, out):
            print(svg)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="overparam-lab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--config", help="YAML experiment config")
        p.add_argument("--out", help=f"output directory (default: ${ENV_OUT} or ./overparam_lab_out)")
        if seed:
            p.add_argument("--seed", type=int, help="override the config seeds with one seed")

    p = sub.add_parser("train", help="train one network from a config")
    common(p)
    p.add_argument("--paper-scale", action="store_true", help="800 epochs and the full lr/wd grid")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep", help="run a grid sweep")
    common(p)
    p.add_argument("--jobs", type=int, default=1, help="parallel runs")
    p.add_argument("--paper-scale", action="store_true", help="800 epochs and the full lr/wd grid")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run a property suite")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--out")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("plot", help="SVG plots from sweep summaries in the output directory")
    common(p, seed=False)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvalidParameter as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
