"""Config-driven sweeps: grid cells x seeds x learning-rate grid, with CSV output,
per-cell tuning, and SVG plots made from the summary CSV alone."""
import csv
import itertools
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import config_from_dict
from .diagnostics import generalization_gap, norm_ratio
from .errors import Diverged, InvalidParameter
from .networks import conjugate_feature_map, init_three_layer, init_two_layer, ntk_feature_map
from .numerics import make_rng
from .targets import builtin_experiment_target, train_test_split
from .training import (LossFn, RegParams, SGDConfig, SmoothingParams, TrainLog, sgd_three_layer,
                       sgd_two_layer, train_linear_baseline)

VERSION = f"v{__version__}"
ENV_OUT = "OVERPARAM_LAB_OUT"
NETWORK_TASKS = ("fig1a-sweep-m", "fig1b-sweep-N", "fig6-tanh", "fig7-regularizer")


def output_dir(cfg, override=None):
    out = override or os.environ.get(ENV_OUT) or cfg.out or "overparam_lab_out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else v


# ---------------------------------------------------------------- single runs


@dataclass(frozen=True)
class RunSpec:
    arch: str
    variant: str
    m: int
    N: int
    seed: int
    lr: float
    wd: float
    reg24: float

    @property
    def run_id(self):
        return (f"{self.arch}-{self.variant}-m{self.m}-N{self.N}-lr{self.lr:g}"
                f"-wd{self.wd:g}-r{self.reg24:g}-s{self.seed}")

    @property
    def cell(self):
        return (self.arch, self.variant, self.m, self.N)


def build_net(arch, m, d, k, seed, dtype="float64"):
    rng = make_rng(seed, (3,))
    if arch.startswith("2layer"):
        net = init_two_layer(m, d, k, profile="experiment", rng=rng, seed=seed)
    else:
        net = init_three_layer(m, m, d, k, profile="experiment", rng=rng, seed=seed)
    return net if dtype == "float64" else net.astype(dtype)


def train_one(cfg, spec):
    """Train one (arch, cell, seed, lr, wd) combination. Returns (row, log, net)."""
    s = cfg.sgd
    target = builtin_experiment_target(cfg.data.target)
    train, test = train_test_split(cfg.data.d, spec.N, cfg.data.test_factor * spec.N, target, spec.seed,
                                   cfg.data.padding)
    sgd = SGDConfig(eta=spec.lr, mode="experiment", epochs=s.epochs, batch_size=s.batch_size,
                    momentum=s.momentum, weight_decay=spec.wd, reg24=spec.reg24, lr_drop_at=s.lr_drop_at,
                    lr_drop_factor=s.lr_drop_factor, eval_every=s.eval_every, dtype=s.dtype)
    loss = LossFn(s.loss)
    rng = make_rng(spec.seed, (2,))
    arch = spec.arch
    net = build_net(arch, spec.m, train.d, train.k, spec.seed)
    log = TrainLog()
    with np.errstate(over="ignore", invalid="ignore"):
        try:
            if arch == "2layer":
                log = sgd_two_layer(net, train, loss, sgd, rng, test)
            elif arch == "3layer":
                log = sgd_three_layer(net, train, loss, "v1", RegParams(), SmoothingParams(), sgd, rng, test)
            else:
                base = net.astype(s.dtype)
                fmap = ntk_feature_map(base) if arch.endswith("ntk") else conjugate_feature_map(base)
                log = train_linear_baseline(fmap, train, loss, sgd, rng, test)
        except Diverged:
            log.status = "diverged"
    row = dict(arch=arch, variant=spec.variant, m=spec.m, N=spec.N, seed=spec.seed, lr=spec.lr, wd=spec.wd,
               reg24=spec.reg24, status=log.status,
               train_loss=log.final_train_loss if log.status == "ok" else float("nan"),
               test_loss=log.final_test_loss if log.status == "ok" else float("nan"))
    row["gap"] = generalization_gap(log) if log.status == "ok" else float("nan")
    if arch in ("2layer", "3layer") and log.status == "ok" and np.any(net.Wdelta):
        row["norm_ratio_delta"] = norm_ratio(net.Wdelta)
        row["norm_ratio_full"] = norm_ratio(net.W)
    else:
        row["norm_ratio_delta"] = row["norm_ratio_full"] = float("nan")
    return row, log, net


def _job(args):
    cfg_dict, spec, out = args
    cfg = config_from_dict(cfg_dict)
    row, log, _ = train_one(cfg, spec)
    if out is not None:
        path = Path(out) / "runs" / f"{cfg.task}-{spec.run_id}.csv"
        _write_log(path, log, spec, cfg)
    return row


def _write_log(path, log, spec, cfg):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(TrainLog.CSV_COLUMNS) + ["config_hash", "version"])
        for r in log.rows(spec.run_id, spec.seed, spec.arch, spec.variant, spec.m, spec.N, spec.lr, spec.wd):
            w.writerow(r + [cfg.hash(), VERSION])


def _map(fn, jobs, n_jobs):
    if n_jobs <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, jobs))


# ---------------------------------------------------------------- sweeps


RUN_COLUMNS = ("task", "arch", "variant", "m", "N", "seed", "lr", "wd", "reg24", "status", "train_loss",
               "test_loss", "gap", "norm_ratio_delta", "norm_ratio_full", "config_hash", "version")
SUMMARY_COLUMNS = ("task", "arch", "variant", "m", "N", "lr", "wd", "reg24", "seeds", "n_diverged",
                   "median_test_loss", "best_test_loss", "median_train_loss", "median_gap",
                   "median_norm_ratio_delta", "median_norm_ratio_full", "config_hash", "version")


@dataclass
class SweepSummary:
    task: str
    records: list = field(default_factory=list)
    runs: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def lookup(self, arch, m=None, N=None, variant=None):
        for r in self.records:
            if r["arch"] == arch and (m is None or r["m"] == m) and (N is None or r["N"] == N) \
                    and (variant is None or r["variant"] == variant):
                return r
        raise KeyError((arch, m, N, variant))

    def median(self, arch, m=None, N=None, variant=None):
        return self.lookup(arch, m, N, variant)["median_test_loss"]

    def to_csv(self, path):
        _write_rows(path, SUMMARY_COLUMNS, self.records)

    def runs_to_csv(self, path):
        _write_rows(path, RUN_COLUMNS, self.runs)


def _write_rows(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in columns])


def read_summary(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        for key in ("m", "N", "n_diverged"):
            r[key] = int(r[key])
        for key in ("lr", "wd", "reg24", "median_test_loss", "best_test_loss", "median_train_loss", "median_gap",
                    "median_norm_ratio_delta", "median_norm_ratio_full"):
            r[key] = float(r[key])
    return rows


def _cells(cfg):
    if cfg.task == "fig7-regularizer":
        variants = [("wd", wd, 0.0) for wd in cfg.sgd.wd_grid] + [("reg24", 0.0, r) for r in cfg.sgd.reg24_grid if r > 0]
        archs = ["3layer"]
    else:
        variants = [("-", wd, 0.0) for wd in cfg.sgd.wd_grid]
        archs = cfg.archs
    cells = []
    for arch, m, N in itertools.product(archs, cfg.data.m, cfg.data.N):
        names = sorted({v[0] for v in variants})
        for name in names:
            grid = [(lr, wd, r) for (vn, wd, r) in variants if vn == name for lr in cfg.lr_values(arch)]
            cells.append(((arch, name, m, N), grid))
    return cells


def _median(vals):
    vals = [v for v in vals if np.isfinite(v)]
    return float(np.median(vals)) if vals else float("nan")


def _summarize(cfg, cell, rows):
    arch, variant, m, N = cell
    ok = [r for r in rows if r["status"] == "ok"]
    first = rows[0]
    return dict(task=cfg.task, arch=arch, variant=variant, m=m, N=N, lr=first["lr"], wd=first["wd"],
                reg24=first["reg24"], seeds=";".join(str(r["seed"]) for r in rows),
                n_diverged=len(rows) - len(ok),
                median_test_loss=_median([r["test_loss"] for r in ok]),
                best_test_loss=min([r["test_loss"] for r in ok], default=float("nan")),
                median_train_loss=_median([r["train_loss"] for r in ok]),
                median_gap=_median([r["gap"] for r in ok]),
                median_norm_ratio_delta=_median([r["norm_ratio_delta"] for r in ok]),
                median_norm_ratio_full=_median([r["norm_ratio_full"] for r in ok]),
                config_hash=cfg.hash(), version=VERSION)


def _pick(grid_rows):
    """Index of the grid point with the lowest median test loss; diverged runs excluded."""
    best, best_val = None, np.inf
    for i, rows in enumerate(grid_rows):
        val = _median([r["test_loss"] for r in rows if r["status"] == "ok"])
        if np.isfinite(val) and val < best_val:
            best, best_val = i, val
    return best


def run_sweep(cfg, out=None, jobs=1):
    """Train every cell of a network task and tune its (lr, wd) by test loss.

    Writes ``<task>_runs.csv`` (every run), ``<task>_summary.csv`` (one row per
    cell at the selected grid point), ``<task>_meta.json``, and one TrainLog
    CSV per run under ``runs/``. Returns a :class:`SweepSummary`.
    """
    if cfg.task not in NETWORK_TASKS:
        raise InvalidParameter(f"{cfg.task} is not a training sweep; use run_verification")
    outdir = output_dir(cfg, out)
    cfg_dict = cfg.to_dict()
    cells = _cells(cfg)
    seeds = list(cfg.seeds)
    rule = cfg.tuning.rule
    stage1_seeds = seeds[:1] if rule == "screen-first-seed" else seeds

    def specs(cell, grid_pts, ss):
        arch, variant, m, N = cell
        return [RunSpec(arch, variant, m, N, s, lr, wd, r) for (lr, wd, r) in grid_pts for s in ss]

    stage1 = [(cell, specs(cell, grid, stage1_seeds)) for cell, grid in cells]
    flat = [sp for _, sps in stage1 for sp in sps]
    rows = _map(_job, [(cfg_dict, sp, str(outdir)) for sp in flat], jobs)
    by_spec = dict(zip(flat, rows))

    chosen = {}
    for (cell, grid), (_, sps) in zip(cells, stage1):
        grid_rows = [[by_spec[sp] for sp in sps if (sp.lr, sp.wd, sp.reg24) == g] for g in grid]
        chosen[cell] = _pick(grid_rows)

    stage2 = []
    if rule == "screen-first-seed" and len(seeds) > 1:
        for cell, grid in cells:
            if chosen[cell] is not None:
                stage2.extend(specs(cell, [grid[chosen[cell]]], seeds[1:]))
        rows2 = _map(_job, [(cfg_dict, sp, str(outdir)) for sp in stage2], jobs)
        by_spec.update(zip(stage2, rows2))

    summary = SweepSummary(cfg.task)
    for cell, grid in cells:
        if chosen[cell] is None:
            lr, wd, r = grid[0]
            arch, variant, m, N = cell
            summary.records.append(dict(task=cfg.task, arch=arch, variant=variant, m=m, N=N, lr=lr, wd=wd, reg24=r,
                                        seeds="", n_diverged=len(stage1_seeds) * len(grid),
                                        median_test_loss=float("nan"), best_test_loss=float("nan"),
                                        median_train_loss=float("nan"), median_gap=float("nan"),
                                        median_norm_ratio_delta=float("nan"), median_norm_ratio_full=float("nan"),
                                        config_hash=cfg.hash(), version=VERSION))
            continue
        g = grid[chosen[cell]]
        sel = [by_spec[sp] for sp in specs(cell, [g], seeds)]
        summary.records.append(_summarize(cfg, cell, sel))

    order = {sp: i for i, sp in enumerate(flat + stage2)}
    for sp in sorted(by_spec, key=order.get):
        r = dict(by_spec[sp], task=cfg.task, config_hash=cfg.hash(), version=VERSION)
        summary.runs.append(r)
    summary.meta = {
        "task": cfg.task,
        "selection_rule": f"{rule}: lowest median final test loss over seeds; diverged runs excluded",
        "test_set": f"fresh {cfg.data.test_factor}*N samples per seed",
        "config_hash": cfg.hash(),
        "version": VERSION,
        "config": cfg_dict,
    }
    summary.runs_to_csv(outdir / f"{cfg.task}_runs.csv")
    summary.to_csv(outdir / f"{cfg.task}_summary.csv")
    with open(outdir / f"{cfg.task}_meta.json", "w") as fh:
        json.dump(summary.meta, fh, indent=2, sort_keys=True, default=str)
    return summary


# ---------------------------------------------------------------- plots


def emit_plots(summary_csv, out_dir=None):
    """One SVG per figure-style task in ``summary_csv``; output is a pure function of the CSV."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = read_summary(summary_csv)
    if not rows:
        raise InvalidParameter("summary is empty")
    out_dir = Path(out_dir or Path(summary_csv).parent)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    with matplotlib.rc_context({"svg.hashsalt": "overparam-lab", "svg.fonttype": "none"}):
        tasks = sorted({r["task"] for r in rows})
        for task in tasks:
            tr = [r for r in rows if r["task"] == task]
            xkey = "N" if task == "fig1b-sweep-N" else "m"
            plots = [("median_test_loss", "test loss")]
            if task == "fig7-regularizer":
                plots.append(("median_norm_ratio_delta", "norm ratio of W'"))
            for key, label in plots:
                fig, ax = plt.subplots(figsize=(5, 3.5))
                curves = sorted({(r["arch"], r["variant"]) for r in tr})
                for arch, variant in curves:
                    pts = sorted((r[xkey], r[key]) for r in tr if r["arch"] == arch and r["variant"] == variant)
                    name = arch if variant == "-" else f"{arch} ({variant})"
                    ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=name)
                xs = sorted({r[xkey] for r in tr})
                ax.set_xscale("log")
                ax.set_xticks(xs)
                ax.set_xticklabels([str(x) for x in xs])
                ax.minorticks_off()
                ax.set_xlabel(xkey)
                ax.set_ylabel(label)
                ax.set_title(task)
                ax.legend(fontsize=7)
                fig.tight_layout()
                suffix = "" if key == "median_test_loss" else "_ratio"
                path = out_dir / f"{task}{suffix}.svg"
                fig.savefig(path, format="svg", metadata={"Date": None})
                plt.close(fig)
                paths.append(path)
    return paths
