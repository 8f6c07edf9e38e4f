"""YAML experiment configs. Unknown keys are errors.

Example::

    task: fig1a-sweep-m
    archs: [2layer, 2layer-last, 3layer, 3layer-last, 3layer-ntk]
    seeds: [0, 1, 2]
    data:
      target: sin-fig1
      d: 4
      m: [100, 2000]
      N: [1000]
    sgd:
      epochs: 200
      lr_grid: [0.1, 0.01]
    out: results/fig1a

Sections and defaults are the dataclasses below; ``docs/config.md`` lists
them with descriptions.
"""
import copy
import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

import yaml

from .errors import InvalidParameter

TASKS = ("fig1a-sweep-m", "fig1b-sweep-N", "fig6-tanh", "fig7-regularizer", "coupling-suite", "construct-suite")
ARCHS = ("2layer", "2layer-last", "2layer-ntk", "3layer", "3layer-last", "3layer-ntk")


@dataclass
class DataSection:
    target: str = "sin-fig1"
    d: int = 4
    m: list = field(default_factory=lambda: [2000])
    N: list = field(default_factory=lambda: [1000])
    test_factor: int = 10
    padding: str = "raw"


@dataclass
class SGDSection:
    epochs: int = 200
    batch_size: int = 50
    momentum: float = 0.9
    lr_grid: list = None
    lr_k: list = field(default_factory=lambda: [1, 2, 3, 4])
    lr_grid_by_arch: dict = field(default_factory=dict)
    wd_grid: list = field(default_factory=lambda: [0.0])
    reg24_grid: list = field(default_factory=lambda: [0.0])
    lr_drop_at: float = 0.5
    lr_drop_factor: float = 10.0
    eval_every: int = 10
    dtype: str = "float32"
    loss: str = "squared"


@dataclass
class TuningSection:
    # screen-first-seed: tune on the first seed, rerun the rest at the winner
    # full: every seed at every grid point, winner by median
    rule: str = "screen-first-seed"


@dataclass
class CouplingSection:
    widths: list = field(default_factory=lambda: [1000, 4000, 16000])
    tau_w: float = 0.02
    m2: int = 16
    seeds: int = 20
    perturbation: str = "worst"


@dataclass
class ConstructSection:
    activations: list = field(default_factory=lambda: ["sin3", "cos7"])
    eps: float = 0.05
    samples: int = 1_000_000
    grid_points: int = 21
    wstar_m: int = 200_000
    wstar_eps_a: float = 0.1
    wstar_inputs: int = 2000


@dataclass
class ExperimentConfig:
    task: str = "fig1a-sweep-m"
    archs: list = field(default_factory=lambda: ["2layer", "3layer"])
    seeds: list = field(default_factory=lambda: [0, 1, 2])
    data: DataSection = field(default_factory=DataSection)
    sgd: SGDSection = field(default_factory=SGDSection)
    tuning: TuningSection = field(default_factory=TuningSection)
    coupling: CouplingSection = field(default_factory=CouplingSection)
    construct: ConstructSection = field(default_factory=ConstructSection)
    out: str = None

    def validate(self):
        if self.task not in TASKS:
            raise InvalidParameter(f"unknown task {self.task!r}; choose from {TASKS}")
        bad = [a for a in self.archs if a not in ARCHS]
        if bad:
            raise InvalidParameter(f"unknown archs {bad}; choose from {ARCHS}")
        if not self.seeds:
            raise InvalidParameter("need at least one seed")
        if not self.data.m or not self.data.N:
            raise InvalidParameter("grid must be nonempty")
        if self.tuning.rule not in ("screen-first-seed", "full"):
            raise InvalidParameter(f"unknown tuning rule {self.tuning.rule!r}")
        if self.sgd.dtype not in ("float32", "float64"):
            raise InvalidParameter("dtype must be float32 or float64")
        return self

    def lr_values(self, arch):
        if arch in self.sgd.lr_grid_by_arch:
            return list(self.sgd.lr_grid_by_arch[arch])
        if self.sgd.lr_grid:
            return list(self.sgd.lr_grid)
        vals = {round(c * 10.0 ** (-k), 12) for k in self.sgd.lr_k for c in (1, 2, 5)}
        return sorted(vals, reverse=True)

    def to_dict(self):
        return dataclasses.asdict(self)

    def hash(self):
        """Short digest of everything except the output directory."""
        d = self.to_dict()
        d.pop("out", None)
        text = json.dumps(d, sort_keys=True, default=str)
        return hashlib.sha256(text.encode()).hexdigest()[:12]

    def paper_scale(self):
        """800 epochs, the full lr grid k = 1..4 with weight decay, every seed at every grid point."""
        c = copy.deepcopy(self)
        c.sgd.epochs = 800
        c.sgd.lr_grid = None
        c.sgd.lr_grid_by_arch = {}
        c.sgd.lr_k = [1, 2, 3, 4]
        if c.sgd.wd_grid == [0.0]:
            c.sgd.wd_grid = [0.0, 1e-4, 5e-4, 1e-3]
        c.tuning.rule = "full"
        return c


_SECTIONS = {"data": DataSection, "sgd": SGDSection, "tuning": TuningSection,
             "coupling": CouplingSection, "construct": ConstructSection}


def _build(cls, raw, where):
    if not isinstance(raw, dict):
        raise InvalidParameter(f"{where}: expected a mapping")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(raw) - names)
    if unknown:
        raise InvalidParameter(f"{where}: unknown keys {unknown}")
    kwargs = {}
    for key, val in raw.items():
        if key in _SECTIONS and cls is ExperimentConfig:
            val = _build(_SECTIONS[key], val or {}, key)
        kwargs[key] = val
    return cls(**kwargs)


def config_from_dict(raw):
    return _build(ExperimentConfig, raw or {}, "config").validate()


def load_config(path):
    with open(path) as fh:
        return config_from_dict(yaml.safe_load(fh))


def dump_config(cfg, path):
    with open(path, "w") as fh:
        yaml.safe_dump(cfg.to_dict(), fh, sort_keys=False)
