import json
import math

import numpy as np
import pytest
import yaml

from overparam_lab.cli import main
from overparam_lab.config import ExperimentConfig, config_from_dict, load_config
from overparam_lab.errors import InvalidParameter
from overparam_lab.harness import RUN_COLUMNS, SUMMARY_COLUMNS, emit_plots, read_summary, run_sweep
from overparam_lab.networks import load_checkpoint
from overparam_lab.training import TrainLog

TINY = {
    "task": "fig1a-sweep-m",
    "archs": ["2layer", "2layer-last", "2layer-ntk", "3layer", "3layer-last", "3layer-ntk"],
    "seeds": [0, 1],
    "data": {"target": "sin-fig1", "d": 4, "m": [8, 16], "N": [40]},
    "sgd": {"epochs": 2, "eval_every": 1, "lr_grid": [0.01, 0.001], "dtype": "float64"},
}


def _files(d):
    return {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}


@pytest.fixture(scope="module")
def tiny_sweep(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep")
    summary = run_sweep(config_from_dict(TINY), out=out)
    return out, summary


class TestConfig:
    def test_defaults_and_grid(self):
        cfg = ExperimentConfig().validate()
        assert cfg.sgd.epochs == 200
        assert cfg.lr_values("3layer") == [0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001,
                                           0.0005, 0.0002, 0.0001]

    @pytest.mark.parametrize("raw", [
        {"tasks": "fig1a-sweep-m"},
        {"sgd": {"epoch": 3}},
        {"task": "fig2"},
        {"archs": ["4layer"]},
        {"seeds": []},
        {"data": {"m": []}},
        {"sgd": {"dtype": "float16"}},
    ])
    def test_strict(self, raw):
        with pytest.raises(InvalidParameter):
            config_from_dict(raw)

    def test_paper_scale(self):
        cfg = config_from_dict(TINY).paper_scale()
        assert cfg.sgd.epochs == 800 and cfg.tuning.rule == "full"
        assert len(cfg.lr_values("2layer")) == 12 and len(cfg.sgd.wd_grid) > 1

    def test_hash_ignores_out(self, tmp_path):
        a = config_from_dict(dict(TINY, out="a"))
        b = config_from_dict(dict(TINY, out="b"))
        assert a.hash() == b.hash()
        assert a.hash() != config_from_dict(dict(TINY, seeds=[5])).hash()

    def test_shipped_configs_load(self):
        from pathlib import Path

        for path in sorted((Path(__file__).parents[1] / "configs").glob("*.yaml")):
            load_config(path)


class TestSweep:
    def test_outputs(self, tiny_sweep):
        out, summary = tiny_sweep
        assert len(summary.records) == 6 * 2
        lines = (out / "fig1a-sweep-m_summary.csv").read_text().splitlines()
        assert lines[0] == ",".join(SUMMARY_COLUMNS)
        runs = (out / "fig1a-sweep-m_runs.csv").read_text().splitlines()
        assert runs[0] == ",".join(RUN_COLUMNS)
        for r in summary.runs:
            assert r["config_hash"] == config_from_dict(TINY).hash()
            assert r["version"].startswith("v")
        logs = sorted((out / "runs").glob("*.csv"))
        head = logs[0].read_text().splitlines()[0]
        assert head == ",".join(list(TrainLog.CSV_COLUMNS) + ["config_hash", "version"])
        meta = json.loads((out / "fig1a-sweep-m_meta.json").read_text())
        assert "lowest median" in meta["selection_rule"]

    def test_gaps_finite(self, tiny_sweep):
        _, summary = tiny_sweep
        for r in summary.runs:
            if r["status"] == "ok":
                assert math.isfinite(r["gap"])

    def test_bytewise_deterministic(self, tiny_sweep, tmp_path):
        out, _ = tiny_sweep
        run_sweep(config_from_dict(TINY), out=tmp_path / "again", jobs=2)
        a, b = _files(out), _files(tmp_path / "again")
        a = {k: v for k, v in a.items() if k.endswith((".csv", ".json"))}
        b = {k: v for k, v in b.items() if k.endswith((".csv", ".json"))}
        assert a == b

    def test_diverged_excluded(self, tmp_path):
        raw = dict(TINY, archs=["2layer-last"], seeds=[0], sgd={"epochs": 40, "lr_grid": [1e4, 0.01], "dtype": "float64"})
        raw["data"] = {"m": [8], "N": [40]}
        summary = run_sweep(config_from_dict(raw), out=tmp_path)
        assert [r["status"] for r in summary.runs] == ["diverged", "ok"]
        assert summary.lookup("2layer-last")["lr"] == 0.01
        assert summary.lookup("2layer-last")["n_diverged"] == 0

    def test_fig7_ratio_curves(self, tmp_path):
        raw = {"task": "fig7-regularizer", "archs": ["3layer"], "seeds": [0],
               "data": {"m": [8, 16], "N": [40]},
               "sgd": {"epochs": 2, "lr_grid": [0.01], "wd_grid": [0.001], "reg24_grid": [0.01], "dtype": "float64"}}
        summary = run_sweep(config_from_dict(raw), out=tmp_path)
        assert sorted({r["variant"] for r in summary.records}) == ["reg24", "wd"]
        for r in summary.records:
            assert 1.0 <= r["median_norm_ratio_delta"] <= r["m"]
        paths = emit_plots(tmp_path / "fig7-regularizer_summary.csv")
        assert sorted(p.name for p in paths) == ["fig7-regularizer.svg", "fig7-regularizer_ratio.svg"]

    def test_rejects_verification_task(self):
        with pytest.raises(InvalidParameter):
            run_sweep(config_from_dict({"task": "coupling-suite"}))


class TestPlots:
    def test_byte_identical(self, tiny_sweep, tmp_path):
        out, _ = tiny_sweep
        p1 = emit_plots(out / "fig1a-sweep-m_summary.csv", tmp_path / "a")
        p2 = emit_plots(out / "fig1a-sweep-m_summary.csv", tmp_path / "b")
        assert [p.read_bytes() for p in p1] == [p.read_bytes() for p in p2]
        svg = p1[0].read_text()
        for arch in TINY["archs"]:
            assert arch in svg
        assert ">8<" in svg and ">16<" in svg

    def test_empty(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text(",".join(SUMMARY_COLUMNS) + "\n")
        with pytest.raises(InvalidParameter):
            emit_plots(path)


class TestCli:
    def _cfg(self, tmp_path, raw=TINY):
        path = tmp_path / "c.yaml"
        path.write_text(yaml.safe_dump(raw))
        return str(path)

    def test_train_and_env_out(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("OVERPARAM_LAB_OUT", str(tmp_path / "env"))
        assert main(["train", "--config", self._cfg(tmp_path), "--seed", "3"]) == 0
        row = json.loads(capsys.readouterr().out)
        assert row["seed"] == 3 and row["arch"] == "2layer"
        ckpt = sorted((tmp_path / "env").glob("train-*.npz"))
        assert len(ckpt) == 1 and load_checkpoint(ckpt[0]).m == 8

    def test_sweep_and_plot(self, tmp_path, capsys):
        raw = dict(TINY, archs=["2layer", "3layer"], seeds=[0])
        cfg = self._cfg(tmp_path, raw)
        assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "o"), "--jobs", "1"]) == 0
        assert main(["plot", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
        assert (tmp_path / "o" / "fig1a-sweep-m.svg").exists()
        rows = read_summary(tmp_path / "o" / "fig1a-sweep-m_summary.csv")
        assert {r["arch"] for r in rows} == {"2layer", "3layer"}

    def test_verify(self, tmp_path):
        assert main(["verify", "ratio", "--out", str(tmp_path)]) == 0
        rep = json.loads((tmp_path / "verify_ratio.json").read_text())
        assert rep["ok"] is True

    def test_usage_errors(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            main(["verify", "nonsense"])
        assert err.value.code == 2
        bad = self._cfg(tmp_path, {"task": "fig1a-sweep-m", "colour": "red"})
        assert main(["sweep", "--config", bad, "--out", str(tmp_path)]) == 2
        assert main(["plot", "--out", str(tmp_path / "nothing")]) == 2
