import json
import subprocess
import sys

import numpy as np
import pytest

from nlglrt import files
from nlglrt.classifier import MlpModel, model_to_json
from nlglrt.cli import main
from nlglrt.config import load_config
from nlglrt.signal import synthesize_scene

FAST = """\
num_samples = 400
window_k = 16
onset = 200
max_epochs = 30
patience = 5
seeds = [0, 1]
"""


@pytest.fixture
def fast_config(tmp_path):
    p = tmp_path / "fast.toml"
    p.write_text(FAST)
    return p


def digests(capsys):
    return capsys.readouterr().out.split()[0::2]


class TestGenerate:
    def test_round_trip_is_bit_identical(self, tmp_path, fast_config):
        assert main(["generate", "--config", str(fast_config), "--out", str(tmp_path / "s")]) == 0
        back = files.read_scene(tmp_path / "s")
        fresh = synthesize_scene(load_config(fast_config).scene)
        assert back.z_linear.tobytes() == fresh.z_linear.tobytes()
        assert back.z_nonlinear.tobytes() == fresh.z_nonlinear.tobytes()
        assert back.config == fresh.config

    def test_same_seed_same_digests(self, tmp_path, fast_config, capsys):
        main(["generate", "--config", str(fast_config), "--out", str(tmp_path / "a")])
        first = digests(capsys)
        main(["generate", "--config", str(fast_config), "--out", str(tmp_path / "b")])
        assert digests(capsys) == first and len(first) == 3

    def test_seed_list(self, tmp_path, fast_config):
        main(["generate", "--config", str(fast_config), "--out", str(tmp_path), "--seeds", "4,5"])
        assert (tmp_path / "seed_4" / "scene.json").exists()
        assert (tmp_path / "seed_5" / "scene_linear.csv").exists()

    def test_window_past_onset_exit_2(self, tmp_path, capsys):
        p = tmp_path / "bad.toml"
        p.write_text("window_k = 1200\n")
        assert main(["generate", "--config", str(p), "--out", str(tmp_path)]) == 2
        assert "window_k <= onset" in capsys.readouterr().err

    @pytest.mark.parametrize(
        "text, fragment",
        [
            ("windw_k = 3\n", "windw_k"),
            ("window_k = 'x'\n", "window_k"),
            ("window_k = \n", "bad.toml"),
            ("[scene]\nwindow_k = 3\n", "scene"),
        ],
    )
    def test_config_errors_named(self, tmp_path, capsys, text, fragment):
        p = tmp_path / "bad.toml"
        p.write_text(text)
        assert main(["generate", "--config", str(p), "--out", str(tmp_path)]) == 2
        assert fragment in capsys.readouterr().err


class TestTrain:
    def test_artifacts_and_retrain(self, tmp_path, fast_config):
        assert main(["train", "--config", str(fast_config), "--out", str(tmp_path / "a")]) == 0
        main(["train", "--config", str(fast_config), "--out", str(tmp_path / "b")])
        model, cfg = files.read_model(tmp_path / "a" / "model.json")
        assert model.layer_sizes == [8, 10, 10, 10, 2]
        assert cfg.max_epochs == 30
        log = (tmp_path / "a" / "train_loss.csv").read_text().splitlines()
        assert log[0] == "epoch,loss,best_loss,status"
        assert log[-1].split(",")[-1] in ("early_stop", "max_epochs")
        assert all(row.split(",")[-1] == "" for row in log[1:-1])
        for name in ("model.json", "train_loss.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def flag_everything(path):
    model = MlpModel([np.zeros((8, 2))], [np.array([0.0, 1.0])], np.zeros(8), np.ones(8))
    path.write_text(model_to_json(model))
    return path


class TestEvaluate:
    def test_linear_modes_and_rerun(self, tmp_path, fast_config):
        args = ["evaluate", "--config", str(fast_config), "--modes", "linear,nonlinear"]
        assert main(args + ["--out", str(tmp_path / "a")]) == 0
        main(args + ["--out", str(tmp_path / "b")])
        summary = json.loads((tmp_path / "a" / "summary.json").read_text())
        assert set(summary["modes"]) == {"linear", "nonlinear"}
        for p in sorted((tmp_path / "a").iterdir()):
            assert p.read_bytes() == (tmp_path / "b" / p.name).read_bytes()

    def test_three_modes_with_model(self, tmp_path, fast_config):
        main(["train", "--config", str(fast_config), "--out", str(tmp_path / "m")])
        rc = main([
            "evaluate", "--config", str(fast_config), "--out", str(tmp_path / "r"),
            "--model", str(tmp_path / "m" / "model.json"),
            "--modes", "linear,nonlinear,nonlinear_dnn",
        ])
        assert rc == 0
        summary = json.loads((tmp_path / "r" / "summary.json").read_text())
        assert len(summary["modes"]) == 3
        assert all(0.0 <= v["auc"] <= 1.0 for v in summary["modes"].values())
        assert (tmp_path / "r" / "roc_nonlinear_dnn.csv").exists()
        assert (tmp_path / "r" / "trace_nonlinear_dnn_1.csv").exists()

    def test_missing_model_exit_4(self, tmp_path, fast_config):
        args = ["evaluate", "--config", str(fast_config), "--out", str(tmp_path)]
        assert main(args) == 4
        assert main(args + ["--model", str(tmp_path / "nope.json")]) == 4

    def test_flag_everything_exit_5(self, tmp_path, fast_config, capsys):
        model = flag_everything(tmp_path / "m.json")
        rc = main([
            "evaluate", "--config", str(fast_config), "--out", str(tmp_path / "r"),
            "--model", str(model), "--modes", "nonlinear_dnn", "--seeds", "7",
        ])
        assert rc == 5
        assert "seed 7" in capsys.readouterr().err


class TestAll:
    def test_layout(self, tmp_path, fast_config):
        assert main(["all", "--config", str(fast_config), "--out", str(tmp_path)]) == 0
        assert (tmp_path / "scene" / "scene.json").exists()
        assert (tmp_path / "model" / "model.json").exists()
        summary = json.loads((tmp_path / "report" / "summary.json").read_text())
        assert list(summary["modes"]) == ["linear", "nonlinear", "nonlinear_dnn", "linear_dnn"]


def test_module_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "nlglrt", "--help"], capture_output=True, text=True, check=True
    )
    assert "generate" in out.stdout and "evaluate" in out.stdout
