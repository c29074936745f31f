"""On-disk formats: scene CSV pair + JSON sidecar, model JSON, training log.

All numbers are written with ``repr`` (shortest round-trip form) and LF line
endings so a reload is bit-identical and digests are stable.
"""
import hashlib
import json
from pathlib import Path

import numpy as np

from .classifier import model_from_json, model_to_json
from .errors import InvalidConfig, MissingArtifact
from .signal import Scene, SceneConfig

SCENE_SCHEMA = "nlglrt.scene/1"
SCENE_FILES = {"linear": "scene_linear.csv", "nonlinear": "scene_nonlinear.csv"}


def sha256_file(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def matrix_to_csv(z):
    """One row per antenna: ``re_0,im_0,re_1,im_1,...``."""
    rows = []
    for row in np.asarray(z, dtype=np.complex128):
        rows.append(",".join(f"{v.real!r},{v.imag!r}" for v in row.tolist()))
    return "\n".join(rows) + "\n"


def matrix_from_csv(text):
    rows = [line for line in text.split("\n") if line]
    data = np.array([[float(v) for v in line.split(",")] for line in rows], dtype=np.float64)
    if data.ndim != 2 or data.shape[1] % 2:
        raise InvalidConfig("scene CSV rows must hold interleaved (real, imag) pairs")
    return data[:, 0::2] + 1j * data[:, 1::2]


def write_scene(scene, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for key, z in (("linear", scene.z_linear), ("nonlinear", scene.z_nonlinear)):
        p = out / SCENE_FILES[key]
        p.write_text(matrix_to_csv(z), newline="\n")
        paths.append(p)
    sidecar = {"schema": SCENE_SCHEMA, "config": scene.config.to_dict(), "files": SCENE_FILES}
    p = out / "scene.json"
    p.write_text(json.dumps(sidecar, indent=2) + "\n", newline="\n")
    paths.append(p)
    return paths


def read_scene(in_dir):
    base = Path(in_dir)
    try:
        sidecar = json.loads((base / "scene.json").read_text())
    except FileNotFoundError as exc:
        raise MissingArtifact(f"no scene.json in {base}") from exc
    if sidecar.get("schema") != SCENE_SCHEMA:
        raise InvalidConfig(f"unsupported scene schema {sidecar.get('schema')!r}")
    cfg = SceneConfig.from_dict(sidecar["config"])
    files = sidecar.get("files", SCENE_FILES)
    z_lin = matrix_from_csv((base / files["linear"]).read_text())
    z_nl = matrix_from_csv((base / files["nonlinear"]).read_text())
    return Scene(
        z_linear=z_lin,
        z_nonlinear=z_nl,
        soi_active_mask=np.arange(cfg.num_samples) >= cfg.onset,
        config=cfg,
    )


def write_model(model, train_cfg, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model_to_json(model, train_cfg), newline="\n")
    return path


def read_model(path):
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError as exc:
        raise MissingArtifact(f"model file {path} does not exist") from exc
    return model_from_json(text)


def loss_log_csv(result):
    """``epoch,loss,best_loss,status``; the last row says why training stopped."""
    lines = ["epoch,loss,best_loss,status"]
    last = len(result.losses)
    for epoch, (loss, best) in enumerate(zip(result.losses, result.best_losses), start=1):
        status = ""
        if epoch == last:
            status = "early_stop" if result.early_stopped else "max_epochs"
        lines.append(f"{epoch},{loss!r},{best!r},{status}")
    return "\n".join(lines) + "\n"
