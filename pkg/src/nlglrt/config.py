"""Run configuration: one flat TOML document, every key optional.

Defaults reproduce experiment setup (a). Unknown keys and wrongly typed
values are rejected with the offending key named; TOML syntax errors carry
the parser's line/column.
"""
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .classifier import TrainConfig
from .errors import InvalidConfig
from .evaluation import MODES
from .numerics import HpdInverseOptions
from .signal import SceneConfig

# flat key -> (section, field name, type)
_SCENE_KEYS = {f.name: f.name for f in fields(SceneConfig)}
_TRAIN_KEYS = {
    "batch_size": "batch_size",
    "learning_rate": "learning_rate",
    "max_epochs": "max_epochs",
    "patience": "patience",
    "train_seed": "seed",
    "optimizer": "optimizer",
    "hidden_layers": "hidden_layers",
    "hidden_units": "hidden_units",
}
_INT_FIELDS = {
    "num_antennas", "num_samples", "window_k", "onset", "samples_per_symbol", "seed",
    "batch_size", "max_epochs", "patience", "train_seed", "hidden_layers", "hidden_units",
    "train_scene_seed", "guard",
}
_STR_FIELDS = {"optimizer", "output_dir"}
_BOOL_FIELDS = {"classifier_enabled", "loading_relative"}


@dataclass(frozen=True)
class RunConfig:
    scene: SceneConfig = field(default_factory=SceneConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    flagged_fraction: float = 0.5
    classifier_enabled: bool = True
    train_scene_seed: int = 1_000_003
    loading_epsilon: float = 1e-9
    loading_relative: bool = True
    seeds: tuple = tuple(range(20))
    guard: int = 0
    modes: tuple = MODES
    output_dir: str = "out"

    @property
    def loading(self):
        return HpdInverseOptions(self.loading_epsilon, self.loading_relative)


def _check_type(key, value):
    if key in _BOOL_FIELDS:
        ok = isinstance(value, bool)
        want = "boolean"
    elif key in _INT_FIELDS:
        ok = isinstance(value, int) and not isinstance(value, bool)
        want = "integer"
    elif key in _STR_FIELDS:
        ok = isinstance(value, str)
        want = "string"
    elif key in ("seeds", "modes"):
        return
    else:
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        want = "number"
    if not ok:
        raise InvalidConfig(f"config key {key!r}: expected {want}, got {value!r}")


def from_mapping(doc):
    """Build a ``RunConfig`` from a flat key/value mapping."""
    scene, train, top = {}, {}, {}
    top_keys = {f.name for f in fields(RunConfig)} - {"scene", "train"}
    for key, value in doc.items():
        if isinstance(value, dict):
            raise InvalidConfig(f"config key {key!r}: tables are not allowed, keep the document flat")
        _check_type(key, value)
        if key in _SCENE_KEYS:
            scene[_SCENE_KEYS[key]] = float(value) if key not in _INT_FIELDS else value
        elif key in _TRAIN_KEYS:
            train[_TRAIN_KEYS[key]] = value
        elif key in top_keys:
            top[key] = value
        else:
            raise InvalidConfig(f"unknown config key {key!r}")

    if "seeds" in top:
        top["seeds"] = _int_list("seeds", top["seeds"])
        if not top["seeds"]:
            raise InvalidConfig("config key 'seeds': must be non-empty")
    if "modes" in top:
        top["modes"] = parse_modes(top["modes"])
    ff = top.get("flagged_fraction", 0.5)
    if not 0.0 < ff < 1.0:
        raise InvalidConfig(f"config key 'flagged_fraction': require 0 < value < 1 (got {ff})")
    if top.get("guard", 0) < 0:
        raise InvalidConfig("config key 'guard': must be >= 0")
    eps = top.get("loading_epsilon", 1e-9)
    if not (eps >= 0 and math.isfinite(eps)):
        raise InvalidConfig(f"config key 'loading_epsilon': require finite value >= 0 (got {eps})")
    try:
        scene_cfg = SceneConfig(**scene)
        train_cfg = TrainConfig(**train)
    except InvalidConfig as exc:
        raise InvalidConfig(f"invalid config: {exc}") from exc
    return RunConfig(scene=scene_cfg, train=train_cfg, **top)


def _int_list(key, value):
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
        try:
            return tuple(int(v) for v in value)
        except ValueError:
            raise InvalidConfig(f"config key {key!r}: expected integers, got {value!r}") from None
    if not isinstance(value, list) or not all(
        isinstance(v, int) and not isinstance(v, bool) for v in value
    ):
        raise InvalidConfig(f"config key {key!r}: expected a list of integers, got {value!r}")
    return tuple(value)


def parse_modes(value):
    if isinstance(value, str):
        value = [v.strip() for v in value.split(",") if v.strip()]
    if not isinstance(value, (list, tuple)) or not value:
        raise InvalidConfig(f"modes: expected a non-empty list, got {value!r}")
    bad = [m for m in value if m not in MODES]
    if bad:
        raise InvalidConfig(f"modes: unknown mode(s) {bad}; expected from {list(MODES)}")
    return tuple(value)


def parse_seeds(text):
    return _int_list("seeds", text)


def load_config(path):
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise InvalidConfig(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        doc = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise InvalidConfig(f"{path}: {exc}") from exc
    try:
        return from_mapping(doc)
    except InvalidConfig as exc:
        raise InvalidConfig(f"{path}: {exc}") from exc
