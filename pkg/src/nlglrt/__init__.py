"""Covariance-ratio signal-onset detection with a distortion-classifier front end."""
from ._backend import BACKEND
from .classifier import (
    EditResult,
    LabeledSampleSet,
    MlpModel,
    TrainConfig,
    classify_and_edit,
    mlp_forward,
    mlp_gradient,
    mlp_train,
)
from .detector import DetectionTrace, PartitionPair, glrt_statistic, sliding_trace
from .evaluation import RocCurve, label_indices, roc_from_traces, run_experiment, run_pipeline
from .numerics import HpdInverseOptions
from .signal import Scene, SceneConfig, apply_nonlinearity, steering_vector, synthesize_scene

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DetectionTrace",
    "EditResult",
    "HpdInverseOptions",
    "LabeledSampleSet",
    "MlpModel",
    "PartitionPair",
    "RocCurve",
    "Scene",
    "SceneConfig",
    "TrainConfig",
    "apply_nonlinearity",
    "classify_and_edit",
    "glrt_statistic",
    "label_indices",
    "mlp_forward",
    "mlp_gradient",
    "mlp_train",
    "roc_from_traces",
    "run_experiment",
    "run_pipeline",
    "sliding_trace",
    "steering_vector",
    "synthesize_scene",
]
