"""Monte-Carlo detection experiments and ROC analysis.

Index labelling
---------------
An evaluation index is positive when its ``Z_new`` window has reached the SOI
onset while ``Z_old`` has not gone past it (both widened by ``guard``
samples). On an unedited stream that is exactly the original times
``[T0 - guard, T0 + k + guard]`` of the last ``Z_new`` sample. On an edited
stream the window extents are mapped back through the kept-index table, so a
window of ``k`` kept samples is judged by what it actually contains.
"""
import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .classifier import TrainConfig, build_labeled_set, classify_and_edit, mlp_train, model_to_json
from .detector import sliding_trace
from .errors import DegenerateLabels, InsufficientSamples, OnsetOutOfRange
from .numerics import PIPELINE_LOADING
from .signal import synthesize_scene

MODES = ("linear", "nonlinear", "nonlinear_dnn", "linear_dnn")
REPORT_SCHEMA = "nlglrt.report/1"


def original_times(trace, kept_indices=None):
    """Original time of the last ``Z_new`` sample for every index."""
    if kept_indices is None:
        return trace.index_map.copy()
    return np.asarray(kept_indices)[trace.index_map]


def label_indices(trace, onset, k=None, guard=0, kept_indices=None):
    """Boolean positives per evaluation index (see module docstring)."""
    k = trace.window_k if k is None else k
    kept = np.arange(trace.index_map[-1] + 1) if kept_indices is None else np.asarray(kept_indices)
    new_last = kept[trace.index_map]
    old_last = kept[trace.index_map - k]
    positive = (new_last >= onset - guard) & (old_last <= onset + guard)
    if not positive.any():
        raise OnsetOutOfRange(
            f"onset {onset} is outside the evaluable range "
            f"[{new_last[0]}, {new_last[-1]}] of this trace"
        )
    return positive


@dataclass(frozen=True)
class RocCurve:
    """Threshold sweep; point ``i`` flags every index with ``stat >= gammas[i]``.

    The first point is ``gamma = +inf`` at (0, 0); the last is the smallest
    statistic at (1, 1).
    """

    gammas: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float

    @property
    def points(self):
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))


def roc_from_scores(scores, labels):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabels(f"need positives and negatives, got {n_pos} and {n_neg}")
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    lab = labels[order]
    tp = np.cumsum(lab)
    fp = np.cumsum(~lab)
    # last position of each run of equal scores
    ends = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    fpr = np.r_[0.0, fp[ends] / n_neg]
    tpr = np.r_[0.0, tp[ends] / n_pos]
    gammas = np.r_[np.inf, s[ends]]
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))
    return RocCurve(gammas=gammas, fpr=fpr, tpr=tpr, auc=auc)


def roc_from_traces(traces):
    """Pooled ROC over ``[(trace_or_stats, labels), ...]``."""
    scores, labels = [], []
    for tr, lab in traces:
        stat = getattr(tr, "stat", tr)
        scores.append(np.asarray(stat, dtype=np.float64))
        labels.append(np.asarray(lab, dtype=bool))
    return roc_from_scores(np.concatenate(scores), np.concatenate(labels))


@dataclass(frozen=True)
class Trial:
    seed: int
    trace: object
    kept_indices: np.ndarray
    labels: np.ndarray
    peak_time: int

    @property
    def original_times(self):
        return self.kept_indices[self.trace.index_map]


@dataclass
class PipelineResult:
    mode: str
    trials: list
    roc: RocCurve
    peak_hit_rate: float


@dataclass
class ExperimentReport:
    config: object
    seeds: list
    results: dict = field(default_factory=dict)
    config_digest: str = ""

    def aucs(self):
        return {mode: res.roc.auc for mode, res in self.results.items()}


def _select_stream(scene, mode, model):
    z = scene.z_linear if mode.startswith("linear") else scene.z_nonlinear
    if mode.endswith("_dnn"):
        edit = classify_and_edit(z, model)
        return edit.edited, edit.kept_indices
    return z, np.arange(z.shape[1])


def run_trial(config, mode, seed, model=None, opts=PIPELINE_LOADING, guard=0):
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    if mode.endswith("_dnn") and model is None:
        raise ValueError(f"mode {mode!r} needs a trained model")
    scene = synthesize_scene(replace(config, seed=seed))
    z, kept = _select_stream(scene, mode, model)
    k = config.window_k
    if z.shape[1] < 2 * k:
        raise InsufficientSamples(
            f"seed {seed}: {z.shape[1]} samples kept, need at least 2k={2 * k}", seed=seed
        )
    trace = sliding_trace(z, k, opts)
    labels = label_indices(trace, config.onset, k, guard, kept)
    peak = int(kept[trace.index_map[int(np.argmax(trace.stat))]])
    return Trial(seed=seed, trace=trace, kept_indices=kept, labels=labels, peak_time=peak)


def train_classifier(config, train_cfg=TrainConfig(), flagged_fraction=0.5, scene_seed=1_000_003):
    """Fit the distortion classifier on one dedicated training scene.

    ``scene_seed`` should differ from every evaluation seed.
    """
    scene = synthesize_scene(replace(config, seed=scene_seed))
    data = build_labeled_set(scene.z_linear, scene.z_nonlinear, flagged_fraction)
    return mlp_train(data, train_cfg)


def _threads():
    try:
        return max(1, int(os.environ.get("NLGLRT_THREADS", "1")))
    except ValueError:
        return 1


def run_pipeline(config, mode, seeds, model=None, opts=PIPELINE_LOADING, guard=0):
    """Run one pipeline over ``seeds``; trials come back in seed order."""
    seeds = [int(s) for s in seeds]
    workers = min(_threads(), len(seeds))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            trials = list(pool.map(lambda s: run_trial(config, mode, s, model, opts, guard), seeds))
    else:
        trials = [run_trial(config, mode, s, model, opts, guard) for s in seeds]
    roc = roc_from_traces([(t.trace, t.labels) for t in trials])
    # a hit is a peak at a positively labelled index; unedited that is [T0, T0+k]
    hits = sum(bool(t.labels[int(np.argmax(t.trace.stat))]) for t in trials)
    return PipelineResult(mode=mode, trials=trials, roc=roc, peak_hit_rate=hits / len(trials))


def config_digest(config, opts=PIPELINE_LOADING, guard=0, model=None):
    """SHA-256 over everything except the seed that shapes a report."""
    scene = config.to_dict()
    scene.pop("seed")
    doc = {
        "scene": scene,
        "loading_epsilon": opts.loading_epsilon,
        "loading_relative": opts.relative,
        "guard": guard,
        "model_sha256": hashlib.sha256(model_to_json(model).encode()).hexdigest() if model else None,
    }
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()


def run_experiment(config, modes, seeds, model=None, opts=PIPELINE_LOADING, guard=0):
    seeds = [int(s) for s in seeds]
    report = ExperimentReport(
        config=config, seeds=seeds, config_digest=config_digest(config, opts, guard, model)
    )
    for mode in modes:
        report.results[mode] = run_pipeline(config, mode, seeds, model, opts, guard)
    return report


def _fmt(x):
    return repr(float(x))


def trace_csv(trial):
    lines = ["edited_index,original_time,statistic"]
    for idx, t, v in zip(trial.trace.index_map, trial.original_times, trial.trace.stat):
        lines.append(f"{int(idx)},{int(t)},{_fmt(v)}")
    return "\n".join(lines) + "\n"


def roc_csv(roc):
    lines = ["gamma,fpr,tpr"]
    for g, f, t in zip(roc.gammas, roc.fpr, roc.tpr):
        lines.append(f"{_fmt(g)},{_fmt(f)},{_fmt(t)}")
    return "\n".join(lines) + "\n"


def summary_dict(report):
    modes = {}
    for mode, res in report.results.items():
        modes[mode] = {
            "auc": res.roc.auc,
            "peak_hit_rate": res.peak_hit_rate,
            "peak_times": [t.peak_time for t in res.trials],
            "kept_samples": [int(len(t.kept_indices)) for t in res.trials],
            "num_positive": int(sum(t.labels.sum() for t in res.trials)),
            "num_negative": int(sum((~t.labels).sum() for t in res.trials)),
        }
    return {
        "schema": REPORT_SCHEMA,
        "config_digest": report.config_digest,
        "scene_config": report.config.to_dict(),
        "seeds": report.seeds,
        "roc_pooling": "pooled across seeds",
        "label_rule": "Z_new reached onset and Z_old not past it (last Z_new sample in [T0, T0+k] unedited)",
        "modes": modes,
    }


def write_report(report, out_dir):
    """Write ``trace_<mode>_<seed>.csv``, ``roc_<mode>.csv`` and ``summary.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for mode, res in report.results.items():
        for trial in res.trials:
            p = out / f"trace_{mode}_{trial.seed}.csv"
            p.write_text(trace_csv(trial), newline="\n")
            written.append(p)
        p = out / f"roc_{mode}.csv"
        p.write_text(roc_csv(res.roc), newline="\n")
        written.append(p)
    p = out / "summary.json"
    p.write_text(json.dumps(summary_dict(report), indent=2) + "\n", newline="\n")
    written.append(p)
    return written
