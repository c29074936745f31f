"""Command-line entry point.

Exit codes: 0 success, 2 config error, 3 training divergence, 4 missing
artifact, 5 degenerate data (too few kept samples, singular covariance).
"""
import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import files
from .config import RunConfig, load_config, parse_modes, parse_seeds
from .errors import InsufficientSamples, InvalidConfig, MissingArtifact, NlglrtError
from .evaluation import run_experiment, train_classifier, write_report
from .signal import synthesize_scene


def _load(args):
    cfg = load_config(args.config) if args.config else RunConfig()
    if getattr(args, "seeds", None):
        cfg = replace(cfg, seeds=parse_seeds(args.seeds))
    if getattr(args, "modes", None):
        cfg = replace(cfg, modes=parse_modes(args.modes))
    return cfg


def _out(args, cfg, default_sub=""):
    base = Path(args.out) if args.out else Path(cfg.output_dir)
    return base / default_sub if default_sub and not args.out else base


def _print_digests(paths):
    for p in paths:
        print(f"{files.sha256_file(p)}  {p}")


def cmd_generate(args):
    cfg = _load(args)
    out = _out(args, cfg, "scene")
    if getattr(args, "seeds", None):
        paths = []
        for seed in cfg.seeds:
            scene = synthesize_scene(replace(cfg.scene, seed=seed))
            paths += files.write_scene(scene, out / f"seed_{seed}")
    else:
        paths = files.write_scene(synthesize_scene(cfg.scene), out)
    _print_digests(paths)
    return 0


def _train(cfg, out):
    result = train_classifier(cfg.scene, cfg.train, cfg.flagged_fraction, cfg.train_scene_seed)
    model_path = files.write_model(result.model, cfg.train, out / "model.json")
    log_path = out / "train_loss.csv"
    log_path.write_text(files.loss_log_csv(result), newline="\n")
    print(
        f"trained {'x'.join(map(str, result.model.layer_sizes))} network in {result.epochs} epochs "
        f"(best loss {min(result.losses):.6g}, {'early stop' if result.early_stopped else 'max epochs'})"
    )
    return model_path, log_path


def cmd_train(args):
    cfg = _load(args)
    _print_digests(_train(cfg, _out(args, cfg, "model")))
    return 0


def _evaluate(cfg, model_path, out):
    model = None
    needs_model = any(m.endswith("_dnn") for m in cfg.modes)
    if needs_model:
        if not cfg.classifier_enabled:
            raise InvalidConfig("classifier_enabled = false but *_dnn modes were requested")
        if model_path is None:
            raise MissingArtifact("*_dnn modes need --model <path>")
        model, _ = files.read_model(model_path)
    report = run_experiment(cfg.scene, cfg.modes, cfg.seeds, model, cfg.loading, cfg.guard)
    paths = write_report(report, out)
    for mode, res in report.results.items():
        print(f"{mode:14s} auc={res.roc.auc:.4f} peak_hit_rate={res.peak_hit_rate:.2f}")
    return paths


def cmd_evaluate(args):
    cfg = _load(args)
    _evaluate(cfg, args.model, _out(args, cfg, "report"))
    return 0


def cmd_all(args):
    cfg = _load(args)
    base = Path(args.out) if args.out else Path(cfg.output_dir)
    _print_digests(files.write_scene(synthesize_scene(cfg.scene), base / "scene"))
    model_path = None
    if cfg.classifier_enabled:
        model_path, _ = _train(cfg, base / "model")
    elif any(m.endswith("_dnn") for m in cfg.modes):
        cfg = replace(cfg, modes=tuple(m for m in cfg.modes if not m.endswith("_dnn")))
    _evaluate(cfg, model_path, base / "report")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nlglrt",
        description="Classifier-edited covariance-ratio detection under amplifier nonlinearity.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat TOML run configuration (defaults: setup a)")
        p.add_argument("--out", help="output directory")
        return p

    p = common(sub.add_parser("generate", help="write a scene CSV pair and JSON sidecar"))
    p.add_argument("--seeds", help="comma-separated seeds; one scene subdirectory each")
    p.set_defaults(func=cmd_generate)

    p = common(sub.add_parser("train", help="train the distortion classifier"))
    p.set_defaults(func=cmd_train)

    p = common(sub.add_parser("evaluate", help="run detection pipelines and write a report"))
    p.add_argument("--model", help="model JSON from 'train' (needed for *_dnn modes)")
    p.add_argument("--modes", help="comma-separated: linear,nonlinear,nonlinear_dnn,linear_dnn")
    p.add_argument("--seeds", help="comma-separated evaluation seeds (overrides config)")
    p.set_defaults(func=cmd_evaluate)

    p = common(sub.add_parser("all", help="generate, train and evaluate in one go"))
    p.add_argument("--modes", help="comma-separated pipeline modes")
    p.add_argument("--seeds", help="comma-separated evaluation seeds")
    p.set_defaults(func=cmd_all)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InsufficientSamples as exc:
        print(f"error: {exc} (seed {exc.seed})", file=sys.stderr)
        return exc.exit_code
    except NlglrtError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
