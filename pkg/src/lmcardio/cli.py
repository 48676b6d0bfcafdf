"""Command-line entry point: train, evaluate, predict, monitor.

Exit codes: 0 success, 1 I/O failure, 2 data or configuration error,
3 numerical divergence during training.
"""
import argparse
import logging
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from ._fmt import fmt_float
from .dataset import (
    DataError,
    Schema,
    SplitSpec,
    apply_normalization,
    fit_normalization,
    load_csv,
    read_header,
    split,
)
from .lm import LmConfig, NonFiniteObjective, lm_train, predict_sse_curve, write_history_csv
from .metrics import (
    accuracy_curve,
    evaluate,
    write_confusion_csv,
    write_curve_csv,
    write_report,
)
from .mlp import InitSpec, MlpProblem, flatten, init_model, unflatten
from .persistence import ModelFormatError, SavedModel, load, save

log = logging.getLogger("lmcardio")

EXIT_OK, EXIT_IO, EXIT_DATA, EXIT_DIVERGED = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    data: str = None
    model: str = None
    out_dir: str = "out"
    out: str = None
    seed: int = 0
    threshold: float = None
    hidden: tuple = (6,)
    mode: str = "diagonal"
    lambda0: float = 1e-3
    max_iters: int = 200
    split: tuple = (0.70, 0.15, 0.15)
    stratify: bool = True
    features: tuple = None
    label: str = None
    lm_extra: dict = field(default_factory=dict)

    def lm_config(self):
        return LmConfig(lambda0=self.lambda0, mode=self.mode,
                        max_iterations=self.max_iters, **self.lm_extra)

    def threshold_or(self, default):
        return default if self.threshold is None else self.threshold

    def split_spec(self):
        return SplitSpec(*self.split, seed=self.seed, stratified=self.stratify)


_LM_EXTRA = ("lambda_increase", "lambda_decrease", "lambda_max", "lambda_min",
             "gradient_tol", "step_tol", "sse_tol")


def _csv_list(text, cast, key):
    try:
        return tuple(cast(v.strip()) for v in str(text).split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r}") from None


def _bool(text, key):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {text!r}")


def _coerce(key, value):
    """Turn a raw config value into the RunConfig field type."""
    try:
        if key in ("data", "model", "out_dir", "out", "label", "mode"):
            return str(value)
        if key in ("seed", "max_iters"):
            return int(value)
        if key in ("threshold", "lambda0") or key in _LM_EXTRA:
            return float(value)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {value!r}") from None
    if key == "hidden":
        return _csv_list(value, int, key)
    if key == "split":
        fr = _csv_list(value, float, key)
        if len(fr) != 3:
            raise ConfigError("split needs three comma-separated fractions")
        return fr
    if key == "features":
        return _csv_list(value, str, key)
    if key == "stratify":
        return _bool(value, key)
    if key == "no_stratify":
        return not _bool(value, key)
    raise ConfigError(f"unknown configuration key {key!r}")


def read_config_file(path):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"{path}:{n}: expected 'key = value'")
            key = key.strip().replace("-", "_")
            out[key] = value.strip()
    return out


def build_config(args):
    values = {}
    if args.config:
        values.update(read_config_file(args.config))
    for key in ("data", "model", "out_dir", "out", "seed", "threshold", "hidden", "mode",
                "lambda0", "max_iters", "split", "features", "label"):
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if getattr(args, "no_stratify", False):
        values.pop("no_stratify", None)
        values["stratify"] = "false"

    kwargs, extra = {}, {}
    for key, raw in values.items():
        v = _coerce(key, raw)
        if key in _LM_EXTRA:
            extra[key] = v
        elif key == "no_stratify":
            kwargs["stratify"] = v
        else:
            kwargs[key] = v
    cfg = RunConfig(**kwargs, lm_extra=extra)
    if cfg.mode not in ("identity", "diagonal"):
        raise ConfigError(f"mode must be identity or diagonal, got {cfg.mode!r}")
    return cfg


def _require(cfg, *names):
    for name in names:
        if not getattr(cfg, name):
            raise ConfigError(f"--{name.replace('_', '-')} is required")


def _resolve_schema(cfg):
    header = read_header(cfg.data)
    label = cfg.label or header[-1]
    features = cfg.features or tuple(c for c in header if c != label)
    return Schema(features, label)


def cmd_train(cfg, out=sys.stdout):
    _require(cfg, "data", "out_dir")
    lm_cfg = cfg.lm_config()
    spec = cfg.split_spec()
    schema = _resolve_schema(cfg)
    ds = load_csv(cfg.data, schema)
    parts = dict(zip(("train", "val", "test"), split(ds, spec)))
    log.info("loaded %d rows; split sizes %s", len(ds), {k: len(v) for k, v in parts.items()})
    threshold = cfg.threshold_or(0.5)
    stats = fit_normalization(parts["train"])
    parts = {k: apply_normalization(v, stats) for k, v in parts.items()}

    layer_sizes = (len(schema.feature_columns), *cfg.hidden, 1)
    model0 = init_model(layer_sizes, InitSpec(cfg.seed))
    arch = model0.architecture
    train = parts["train"]
    problem = MlpProblem(arch, train.X, train.y)
    checkpoints = [model0]

    os.makedirs(cfg.out_dir, exist_ok=True)
    hist_path = os.path.join(cfg.out_dir, "history.csv")
    try:
        beta, history = lm_train(
            problem, flatten(model0), lm_cfg,
            callback=lambda it, b: checkpoints.append(unflatten(arch, b)),
        )
    except NonFiniteObjective as exc:
        if exc.history is not None:
            write_history_csv(exc.history, hist_path)
        raise
    model = unflatten(arch, beta)

    saved = SavedModel(schema, stats, model, threshold)
    model_path = cfg.model or os.path.join(cfg.out_dir, "model.json")
    save(saved, model_path)
    write_history_csv(history, hist_path)
    write_curve_csv(predict_sse_curve(history), ["iteration", "sse"],
                    os.path.join(cfg.out_dir, "sse_curve.csv"))

    print(f"termination: {history.termination.value} after {len(history.records)} proposals",
          file=out)
    reports = {}
    for name, part in parts.items():
        if len(part) == 0:
            continue
        rep = evaluate(model, part.X, part.y, threshold)
        reports[name] = rep
        write_report(rep, os.path.join(cfg.out_dir, f"report_{name}.txt"))
        write_confusion_csv(rep.confusion, os.path.join(cfg.out_dir, f"confusion_{name}.csv"))
        write_curve_csv(accuracy_curve(checkpoints, part, threshold),
                        ["iteration", "accuracy"],
                        os.path.join(cfg.out_dir, f"accuracy_curve_{name}.csv"))
        print(f"{name}: n={len(part)} accuracy={rep.accuracy:.5f}", file=out)
    return saved, history, reports


def cmd_evaluate(cfg, out=sys.stdout):
    _require(cfg, "model", "data", "out_dir")
    saved = load(cfg.model)
    threshold = cfg.threshold_or(saved.threshold)
    ds = load_csv(cfg.data, saved.schema)
    ds = apply_normalization(ds, saved.norm)
    rep = evaluate(saved.model, ds.X, ds.y, threshold)
    os.makedirs(cfg.out_dir, exist_ok=True)
    write_report(rep, os.path.join(cfg.out_dir, "evaluation_report.txt"))
    write_confusion_csv(rep.confusion, os.path.join(cfg.out_dir, "evaluation_confusion.csv"))
    print(f"n={rep.n_samples} accuracy={rep.accuracy:.5f}", file=out)
    return rep


def cmd_predict(cfg, out=sys.stdout):
    _require(cfg, "model", "data")
    saved = load(cfg.model)
    ds = load_csv(cfg.data, saved.schema, require_label=False)
    scores = saved.scores(ds.X)
    threshold = cfg.threshold_or(saved.threshold)
    out_path = cfg.out or os.path.join(cfg.out_dir, "predictions.csv")
    parent = os.path.dirname(out_path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(out_path, "w", newline="") as fh:
        fh.write("row_id,score,predicted\n")
        for rid, s in zip(ds.row_ids, scores):
            fh.write(f"{rid},{fmt_float(s)},{int(s >= threshold)}\n")
    print(f"wrote {len(scores)} predictions to {out_path}", file=out)
    return scores


def monitor_stream(saved, lines, out, err, threshold=0.5):
    """Score headerless CSV rows one at a time; bad lines are reported and skipped."""
    n_features = len(saved.schema.feature_columns)
    for n, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        fields_ = line.split(",")
        try:
            if len(fields_) != n_features:
                raise ValueError(f"expected {n_features} fields, got {len(fields_)}")
            x = np.array([float(f) for f in fields_])
            if not np.all(np.isfinite(x)):
                raise ValueError("non-finite value")
        except ValueError as exc:
            print(f"error: line {n}: {exc}", file=err, flush=True)
            continue
        score = saved.scores(x[None, :])[0]
        pred = int(score >= threshold)
        out.write(f"{fmt_float(score)},{pred},{pred}\n")
        out.flush()


def cmd_monitor(cfg, stdin=sys.stdin, out=sys.stdout, err=sys.stderr):
    _require(cfg, "model")
    try:
        saved = load(cfg.model)
    except (OSError, ValueError) as exc:
        print(f"error: cannot load model: {exc}", file=err)
        return EXIT_IO
    monitor_stream(saved, stdin, out, err, cfg.threshold_or(saved.threshold))
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file; flags override it")
    common.add_argument("--data")
    common.add_argument("--model")
    common.add_argument("--out-dir", dest="out_dir")
    common.add_argument("--out", help="output file for predict")
    common.add_argument("--seed", type=int)
    common.add_argument("--threshold", type=float)
    common.add_argument("--hidden", help="comma-separated hidden layer sizes")
    common.add_argument("--mode", choices=("identity", "diagonal"))
    common.add_argument("--lambda0", type=float)
    common.add_argument("--max-iters", dest="max_iters", type=int)
    common.add_argument("--split", help="train,val,test fractions")
    common.add_argument("--no-stratify", dest="no_stratify", action="store_true")
    common.add_argument("--features", help="comma-separated feature columns")
    common.add_argument("--label", help="label column (default: last header column)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="lmcardio", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("train", "train an MLP with Levenberg-Marquardt"),
        ("evaluate", "score a labelled CSV with a saved model"),
        ("predict", "write per-row scores for a CSV"),
        ("monitor", "score headerless CSV rows streamed on stdin"),
    ):
        sub.add_parser(name, parents=[common], help=help_)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        cfg = build_config(args)
        if args.command == "monitor":
            return cmd_monitor(cfg)
        {"train": cmd_train, "evaluate": cmd_evaluate, "predict": cmd_predict}[args.command](cfg)
    except NonFiniteObjective as exc:
        print(f"error: training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (DataError, ModelFormatError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
