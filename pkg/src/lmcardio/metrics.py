"""Binary classification metrics: confusion matrix, accuracy and friends."""
import csv
from dataclasses import dataclass

import numpy as np

from ._fmt import fmt_float
from .linalg import as_vector
from .mlp import predict


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class EvalReport:
    """Scores derived from a confusion matrix.

    ``precision``, ``recall`` and ``f1`` are None when their denominator is 0.
    """

    accuracy: float
    precision: float
    recall: float
    f1: float
    threshold: float
    n_samples: int
    confusion: ConfusionMatrix


def confusion(scores, labels, threshold=0.5):
    """Tally predictions; a score equal to the threshold counts as positive."""
    scores = as_vector(scores, "scores")
    labels = np.asarray(labels, dtype=np.float64).ravel()
    if scores.shape != labels.shape:
        raise ValueError(f"{scores.size} scores but {labels.size} labels")
    if not np.all((labels == 0.0) | (labels == 1.0)):
        raise ValueError("labels must be 0 or 1")
    pred = scores >= threshold
    actual = labels == 1.0
    return ConfusionMatrix(
        tp=int(np.sum(pred & actual)),
        fp=int(np.sum(pred & ~actual)),
        tn=int(np.sum(~pred & ~actual)),
        fn=int(np.sum(~pred & actual)),
    )


def _ratio(num, den):
    return num / den if den else None


def report(cm, threshold=0.5):
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    precision = _ratio(cm.tp, cm.tp + cm.fp)
    recall = _ratio(cm.tp, cm.tp + cm.fn)
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return EvalReport(
        accuracy=(cm.tp + cm.tn) / cm.total,
        precision=precision,
        recall=recall,
        f1=f1,
        threshold=threshold,
        n_samples=cm.total,
        confusion=cm,
    )


def evaluate(model, X, y, threshold=0.5):
    scores = predict(model, X)[:, 0]
    return report(confusion(scores, y, threshold), threshold)


def accuracy_curve(checkpoints, eval_set, threshold=0.5):
    """Accuracy of each checkpoint model on an already-normalized dataset."""
    if not checkpoints:
        raise ValueError("no checkpoints")
    return [
        (i, evaluate(m, eval_set.X, eval_set.y, threshold).accuracy)
        for i, m in enumerate(checkpoints)
    ]


def _fmt_optional(x):
    return "undefined" if x is None else fmt_float(x)


def write_report(rep, path):
    cm = rep.confusion
    lines = [
        f"accuracy = {fmt_float(rep.accuracy)}",
        f"precision = {_fmt_optional(rep.precision)}",
        f"recall = {_fmt_optional(rep.recall)}",
        f"f1 = {_fmt_optional(rep.f1)}",
        f"threshold = {fmt_float(rep.threshold)}",
        f"samples = {rep.n_samples}",
        f"tp = {cm.tp}",
        f"fp = {cm.fp}",
        f"tn = {cm.tn}",
        f"fn = {cm.fn}",
    ]
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_report(path):
    out = {}
    with open(path) as fh:
        for line in fh:
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out


def write_confusion_csv(cm, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["actual\\predicted", "0", "1"])
        writer.writerow(["0", cm.tn, cm.fp])
        writer.writerow(["1", cm.fn, cm.tp])


def write_curve_csv(rows, header, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i, v in rows:
            writer.writerow([i, fmt_float(v)])
