"""Saved-model document: schema, normalization, architecture, parameters.

The document is JSON. Floats are written with 17 significant digits so a
load reproduces every parameter bit for bit.
"""
import json
from dataclasses import dataclass

import numpy as np

from ._fmt import fmt_float
from .dataset import NormStats, Schema, normalize_array
from .mlp import Architecture, flatten, predict, unflatten

FORMAT_NAME = "lmcardio-model"
FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SavedModel:
    schema: Schema
    norm: NormStats
    model: object  # MlpModel
    threshold: float = 0.5

    def scores(self, X_raw):
        """Output-unit 0 scores for raw (unnormalized) feature rows."""
        return predict(self.model, normalize_array(np.asarray(X_raw, dtype=np.float64), self.norm))[:, 0]


def _floats(values):
    return "[" + ", ".join(fmt_float(v) for v in values) + "]"


def dumps(saved):
    arch = saved.model.architecture
    s = saved.schema
    norm_rows = ",\n".join(
        f'    {{"feature": {json.dumps(name)}, "mean": {fmt_float(m)}, "std": {fmt_float(sd)}}}'
        for name, m, sd in zip(saved.norm.features, saved.norm.mean, saved.norm.std)
    )
    return (
        "{\n"
        f'  "format": {json.dumps(FORMAT_NAME)},\n'
        f'  "version": {FORMAT_VERSION},\n'
        f'  "schema": {{"features": {json.dumps(list(s.feature_columns))}, '
        f'"label": {json.dumps(s.label_column)}, "positive_label": {int(s.positive_label)}}},\n'
        f'  "normalization": [\n{norm_rows}\n  ],\n'
        f'  "layer_sizes": {json.dumps(list(arch.layer_sizes))},\n'
        f'  "hidden_activation": {json.dumps(arch.hidden_activation)},\n'
        f'  "output_activation": {json.dumps(arch.output_activation)},\n'
        f'  "threshold": {fmt_float(saved.threshold)},\n'
        f'  "parameters": {_floats(flatten(saved.model))}\n'
        "}\n"
    )


def loads(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"not a model document: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_NAME:
        raise ModelFormatError("not a model document")
    if doc.get("version") != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model format version {doc.get('version')!r}")
    try:
        schema = Schema(tuple(doc["schema"]["features"]), doc["schema"]["label"],
                        doc["schema"].get("positive_label", 1))
        norm = doc["normalization"]
        stats = NormStats(
            tuple(row["feature"] for row in norm),
            np.array([float(row["mean"]) for row in norm]),
            np.array([float(row["std"]) for row in norm]),
        )
        arch = Architecture(tuple(doc["layer_sizes"]), doc["hidden_activation"],
                            doc["output_activation"])
        model = unflatten(arch, np.array([float(v) for v in doc["parameters"]]))
        threshold = float(doc["threshold"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"invalid model document: {exc}") from None
    if stats.features != schema.feature_columns:
        raise ModelFormatError("normalization features do not match schema")
    if arch.n_inputs != len(schema.feature_columns):
        raise ModelFormatError("input layer size does not match feature count")
    return SavedModel(schema, stats, model, threshold)


def save(saved, path):
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(dumps(saved))


def load(path):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())

