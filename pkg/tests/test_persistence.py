import json

import numpy as np
import pytest

from lmcardio.dataset import PAPER_SCHEMA, NormStats
from lmcardio.mlp import InitSpec, flatten, init_model
from lmcardio.persistence import ModelFormatError, SavedModel, dumps, load, loads, save


def make_saved(seed=0):
    rng = np.random.default_rng(seed)
    model = init_model([8, 6, 1], InitSpec(seed))
    # awkward values that need all 17 digits
    model = type(model)(model.architecture,
                        [w + rng.normal(scale=1e-3, size=w.shape) / 3 for w in model.weights],
                        [b + 1 / 7 for b in model.biases])
    norm = NormStats(PAPER_SCHEMA.feature_columns, rng.normal(size=8) * 1e5, rng.uniform(size=8))
    return SavedModel(PAPER_SCHEMA, norm, model, 0.5)


def test_round_trip_reproduces_predictions_bitwise(tmp_path):
    saved = make_saved()
    path = tmp_path / "m.json"
    save(saved, path)
    back = load(path)
    assert np.array_equal(flatten(back.model), flatten(saved.model))
    assert np.array_equal(back.norm.mean, saved.norm.mean)
    assert back.schema == saved.schema
    X = np.random.default_rng(1).normal(scale=1e5, size=(100, 8))
    assert np.array_equal(back.scores(X), saved.scores(X))


def test_document_is_json_with_expected_keys():
    doc = json.loads(dumps(make_saved()))
    assert doc["format"] == "lmcardio-model" and doc["version"] == 1
    assert doc["layer_sizes"] == [8, 6, 1]
    assert doc["hidden_activation"] == "sigmoid"
    assert len(doc["parameters"]) == 61
    assert [row["feature"] for row in doc["normalization"]] == list(PAPER_SCHEMA.feature_columns)


def test_dumps_is_deterministic():
    assert dumps(make_saved(3)) == dumps(make_saved(3))


@pytest.mark.parametrize("mutate", [
    lambda d: d.update(version=99),
    lambda d: d.update(format="other"),
    lambda d: d["parameters"].pop(),
    lambda d: d.pop("layer_sizes"),
    lambda d: d.update(layer_sizes=[7, 6, 1]),
])
def test_invalid_documents(mutate):
    doc = json.loads(dumps(make_saved()))
    mutate(doc)
    with pytest.raises(ModelFormatError):
        loads(json.dumps(doc))


def test_garbage_is_rejected():
    with pytest.raises(ModelFormatError):
        loads("not json at all")
