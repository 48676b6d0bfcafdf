"""The heart-failure harness on a synthetic file with the public column layout."""
import numpy as np

from conftest import make_clinical_csv
from test_acceptance import HEART_FEATURES, HEART_LABEL, heart_runs

PUBLIC_HEADER = ["age", "anaemia", "creatinine_phosphokinase", "diabetes", "ejection_fraction",
                 "high_blood_pressure", "platelets", "serum_creatinine", "serum_sodium", "sex",
                 "smoking", "time", "DEATH_EVENT"]


def test_heart_harness_on_public_layout(tmp_path):
    src = make_clinical_csv(tmp_path / "src.csv", n=299, seed=8)
    rows = [line.split(",") for line in src.read_text().splitlines()[1:]]
    rng = np.random.default_rng(0)
    dest = tmp_path / "heart.csv"
    with open(dest, "w") as fh:
        fh.write(",".join(PUBLIC_HEADER) + "\n")
        for age, an, di, bp, pl, sx, sm, t, death in rows:
            extra = rng.integers(20, 2000), rng.integers(14, 80), 1.1, rng.integers(113, 148)
            fh.write(f"{age},{an},{extra[0]},{di},{extra[1]},{bp},{pl},{extra[2]},{extra[3]},"
                     f"{sx},{sm},{t},{death}\n")
    runs = heart_runs(dest, tmp_path / "runs")
    assert len(runs) == 5
    for cfg, hist, acc, seconds in runs:
        assert hist.check_invariants(cfg) == []
        assert 0.0 <= acc <= 1.0
        assert seconds < 60.0
    saved_doc = (tmp_path / "runs" / "seed0" / "model.json").read_text()
    assert all(f'"{name}"' in saved_doc for name in HEART_FEATURES)
    assert f'"{HEART_LABEL}"' in saved_doc
    assert '"creatinine_phosphokinase"' not in saved_doc
