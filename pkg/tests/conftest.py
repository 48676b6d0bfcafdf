import os
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

DATA = Path(__file__).parent / "data"

_criteria = {}


@pytest.fixture
def paper_csv():
    return DATA / "paper_rows.csv"


@pytest.fixture
def xor_csv():
    return DATA / "xor.csv"


def make_clinical_csv(path, n=150, seed=0):
    """Synthetic rows in the sample-table schema; risk rises with age and falls with time."""
    rng = np.random.default_rng(seed)
    age = rng.integers(40, 96, size=n).astype(float)
    binary = rng.integers(0, 2, size=(n, 5)).astype(float)
    platelets = np.round(rng.normal(263000, 90000, size=n).clip(25000, 850000), 2)
    time = rng.integers(4, 286, size=n).astype(float)
    logit = 0.08 * (age - 60) - 0.025 * (time - 130) + 0.6 * binary[:, 2] + rng.normal(0, 0.7, n)
    death = (logit > 0).astype(int)
    header = "Age,Anaemia,Diabetes,High BP,Platelets,Sex,Smoking,Time,Death Event"
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for i in range(n):
            an, di, bp, sx, sm = (int(v) for v in binary[i])
            fh.write(f"{int(age[i])},{an},{di},{bp},{float(platelets[i])!r},{sx},{sm},"
                     f"{int(time[i])},{death[i]}\n")
    return path


@pytest.fixture
def clinical_csv(tmp_path):
    return make_clinical_csv(tmp_path / "clinical.csv")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _criteria[marker] = report.outcome


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        rep.criterion = (m.args[0], m.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), outcome in sorted(_criteria.items()):
        word = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[outcome]
        terminalreporter.write_line(f"[{word}] criterion {number}: {title}")
