from __future__ import annotations

import sys

import numpy as np
import pytest

from tsmeta.core import SplitConfig, TimeSeries
from tsmeta.learners import LearnerConfig, train_learners
from tsmeta.metadata import build_meta_record
from tsmeta.synthetic import generate_corpus

SMALL = LearnerConfig(n_trees=15, max_depth=8, epochs=40, lr=0.05, batch=16, seed=3)


@pytest.fixture(scope="session")
def toy_corpus():
    series = generate_corpus(36, seed=11)
    records = [build_meta_record(ts, seed=11, cfg=SplitConfig(12)) for ts in series]
    return series, records


@pytest.fixture(scope="session")
def toy_learners(toy_corpus):
    _, records = toy_corpus
    return train_learners(records[:24], SMALL)


def seasonal_series(n=60, period=12, seed=0, id="seasonal"):
    rng = np.random.default_rng(seed)
    t = np.arange(n)
    y = 100 + 0.3 * t + 8 * np.sin(2 * np.pi * t / period) + rng.normal(0, 1, n)
    return TimeSeries.from_values(y, period=period, id=id)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
