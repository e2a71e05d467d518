"""Trial evaluation plus random and grid search over a hyper-parameter space."""

from __future__ import annotations

import itertools
import zlib
from dataclasses import dataclass

import numpy as np

from .. import models
from ..core import SplitConfig, TimeSeries, default_split, mape, train_test_split
from ..errors import EmptySpaceWithZeroTrials, FitFailure, GridTooLarge, NonFiniteValue, ValidationError
from ..models import ModelId
from .space import HyperParamAssignment, HyperParamSpace, default_space

MAX_GRID = 10**5
DEFAULT_TRIALS = 20
DEFAULT_RESOLUTION = 5


@dataclass(frozen=True)
class TrialResult:
    assignment: HyperParamAssignment
    error: float | None
    failed: bool
    index: int = 0
    reason: str | None = None

    def __post_init__(self):
        if self.failed and self.error is not None:
            raise ValidationError("a failed trial carries no error")
        if not self.failed and self.error is None:
            raise ValidationError("a successful trial needs an error")

    def to_dict(self) -> dict:
        return {"params": self.assignment.to_dict(), "mape": self.error, "failed": self.failed}


def stable_hash(text: str) -> int:
    return zlib.crc32(str(text).encode("utf-8"))


def trial_rng(seed: int, series_id: str, model_id, index: int, stream: str = "search") -> np.random.Generator:
    """Independent generator for one trial, keyed by everything that identifies it."""
    key = [int(seed) & 0xFFFFFFFF, stable_hash(series_id), stable_hash(ModelId(model_id).value),
           stable_hash(stream), int(index)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def evaluate_params(model_id, assignment: HyperParamAssignment, ts: TimeSeries,
                    cfg: SplitConfig, index: int = 0) -> TrialResult:
    """Fit on the training split, forecast the holdout, score by MAPE.

    Fit failures come back as ``failed=True`` rather than exceptions.
    """
    train, test = train_test_split(ts, cfg)
    try:
        fm = models.fit(model_id, train, assignment)
        fc = models.predict(fm, cfg.horizon)
    except (FitFailure, NonFiniteValue) as exc:
        return TrialResult(assignment, None, True, index, str(exc))
    return TrialResult(assignment, mape(test.values, fc.point_forecasts), False, index)


def _best(trials: list[TrialResult]) -> TrialResult:
    ok = [t for t in trials if not t.failed]
    if not ok:
        return trials[0]
    # min() keeps the first minimum, i.e. the lowest trial index
    return min(ok, key=lambda t: t.error)


def random_search(model_id, ts: TimeSeries, space: HyperParamSpace | None = None,
                  trials: int = DEFAULT_TRIALS, seed: int = 0,
                  cfg: SplitConfig | None = None) -> tuple[TrialResult, list[TrialResult]]:
    model_id = ModelId(model_id)
    space = space or default_space(model_id)
    cfg = cfg or default_split(ts)
    if trials < 1:
        if not space.domains:
            raise EmptySpaceWithZeroTrials("zero trials requested on an empty space")
        raise ValidationError("trials must be at least 1")
    if not space.domains:
        trials = 1
    results = []
    for i in range(trials):
        assignment = space.sample(trial_rng(seed, ts.id, model_id, i))
        results.append(evaluate_params(model_id, assignment, ts, cfg, index=i))
    return _best(results), results


def grid_search(model_id, ts: TimeSeries, space: HyperParamSpace | None = None,
                resolution: int = DEFAULT_RESOLUTION,
                cfg: SplitConfig | None = None) -> tuple[TrialResult, list[TrialResult]]:
    model_id = ModelId(model_id)
    space = space or default_space(model_id)
    cfg = cfg or default_split(ts)
    if resolution < 1:
        raise ValidationError("resolution must be at least 1")
    size = space.grid_size(resolution)
    if size > MAX_GRID:
        raise GridTooLarge(f"grid of {size} points exceeds {MAX_GRID}")
    axes = [d.grid(resolution) for d in space.domains]
    results = []
    for i, combo in enumerate(itertools.product(*axes)):
        assignment = HyperParamAssignment(model_id, dict(zip(space.names, combo)))
        results.append(evaluate_params(model_id, assignment, ts, cfg, index=i))
    return _best(results), results
