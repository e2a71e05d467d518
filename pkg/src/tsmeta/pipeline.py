"""Online forecasting paths and the strategy-comparison protocols."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial
from typing import Sequence

import numpy as np

from . import __version__, models
from ._parallel import pmap
from .core import MIN_LENGTH, ForecastResult, SplitConfig, TimeSeries, default_horizon, default_split, mape, train_test_split
from .errors import AllModelsFailed, BadCheckpoint, FitFailure, NonFiniteValue, OverlapError, ValidationError
from .features import extract_features
from .learners import Learners, predict_hparams, predict_model
from .metadata import CostModel, per_series_cost
from .models import ModelId
from .strategy import BASELINE, HPTMode, ModelSelection, Strategy
from .tuning import DEFAULT_TRIALS, HyperParamAssignment, default_space, random_search, trial_rng


def fallback_forecast(ts: TimeSeries, h: int) -> ForecastResult:
    """Seasonal naive when two cycles are available, otherwise the last value."""
    if ts.seasonal_usable:
        fm = models.fit(ModelId.SEASONAL_NAIVE, ts)
        fc = models.predict(fm, h)
        values = fc.point_forecasts
    else:
        values = (float(ts.values[-1]),) * h
    return ForecastResult(h, values, ModelId.SEASONAL_NAIVE,
                          default_space(ModelId.SEASONAL_NAIVE).assign({}), fallback=True)


def _fit_predict(model_id, ts: TimeSeries, params, h: int) -> ForecastResult:
    fm = models.fit(model_id, ts, params)
    return models.predict(fm, h)


def _ssl_params(learners: Learners, model_id: ModelId, z: np.ndarray) -> HyperParamAssignment:
    space = default_space(model_id)
    if not space.domains:
        return space.assign({})
    net = learners.nets.get(model_id)
    if net is None:
        raise FitFailure(f"no trained hyper-parameter net for {model_id.value}")
    return predict_hparams(net, z)


def forecast_auto(ts: TimeSeries, learners: Learners, h: int) -> ForecastResult:
    """Pick a model with the forest, its parameters with that model's net, then forecast.

    A failing fit degrades to :func:`fallback_forecast` with ``fallback=True``.
    """
    z = learners.standardize(extract_features(ts))
    model_id = predict_model(learners.forest, z)
    try:
        params = _ssl_params(learners, model_id, z)
        return _fit_predict(model_id, ts, params, h)
    except (FitFailure, NonFiniteValue):
        return fallback_forecast(ts, h)


def choose_params(model_id: ModelId, ts: TimeSeries, hpt: HPTMode, learners: Learners | None,
                  z: np.ndarray | None, trials: int = DEFAULT_TRIALS, seed: int = 0,
                  cfg: SplitConfig | None = None) -> HyperParamAssignment | None:
    """Hyper-parameters for one model under a tuning mode; None if tuning failed.

    Exhaustive tuning validates on a holdout of ``cfg.horizon`` points (the
    default split when ``cfg`` is None).
    """
    hpt = HPTMode(hpt)
    if hpt is HPTMode.EXHAUSTIVE:
        best, _ = random_search(model_id, ts, trials=trials, seed=seed, cfg=cfg or default_split(ts))
        return None if best.failed else best.assignment
    if hpt is HPTMode.RANDOM_HP:
        return default_space(model_id).sample(trial_rng(seed, ts.id, model_id, 0, stream="random_hp"))
    try:
        return _ssl_params(learners, model_id, z)
    except FitFailure:
        return None


def median_forecast(forecasts: Sequence[Sequence[float]]) -> np.ndarray:
    """Pointwise median; an even count averages the two middle values."""
    return np.median(np.asarray(forecasts, dtype=float), axis=0)


def forecast_ensemble(ts: TimeSeries, learners: Learners | None, h: int, hpt_mode,
                      trials: int = DEFAULT_TRIALS, seed: int = 0) -> ForecastResult:
    z = None
    if HPTMode(hpt_mode) is HPTMode.SSL_HPT:
        z = learners.standardize(extract_features(ts))
    survivors, used = [], {}
    for m in ModelId.ordered():
        try:
            params = choose_params(m, ts, hpt_mode, learners, z, trials, seed)
            if params is None:
                continue
            fc = _fit_predict(m, ts, params, h)
        except (FitFailure, NonFiniteValue):
            continue
        survivors.append(fc.point_forecasts)
        used[m.value] = params.to_dict()
    if not survivors:
        raise AllModelsFailed(f"no model could be fitted to {ts.id}")
    return ForecastResult(h, tuple(median_forecast(survivors)), "ENSEMBLE", used)


# ---------------------------------------------------------------- evaluation


@dataclass(frozen=True)
class EvalConfig:
    horizon: int | None = None
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    jobs: int = 1

    def to_dict(self) -> dict:
        return {"horizon": self.horizon, "trials": self.trials, "seed": self.seed}


@dataclass(frozen=True)
class SeriesOutcome:
    series_id: str
    mapes: dict[str, float]
    failed: dict[str, bool]
    ssl_model: str
    random_model: str


def random_model_for(seed: int, series_id: str) -> ModelId:
    rng = trial_rng(seed, series_id, ModelId.SEASONAL_NAIVE, 0, stream="random_model")
    choices = ModelId.ordered()
    return choices[int(rng.integers(len(choices)))]


def evaluate_series(ts: TimeSeries, learners: Learners, config: EvalConfig) -> SeriesOutcome:
    """All nine strategies on one series, sharing per-model fits across rows."""
    h = config.horizon or default_horizon(ts.n, ts.period)
    cfg = SplitConfig(h)
    train, test = train_test_split(ts, cfg)
    z = learners.standardize(extract_features(train))
    ssl_model = predict_model(learners.forest, z)
    rand_model = random_model_for(config.seed, ts.id)
    fallback = mape(test.values, fallback_forecast(train, h).point_forecasts)

    forecasts: dict[tuple[ModelId, HPTMode], tuple | None] = {}
    for hpt in HPTMode:
        for m in ModelId.ordered():
            params = choose_params(m, train, hpt, learners, z, config.trials, config.seed, cfg)
            try:
                if params is None:
                    raise FitFailure("tuning produced no usable parameters")
                forecasts[m, hpt] = _fit_predict(m, train, params, h).point_forecasts
            except (FitFailure, NonFiniteValue):
                forecasts[m, hpt] = None

    mapes, failed = {}, {}
    for strat in Strategy.all():
        if strat.model_selection is ModelSelection.ENSEMBLE:
            alive = [forecasts[m, strat.hpt] for m in ModelId.ordered() if forecasts[m, strat.hpt] is not None]
            fc = median_forecast(alive) if alive else None
        else:
            m = ssl_model if strat.model_selection is ModelSelection.SSL_MS else rand_model
            fc = forecasts[m, strat.hpt]
        failed[strat.name] = fc is None
        mapes[strat.name] = fallback if fc is None else mape(test.values, fc)
    return SeriesOutcome(ts.id, mapes, failed, ssl_model.value, rand_model.value)


@dataclass(frozen=True)
class StrategyRow:
    method: str
    avg_mape: float
    avg_mape_change_pct: float
    median_mape: float
    median_mape_change_pct: float
    n_fails: int
    n_success: int
    runtime_units: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class EvalReport:
    rows: list[StrategyRow]
    outcomes: list[SeriesOutcome]
    config: dict = field(default_factory=dict)

    @property
    def corpus_size(self) -> int:
        return len(self.outcomes)

    def row(self, strategy: Strategy | str) -> StrategyRow:
        name = strategy.name if isinstance(strategy, Strategy) else strategy
        return next(r for r in self.rows if r.method == name)

    def to_json(self) -> dict:
        return {
            "tool_version": __version__,
            "seed": self.config.get("seed"),
            "config": self.config,
            "corpus_size": self.corpus_size,
            "baseline": BASELINE.name,
            "rows": [r.to_dict() for r in self.rows],
            "series": [{"id": o.series_id, "ssl_model": o.ssl_model, "random_model": o.random_model,
                        "mape": o.mapes, "failed": o.failed} for o in self.outcomes],
        }


def _pct(value: float, base: float) -> float:
    return 0.0 if base == 0 else 100.0 * (value - base) / base


def summarize(outcomes: list[SeriesOutcome], config: dict, cm: CostModel = CostModel()) -> EvalReport:
    outcomes = sorted(outcomes, key=lambda o: o.series_id)
    stats = {}
    for strat in Strategy.all():
        vals = np.array([o.mapes[strat.name] for o in outcomes])
        fails = sum(o.failed[strat.name] for o in outcomes)
        stats[strat.name] = (float(np.mean(vals)), float(np.median(vals)), fails)
    base_avg, base_med, _ = stats[BASELINE.name]
    rows = [StrategyRow(s.name, stats[s.name][0], _pct(stats[s.name][0], base_avg),
                        stats[s.name][1], _pct(stats[s.name][1], base_med), stats[s.name][2],
                        len(outcomes) - stats[s.name][2],
                        per_series_cost(s, cm, len(ModelId)))
            for s in Strategy.all()]
    return EvalReport(rows, outcomes, config)


def evaluate_methods(corpus: Sequence[TimeSeries], learners: Learners,
                     config: EvalConfig = EvalConfig()) -> EvalReport:
    """Run the nine strategies on every test series and aggregate MAPEs.

    Failed fits count towards ``n_fails``; their series still contribute the
    fallback forecast's MAPE to the averages.
    """
    overlap = sorted({ts.id for ts in corpus} & set(learners.train_ids))
    if overlap:
        raise OverlapError(f"{len(overlap)} test series were used to train the learners, e.g. {overlap[0]}")
    if not corpus:
        raise ValidationError("evaluation corpus is empty")
    work = partial(evaluate_series, learners=learners, config=config)
    outcomes = pmap(work, sorted(corpus, key=lambda ts: ts.id), jobs=config.jobs)
    return summarize(outcomes, {**config.to_dict(), "learners": learners.config},
                     CostModel(config.trials))


# ---------------------------------------------------------------- consistency


def consistency_eval(ts: TimeSeries, checkpoints: Sequence[int], learners: Learners) -> np.ndarray:
    """Label-change indicators between prefix checkpoints.

    Entry (i, j) with i < j is 1.0 when the selected model differs between the
    two prefixes, 0.0 otherwise; all other entries are NaN.
    """
    cps = [int(c) for c in checkpoints]
    if not cps:
        raise BadCheckpoint("no checkpoints given")
    if any(b < a for a, b in zip(cps, cps[1:])):
        raise BadCheckpoint(f"checkpoints must be non-decreasing, got {cps}")
    if cps[0] < MIN_LENGTH or cps[-1] > ts.n:
        raise BadCheckpoint(f"checkpoints must lie in [{MIN_LENGTH}, {ts.n}]")
    labels = [predict_model(learners.forest, learners.standardize(extract_features(ts.slice(0, c))))
              for c in cps]
    k = len(cps)
    out = np.full((k, k), np.nan)
    for i in range(k):
        for j in range(i + 1, k):
            out[i, j] = float(labels[i] != labels[j])
    return out


def _consistency_one(ts, checkpoints, learners):
    return consistency_eval(ts, checkpoints, learners)


def consistency_table(corpus: Sequence[TimeSeries], checkpoints: Sequence[int], learners: Learners,
                      jobs: int = 1) -> tuple[np.ndarray, int]:
    """Percent of series whose label changes, per checkpoint pair, and the number used.

    Series shorter than the last checkpoint are left out.
    """
    usable = [ts for ts in sorted(corpus, key=lambda t: t.id) if ts.n >= max(checkpoints)]
    if not usable:
        raise BadCheckpoint("no series is long enough for the last checkpoint")
    mats = pmap(partial(_consistency_one, checkpoints=checkpoints, learners=learners), usable, jobs)
    return 100.0 * np.mean(np.stack(mats), axis=0), len(usable)
