"""Meta-dataset construction: features plus tuned per-model results per series.

Also holds the unit cost model used to compare the nine strategies.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Mapping

import numpy as np

from . import __version__
from ._parallel import pmap
from .core import SplitConfig, TimeSeries, default_split, read_series_csv
from .errors import (AllModelsFailed, CorruptFile, DegenerateSplit, SchemaMismatch,
                     TsMetaError, ValidationError)
from .features import FeatureVector, extract_features
from .models import ModelId
from .strategy import HPTMode, ModelSelection, Strategy
from .tuning import DEFAULT_TRIALS, HyperParamSpace, default_spaces, random_search

log = logging.getLogger(__name__)

SCHEMA_VERSION = "v1"


@dataclass(frozen=True)
class ModelOutcome:
    params: Mapping
    mape: float | None
    failed: bool

    def to_dict(self) -> dict:
        return {"params": dict(self.params), "mape": self.mape, "failed": self.failed}


def select_best(per_model: Mapping[ModelId, ModelOutcome]) -> ModelId | None:
    """Lowest-MAPE non-failed model; equal MAPEs go to the smaller name."""
    ok = [(o.mape, m.value, m) for m, o in per_model.items() if not o.failed]
    if not ok:
        return None
    return min(ok)[2]


@dataclass(frozen=True, eq=False)
class MetaRecord:
    series_id: str
    features: FeatureVector
    per_model: Mapping[ModelId, ModelOutcome]
    best_model: ModelId | None = field(default=None)

    def __post_init__(self):
        per_model = {ModelId(m): o for m, o in self.per_model.items()}
        object.__setattr__(self, "per_model", per_model)
        object.__setattr__(self, "best_model", select_best(per_model))

    @property
    def quarantined(self) -> bool:
        return self.best_model is None

    def to_json(self) -> dict:
        return {
            "v": SCHEMA_VERSION,
            "id": self.series_id,
            **self.features.to_json(),
            "per_model": {m.value: self.per_model[m].to_dict()
                          for m in ModelId.ordered() if m in self.per_model},
            "best_model": None if self.best_model is None else self.best_model.value,
        }

    def to_line(self) -> str:
        return json.dumps(self.to_json(), sort_keys=False, separators=(",", ":"))

    @classmethod
    def from_json(cls, obj: dict) -> MetaRecord:
        if obj.get("v") != SCHEMA_VERSION:
            raise SchemaMismatch(f"meta record version {obj.get('v')!r}, expected {SCHEMA_VERSION}")
        try:
            fv = FeatureVector.from_dicts(obj["features"], obj["mask"])
            per_model = {ModelId(m): ModelOutcome(d["params"], d["mape"], bool(d["failed"]))
                         for m, d in obj["per_model"].items()}
            rec = cls(str(obj["id"]), fv, per_model)
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptFile(f"malformed meta record: {exc}") from exc
        stored = obj.get("best_model")
        if stored != (None if rec.best_model is None else rec.best_model.value):
            raise CorruptFile(f"record {rec.series_id}: stored best_model disagrees with its errors")
        return rec


def build_meta_record(ts: TimeSeries, spaces: Mapping[ModelId, HyperParamSpace] | None = None,
                      trials: int = DEFAULT_TRIALS, seed: int = 0,
                      cfg: SplitConfig | None = None) -> MetaRecord:
    """Tune every model by random search and attach the series features.

    Raises :class:`AllModelsFailed` (carrying the record) when no model fits.
    """
    spaces = spaces or default_spaces()
    cfg = cfg or default_split(ts)
    per_model = {}
    for model_id in ModelId.ordered():
        best, _ = random_search(model_id, ts, spaces[model_id], trials=trials, seed=seed, cfg=cfg)
        per_model[model_id] = ModelOutcome(best.assignment.to_dict(), best.error, best.failed)
    rec = MetaRecord(ts.id, extract_features(ts), per_model)
    if rec.quarantined:
        raise AllModelsFailed(f"every model failed on {ts.id}", record=rec)
    return rec


@dataclass(frozen=True)
class CorpusConfig:
    period: int = 1
    horizon: int | None = None
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    jobs: int = 1

    def to_dict(self) -> dict:
        return {"period": self.period, "horizon": self.horizon, "trials": self.trials,
                "seed": self.seed}


@dataclass(frozen=True)
class CorpusSummary:
    path: Path
    written: list[str]
    quarantined: list[str]
    skipped: dict[str, str]


def _record_or_none(ts: TimeSeries, trials: int, seed: int, horizon: int | None):
    cfg = SplitConfig(horizon) if horizon is not None else None
    try:
        return "ok", build_meta_record(ts, trials=trials, seed=seed, cfg=cfg).to_line()
    except AllModelsFailed:
        return "quarantined", None
    except TsMetaError as exc:
        return "skipped", str(exc)


def sidecar_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def build_corpus(directory: str | Path, out_path: str | Path,
                 config: CorpusConfig = CorpusConfig()) -> CorpusSummary:
    """Write one JSON line per series CSV in ``directory``, ordered by series id.

    Unreadable files are logged and skipped; series where every model fails
    are listed as quarantined in the sidecar. Raises ValidationError if no
    file could be used at all.
    """
    directory = Path(directory)
    series, skipped = [], {}
    for path in sorted(directory.glob("*.csv")):
        try:
            series.append(read_series_csv(path, period=config.period))
        except (TsMetaError, OSError, ValueError) as exc:
            log.warning("skipping %s: %s", path.name, exc)
            skipped[path.stem] = str(exc)
    series.sort(key=lambda ts: ts.id)
    work = partial(_record_or_none, trials=config.trials, seed=config.seed, horizon=config.horizon)
    results = pmap(work, series, jobs=config.jobs)
    lines, written, quarantined = [], [], []
    for ts, (status, payload) in zip(series, results):
        if status == "ok":
            lines.append(payload)
            written.append(ts.id)
        elif status == "quarantined":
            quarantined.append(ts.id)
        else:
            log.warning("skipping %s: %s", ts.id, payload)
            skipped[ts.id] = payload
    if not written:
        raise ValidationError(f"no usable series in {directory}")
    out_path = Path(out_path)
    out_path.write_text("".join(line + "\n" for line in lines))
    sidecar = {"tool_version": __version__, "schema": SCHEMA_VERSION, "config": config.to_dict(),
               "seed": config.seed, "n_records": len(written),
               "quarantined": quarantined, "skipped": dict(sorted(skipped.items()))}
    sidecar_path(out_path).write_text(json.dumps(sidecar, indent=2) + "\n")
    return CorpusSummary(out_path, written, quarantined, skipped)


def write_meta(records: list[MetaRecord], path: str | Path) -> None:
    ordered = sorted(records, key=lambda r: r.series_id)
    Path(path).write_text("".join(r.to_line() + "\n" for r in ordered))


def read_meta(path: str | Path) -> list[MetaRecord]:
    records = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorruptFile(f"{path}:{lineno}: {exc}") from exc
        records.append(MetaRecord.from_json(obj))
    return records


def split_meta(records: list, p: float, seed: int = 0) -> tuple[list, list]:
    """Seeded shuffle, then the first ceil(p*N) records go to training."""
    if not 0.0 < p < 1.0:
        raise ValidationError(f"train fraction must lie in (0, 1), got {p}")
    n = len(records)
    # round away float noise such as 0.07 * 100 = 7.000000000000001
    k = math.ceil(round(p * n, 9))
    if k == 0 or k == n:
        raise DegenerateSplit(f"p={p} on {n} records leaves an empty side")
    order = np.random.default_rng(seed).permutation(n)
    return [records[i] for i in order[:k]], [records[i] for i in order[k:]]


@dataclass(frozen=True)
class CostModel:
    """Unit costs: one exhaustive tuning runs ``c`` trials; everything else costs 1."""

    c: int = DEFAULT_TRIALS

    def __post_init__(self):
        if self.c < 1:
            raise ValidationError("trials per exhaustive tuning must be at least 1")


def per_series_cost(strategy: Strategy, cm: CostModel = CostModel(), n_models: int = 6) -> float:
    unit = cm.c if strategy.hpt is HPTMode.EXHAUSTIVE else 1
    return float(unit * (n_models if strategy.model_selection is ModelSelection.ENSEMBLE else 1))


def estimated_cost(strategy: Strategy, p: float, N: int, cm: CostModel = CostModel(),
                   n_models: int = 6) -> float:
    """Total units to obtain hyper-parameters for N series.

    Learned tuning pays full exhaustive cost on the p-fraction used for
    training and one unit per remaining series.
    """
    if N < 1:
        raise ValidationError("N must be at least 1")
    if strategy.hpt is HPTMode.SSL_HPT:
        models = n_models if strategy.model_selection is ModelSelection.ENSEMBLE else 1
        return float(models * (p * cm.c * N + (1.0 - p) * N))
    return per_series_cost(strategy, cm, n_models) * N
