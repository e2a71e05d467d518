"""Learners trained on the meta-dataset: forest, multi-task nets, MF ranker."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..errors import CorruptFile, NoTrainingRows, SchemaMismatch
from ..models import ModelId
from .forest import RandomForest, predict_model, train_forest
from .mf import MFModel, mf_fit, mf_rank
from .mtl import MultiTaskNet, predict_hparams, train_mtl
from .standardize import Standardizer, feature_matrix, fit_standardizer

LEARNER_SCHEMA = "v1"


@dataclass(frozen=True)
class LearnerConfig:
    n_trees: int = 100
    max_depth: int = 12
    epochs: int = 200
    lr: float = 0.05
    batch: int = 32
    s: float = 1.0
    mf_lambda: float = 1.0
    seed: int = 0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(eq=False)
class Learners:
    standardizer: Standardizer
    forest: RandomForest
    nets: dict[ModelId, MultiTaskNet]
    mf: MFModel | None = None
    config: dict = field(default_factory=dict)
    train_ids: tuple[str, ...] = ()

    def standardize(self, fv) -> np.ndarray:
        return self.standardizer.apply(fv)


def train_learners(records, config: LearnerConfig = LearnerConfig()) -> Learners:
    """Fit standardizer, forest, one net per model and the MF ranker.

    Quarantined records are ignored. A model whose tuning failed everywhere
    gets no net; callers fall back to random draws for it.
    """
    records = [r for r in records if not r.quarantined]
    std = fit_standardizer(records)
    values, mask = feature_matrix(records)
    Z = std.apply_arrays(values, mask)
    forest = train_forest(Z, [r.best_model for r in records], n_trees=config.n_trees,
                          max_depth=config.max_depth, seed=config.seed)
    nets = {}
    for m in ModelId.ordered():
        try:
            nets[m] = train_mtl(m, records, Z, s=config.s, epochs=config.epochs, lr=config.lr,
                                batch=config.batch, seed=config.seed)
        except NoTrainingRows:
            continue
    A = np.array([[np.nan if r.per_model[m].failed else r.per_model[m].mape
                   for m in ModelId.ordered()] for r in records])
    mf = mf_fit(A, Z, lam=config.mf_lambda) if config.mf_lambda > 0 else None
    return Learners(std, forest, nets, mf, config.to_dict(),
                    tuple(sorted(r.series_id for r in records)))


def _dump(path: Path, payload: dict) -> None:
    path.write_text(json.dumps({"v": LEARNER_SCHEMA, **payload}) + "\n")


def _load(path: Path) -> dict:
    try:
        obj = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise CorruptFile(f"missing learner file {path.name}") from exc
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CorruptFile(f"{path.name}: {exc}") from exc
    if not isinstance(obj, dict):
        raise CorruptFile(f"{path.name}: expected a JSON object")
    if obj.get("v") != LEARNER_SCHEMA:
        raise SchemaMismatch(f"{path.name}: schema {obj.get('v')!r}, expected {LEARNER_SCHEMA}")
    return obj


def save_learners(learners: Learners, directory) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    _dump(d / "standardizer.json", learners.standardizer.to_json())
    _dump(d / "forest.json", learners.forest.to_json())
    for m, net in learners.nets.items():
        _dump(d / f"mtl_{m.value}.json", net.to_json())
    if learners.mf is not None:
        _dump(d / "mf.json", learners.mf.to_json())
    _dump(d / "manifest.json", {
        "tool_version": __version__, "config": learners.config, "standardized": True,
        "nets": [m.value for m in learners.nets], "mf": learners.mf is not None,
        "train_ids": list(learners.train_ids)})
    return d


def load_learners(directory) -> Learners:
    d = Path(directory)
    manifest = _load(d / "manifest.json")
    try:
        std = Standardizer.from_json(_load(d / "standardizer.json"))
        forest = RandomForest.from_json(_load(d / "forest.json"))
        nets = {ModelId(m): MultiTaskNet.from_json(_load(d / f"mtl_{m}.json")) for m in manifest["nets"]}
        mf = MFModel.from_json(_load(d / "mf.json")) if manifest["mf"] else None
        return Learners(std, forest, nets, mf, manifest["config"], tuple(manifest["train_ids"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptFile(f"malformed learner files in {d}: {exc}") from exc


__all__ = [
    "LearnerConfig", "Learners", "MFModel", "MultiTaskNet", "RandomForest", "Standardizer",
    "fit_standardizer", "load_learners", "mf_fit", "mf_rank", "predict_hparams", "predict_model",
    "save_learners", "train_forest", "train_learners", "train_mtl",
]
