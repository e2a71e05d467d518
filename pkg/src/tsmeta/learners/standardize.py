"""Per-feature z-scoring fitted on a training meta-set."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import TooFewRecords, ValidationError
from ..features import N_FEATURES, FeatureVector


def feature_matrix(items) -> tuple[np.ndarray, np.ndarray]:
    """Stack FeatureVectors (or objects with ``.features``) into (values, mask)."""
    fvs = [getattr(it, "features", it) for it in items]
    if not fvs:
        return np.zeros((0, N_FEATURES)), np.zeros((0, N_FEATURES), dtype=bool)
    return np.stack([f.values for f in fvs]), np.stack([f.mask for f in fvs])


@dataclass(frozen=True, eq=False)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float)
        scale = np.array(self.scale, dtype=float)
        if mean.shape != (N_FEATURES,) or scale.shape != (N_FEATURES,):
            raise ValidationError("standardizer needs one mean and scale per feature")
        if np.any(scale <= 0) or not np.all(np.isfinite(mean)) or not np.all(np.isfinite(scale)):
            raise ValidationError("standardizer scales must be positive and finite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "scale", scale)

    def apply(self, fv: FeatureVector) -> np.ndarray:
        return self.apply_arrays(fv.values[None, :], fv.mask[None, :])[0]

    def apply_arrays(self, values: np.ndarray, mask: np.ndarray) -> np.ndarray:
        z = (values - self.mean) / self.scale
        return np.where(mask, z, 0.0)

    def inverse(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(z) * self.scale + self.mean

    def to_json(self) -> dict:
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> Standardizer:
        return cls(np.array(obj["mean"]), np.array(obj["scale"]))


def fit_standardizer(records) -> Standardizer:
    """Mean and population sd per feature over entries that are defined.

    Features with zero spread (or never defined) get divisor 1.
    """
    values, mask = feature_matrix(records)
    if len(values) < 2:
        raise TooFewRecords(f"standardizer needs at least 2 records, got {len(values)}")
    counts = mask.sum(axis=0)
    safe = np.maximum(counts, 1)
    mean = np.where(mask, values, 0.0).sum(axis=0) / safe
    var = np.where(mask, (values - mean) ** 2, 0.0).sum(axis=0) / safe
    sd = np.sqrt(var)
    tiny = 1e-12 * np.maximum(1.0, np.abs(mean))
    scale = np.where(sd > tiny, sd, 1.0)
    return Standardizer(mean, scale)
