"""Hyper-parameter domains, spaces and concrete assignments."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from ..errors import InvalidAssignment, ValidationError
from ..models import ModelId

CATEGORICAL = "categorical"
INTEGER = "integer"
CONTINUOUS = "continuous"


@dataclass(frozen=True)
class ParamDomain:
    name: str
    kind: str
    labels: tuple[str, ...] = ()
    lo: float = 0.0
    hi: float = 0.0

    def __post_init__(self):
        if self.kind == CATEGORICAL:
            if not self.labels:
                raise ValidationError(f"categorical domain {self.name} has no labels")
            object.__setattr__(self, "labels", tuple(self.labels))
        elif self.kind in (INTEGER, CONTINUOUS):
            if self.lo > self.hi:
                raise ValidationError(f"domain {self.name}: lo {self.lo} exceeds hi {self.hi}")
        else:
            raise ValidationError(f"unknown domain kind {self.kind!r}")

    @classmethod
    def categorical(cls, name, labels):
        return cls(name, CATEGORICAL, labels=tuple(labels))

    @classmethod
    def integer(cls, name, lo, hi):
        return cls(name, INTEGER, lo=int(lo), hi=int(hi))

    @classmethod
    def continuous(cls, name, lo, hi):
        return cls(name, CONTINUOUS, lo=float(lo), hi=float(hi))

    def contains(self, value) -> bool:
        if self.kind == CATEGORICAL:
            return value in self.labels
        if isinstance(value, bool):
            return False
        if self.kind == INTEGER:
            return isinstance(value, (int, np.integer)) and self.lo <= value <= self.hi
        return isinstance(value, (int, float, np.number)) and np.isfinite(value) and self.lo <= value <= self.hi

    def sample(self, rng: np.random.Generator):
        if self.kind == CATEGORICAL:
            return self.labels[int(rng.integers(len(self.labels)))]
        if self.kind == INTEGER:
            return int(rng.integers(self.lo, self.hi + 1))
        return float(self.lo + (self.hi - self.lo) * rng.random())

    def grid(self, resolution: int) -> list:
        if self.kind == CATEGORICAL:
            return list(self.labels)
        if self.kind == INTEGER:
            return list(range(int(self.lo), int(self.hi) + 1))
        if resolution == 1 or self.lo == self.hi:
            return [float(self.lo)]
        return [float(v) for v in np.linspace(self.lo, self.hi, resolution)]

    def to_dict(self) -> dict:
        if self.kind == CATEGORICAL:
            return {"name": self.name, "kind": self.kind, "labels": list(self.labels)}
        return {"name": self.name, "kind": self.kind, "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class HyperParamAssignment:
    model_id: ModelId
    values: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "model_id", ModelId(self.model_id))
        object.__setattr__(self, "values", dict(self.values))

    def __hash__(self):
        return hash((self.model_id, tuple(sorted(self.values.items()))))

    def to_dict(self) -> dict:
        return dict(self.values)


@dataclass(frozen=True)
class HyperParamSpace:
    model_id: ModelId
    domains: tuple[ParamDomain, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "model_id", ModelId(self.model_id))
        object.__setattr__(self, "domains", tuple(self.domains))
        names = [d.name for d in self.domains]
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate parameter names in {names}")

    @property
    def names(self) -> list[str]:
        return [d.name for d in self.domains]

    def domain(self, name: str) -> ParamDomain:
        for d in self.domains:
            if d.name == name:
                return d
        raise KeyError(name)

    def validate(self, values: Mapping[str, Any]) -> None:
        values = dict(values) if isinstance(values, Mapping) else dict(values.values)
        if set(values) != set(self.names):
            raise InvalidAssignment(
                f"{self.model_id.value} expects parameters {self.names}, got {sorted(values)}")
        for d in self.domains:
            if not d.contains(values[d.name]):
                raise InvalidAssignment(f"{d.name}={values[d.name]!r} outside its domain")

    def assign(self, values: Mapping[str, Any]) -> HyperParamAssignment:
        clean = {}
        for d in self.domains:
            v = values[d.name] if d.name in values else None
            if d.kind == INTEGER and isinstance(v, (np.integer, float)) and float(v).is_integer():
                v = int(v)
            elif d.kind == CONTINUOUS and isinstance(v, (int, np.number)) and not isinstance(v, bool):
                v = float(v)
            clean[d.name] = v
        extra = set(values) - set(self.names)
        if extra:
            raise InvalidAssignment(f"unknown parameters {sorted(extra)} for {self.model_id.value}")
        self.validate(clean)
        return HyperParamAssignment(self.model_id, clean)

    def sample(self, rng: np.random.Generator) -> HyperParamAssignment:
        return HyperParamAssignment(self.model_id, {d.name: d.sample(rng) for d in self.domains})

    def grid_size(self, resolution: int) -> int:
        size = 1
        for d in self.domains:
            size *= len(d.grid(resolution))
        return size


_UNIT = (0.05, 0.95)


def default_space(model_id) -> HyperParamSpace:
    model_id = ModelId(model_id)
    c = ParamDomain.continuous
    spaces = {
        ModelId.THETA: (c("theta", 0.0, 3.0),),
        ModelId.HOLT_LINEAR: (c("alpha", *_UNIT), c("beta", *_UNIT)),
        ModelId.HOLT_WINTERS: (c("alpha", *_UNIT), c("beta", *_UNIT), c("gamma", *_UNIT)),
        ModelId.STLF: (ParamDomain.categorical("base_method", ("naive", "ses", "linear")),
                       c("alpha", *_UNIT)),
        ModelId.ARIMA: (ParamDomain.integer("p", 0, 3), ParamDomain.integer("d", 0, 2),
                        ParamDomain.integer("q", 0, 3)),
        ModelId.SEASONAL_NAIVE: (),
    }
    return HyperParamSpace(model_id, spaces[model_id])


def default_spaces() -> dict[ModelId, HyperParamSpace]:
    return {m: default_space(m) for m in ModelId.ordered()}
