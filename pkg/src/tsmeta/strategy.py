"""The nine (model selection x hyper-parameter tuning) strategies."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass


class ModelSelection(str, enum.Enum):
    ENSEMBLE = "ENSEMBLE"
    RANDOM_MODEL = "RANDOM_MODEL"
    SSL_MS = "SSL_MS"


class HPTMode(str, enum.Enum):
    EXHAUSTIVE = "EXHAUSTIVE"
    RANDOM_HP = "RANDOM_HP"
    SSL_HPT = "SSL_HPT"


@dataclass(frozen=True)
class Strategy:
    model_selection: ModelSelection
    hpt: HPTMode

    def __post_init__(self):
        object.__setattr__(self, "model_selection", ModelSelection(self.model_selection))
        object.__setattr__(self, "hpt", HPTMode(self.hpt))

    @property
    def name(self) -> str:
        return f"{self.model_selection.value}+{self.hpt.value}"

    @classmethod
    def parse(cls, name: str) -> Strategy:
        sel, _, hpt = name.partition("+")
        return cls(ModelSelection(sel), HPTMode(hpt))

    @classmethod
    def all(cls) -> list[Strategy]:
        """Every strategy, selection-major, in table order."""
        return [cls(s, h) for s, h in itertools.product(ModelSelection, HPTMode)]


BASELINE = Strategy(ModelSelection.RANDOM_MODEL, HPTMode.RANDOM_HP)
