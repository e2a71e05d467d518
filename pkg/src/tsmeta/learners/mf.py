"""Per-model ridge embeddings so that features @ V.T approximates MAPEs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import SingularSystem, ValidationError
from ..models import ModelId


@dataclass(frozen=True, eq=False)
class MFModel:
    V: np.ndarray
    lam: float
    model_ids: tuple[ModelId, ...]

    def scores(self, u: np.ndarray) -> np.ndarray:
        return self.V @ np.asarray(u, dtype=float)

    def to_json(self) -> dict:
        return {"V": self.V.tolist(), "lam": self.lam, "model_ids": [m.value for m in self.model_ids]}

    @classmethod
    def from_json(cls, obj: dict) -> MFModel:
        return cls(np.array(obj["V"], dtype=float), float(obj["lam"]),
                   tuple(ModelId(m) for m in obj["model_ids"]))


def mf_fit(A: np.ndarray, U: np.ndarray, lam: float = 0.0,
           model_ids=None) -> MFModel:
    """Column-wise ridge least squares over the observed (non-NaN) entries of A."""
    A = np.asarray(A, dtype=float)
    U = np.asarray(U, dtype=float)
    if A.ndim != 2 or U.ndim != 2 or A.shape[0] != U.shape[0]:
        raise ValidationError("A must be N x K and U must be N x d with matching N")
    if lam < 0:
        raise ValidationError("ridge penalty must be non-negative")
    model_ids = tuple(ModelId(m) for m in (model_ids or ModelId.ordered()))
    if len(model_ids) != A.shape[1]:
        raise ValidationError("one model id per column of A is required")
    d = U.shape[1]
    V = np.zeros((A.shape[1], d))
    for k in range(A.shape[1]):
        seen = np.isfinite(A[:, k])
        Uk = U[seen]
        gram = Uk.T @ Uk + lam * np.eye(d)
        if lam == 0 and np.linalg.matrix_rank(Uk) < d:
            raise SingularSystem(f"column {model_ids[k].value}: features are rank deficient")
        V[k] = np.linalg.solve(gram, Uk.T @ A[seen, k])
    return MFModel(V, float(lam), model_ids)


def mf_rank(mf: MFModel, u_star: np.ndarray) -> list[tuple[ModelId, float]]:
    """Models by ascending predicted MAPE; ties keep model order."""
    scores = mf.scores(u_star)
    order = np.argsort(scores, kind="stable")
    return [(mf.model_ids[i], float(scores[i])) for i in order]
