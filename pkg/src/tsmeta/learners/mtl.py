"""Hard-parameter-sharing network predicting one model's hyper-parameters.

A shared 40-64-32 ReLU trunk feeds one linear head per hyper-parameter.
Categorical (and integer) parameters get softmax heads trained with
cross-entropy; continuous ones get a single sigmoid output trained with MSE
on the value rescaled to [0, 1]. The total loss is sum(CE) + sum(MSE) / s.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np

from ..errors import NoTrainingRows, ValidationError
from ..features import N_FEATURES
from ..models import ModelId
from ..tuning import HyperParamAssignment, HyperParamSpace, default_space
from ..tuning.space import CATEGORICAL, CONTINUOUS, INTEGER

HIDDEN = (64, 32)


@dataclass(frozen=True)
class HeadSpec:
    name: str
    categorical: bool
    labels: tuple = ()
    lo: float = 0.0
    hi: float = 1.0

    @property
    def width(self) -> int:
        return len(self.labels) if self.categorical else 1

    def target(self, value) -> float:
        """Class index for categorical heads, [0, 1]-scaled value otherwise."""
        if self.categorical:
            return float(self.labels.index(value))
        if self.hi == self.lo:
            return 0.0
        return float(np.clip((float(value) - self.lo) / (self.hi - self.lo), 0.0, 1.0))

    def decode(self, out: np.ndarray):
        if self.categorical:
            return self.labels[int(np.argmax(out))]
        return float(np.clip(self.lo + _sigmoid(out[0]) * (self.hi - self.lo), self.lo, self.hi))

    def to_json(self) -> dict:
        return {"name": self.name, "categorical": self.categorical, "labels": list(self.labels),
                "lo": self.lo, "hi": self.hi}

    @classmethod
    def from_json(cls, obj: dict) -> HeadSpec:
        return cls(obj["name"], bool(obj["categorical"]), tuple(obj["labels"]),
                   float(obj["lo"]), float(obj["hi"]))


def heads_for_space(space: HyperParamSpace) -> tuple[HeadSpec, ...]:
    heads = []
    for d in space.domains:
        if d.kind == CATEGORICAL:
            heads.append(HeadSpec(d.name, True, tuple(d.labels)))
        elif d.kind == INTEGER:
            heads.append(HeadSpec(d.name, True, tuple(range(int(d.lo), int(d.hi) + 1))))
        elif d.kind == CONTINUOUS:
            heads.append(HeadSpec(d.name, False, (), float(d.lo), float(d.hi)))
    return tuple(heads)


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _log_softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


@dataclass(frozen=True)
class LossParts:
    total: float
    ce: float
    mse: float


@dataclass(eq=False)
class MultiTaskNet:
    model_id: ModelId
    heads: tuple[HeadSpec, ...]
    params: dict[str, np.ndarray]
    s: float = 1.0
    loss_trace: list[float] = field(default_factory=list)

    # parameter names in a fixed order (trunk first, then heads)
    def param_names(self) -> list[str]:
        names = ["W1", "b1", "W2", "b2"]
        for i in range(len(self.heads)):
            names += [f"H{i}_W", f"H{i}_b"]
        return names

    def head_param_names(self, numeric: bool) -> list[str]:
        out = []
        for i, h in enumerate(self.heads):
            if h.categorical != numeric:
                out += [f"H{i}_W", f"H{i}_b"]
        return out

    def _forward(self, X):
        P = self.params
        a1 = X @ P["W1"] + P["b1"]
        h1 = np.maximum(a1, 0.0)
        a2 = h1 @ P["W2"] + P["b2"]
        h2 = np.maximum(a2, 0.0)
        outs = [h2 @ P[f"H{i}_W"] + P[f"H{i}_b"] for i in range(len(self.heads))]
        return (X, a1, h1, a2, h2), outs

    def outputs(self, X: np.ndarray) -> list[np.ndarray]:
        return self._forward(np.atleast_2d(np.asarray(X, dtype=float)))[1]

    def loss(self, X: np.ndarray, T: np.ndarray) -> LossParts:
        """Mean-over-batch losses; ``T`` has one column per head."""
        _, outs = self._forward(X)
        ce = mse = 0.0
        for i, (h, z) in enumerate(zip(self.heads, outs)):
            if h.categorical:
                ce += float(-np.mean(_log_softmax(z)[np.arange(len(X)), T[:, i].astype(int)]))
            else:
                mse += float(np.mean((_sigmoid(z[:, 0]) - T[:, i]) ** 2))
        return LossParts(ce + mse / self.s, ce, mse)

    def gradients(self, X: np.ndarray, T: np.ndarray) -> dict[str, np.ndarray]:
        (X, a1, h1, a2, h2), outs = self._forward(X)
        P = self.params
        n = len(X)
        grads = {}
        dh2 = np.zeros_like(h2)
        for i, (h, z) in enumerate(zip(self.heads, outs)):
            if h.categorical:
                dz = np.exp(_log_softmax(z))
                dz[np.arange(n), T[:, i].astype(int)] -= 1.0
                dz /= n
            else:
                sig = _sigmoid(z[:, 0])
                dz = (2.0 / (n * self.s) * (sig - T[:, i]) * sig * (1.0 - sig))[:, None]
            grads[f"H{i}_W"] = h2.T @ dz
            grads[f"H{i}_b"] = dz.sum(axis=0)
            dh2 += dz @ P[f"H{i}_W"].T
        da2 = dh2 * (a2 > 0)
        grads["W2"] = h1.T @ da2
        grads["b2"] = da2.sum(axis=0)
        da1 = (da2 @ P["W2"].T) * (a1 > 0)
        grads["W1"] = X.T @ da1
        grads["b1"] = da1.sum(axis=0)
        return grads

    def to_json(self) -> dict:
        return {"model_id": self.model_id.value, "s": self.s,
                "heads": [h.to_json() for h in self.heads],
                "params": {k: self.params[k].tolist() for k in self.param_names()},
                "loss_trace": list(self.loss_trace)}

    @classmethod
    def from_json(cls, obj: dict) -> MultiTaskNet:
        heads = tuple(HeadSpec.from_json(h) for h in obj["heads"])
        net = cls(ModelId(obj["model_id"]), heads, {}, float(obj["s"]), list(obj["loss_trace"]))
        net.params = {k: np.array(obj["params"][k], dtype=float) for k in net.param_names()}
        return net


def net_rng(seed: int, model_id: ModelId) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), zlib.crc32(model_id.value.encode())]))


def init_net(model_id, heads: tuple[HeadSpec, ...], s: float = 1.0, seed: int = 0,
             n_inputs: int = N_FEATURES) -> MultiTaskNet:
    """Glorot-uniform weights, zero biases."""
    model_id = ModelId(model_id)
    if not s > 0:
        raise ValidationError("loss scale s must be positive")
    rng = net_rng(seed, model_id)

    def glorot(fan_in, fan_out):
        lim = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-lim, lim, size=(fan_in, fan_out))

    params = {"W1": glorot(n_inputs, HIDDEN[0]), "b1": np.zeros(HIDDEN[0]),
              "W2": glorot(HIDDEN[0], HIDDEN[1]), "b2": np.zeros(HIDDEN[1])}
    for i, h in enumerate(heads):
        params[f"H{i}_W"] = glorot(HIDDEN[1], h.width)
        params[f"H{i}_b"] = np.zeros(h.width)
    return MultiTaskNet(model_id, tuple(heads), params, float(s))


def targets_from_records(model_id, records, heads) -> tuple[np.ndarray, np.ndarray]:
    """Rows of records whose tuning succeeded for ``model_id``, and their targets."""
    model_id = ModelId(model_id)
    keep, T = [], []
    for r, rec in enumerate(records):
        out = rec.per_model.get(model_id)
        if out is None or out.failed:
            continue
        keep.append(r)
        T.append([h.target(out.params[h.name]) for h in heads])
    return np.array(keep, dtype=np.int64), np.array(T, dtype=float).reshape(len(keep), len(heads))


@dataclass(frozen=True)
class TrainTrace:
    losses: list[float]
    numeric_update_norms: list[float]


def fit_net(net: MultiTaskNet, X: np.ndarray, T: np.ndarray, epochs: int = 200,
            lr: float = 0.05, batch: int = 32, seed: int = 0,
            momentum: float = 0.9) -> TrainTrace:
    """Mini-batch SGD with momentum, in place. Records full-data loss per epoch."""
    if len(X) == 0:
        raise NoTrainingRows(f"no training rows for {net.model_id.value}")
    rng = net_rng(seed + 1, net.model_id)
    names = net.param_names()
    numeric = net.head_param_names(numeric=True)
    vel = {k: np.zeros_like(net.params[k]) for k in names}
    losses, norms = [net.loss(X, T).total], []
    for _ in range(epochs):
        before = {k: net.params[k].copy() for k in numeric}
        order = rng.permutation(len(X))
        for start in range(0, len(X), batch):
            idx = order[start:start + batch]
            grads = net.gradients(X[idx], T[idx])
            for k in names:
                vel[k] = momentum * vel[k] - lr * grads[k]
                net.params[k] = net.params[k] + vel[k]
        norms.append(float(np.sqrt(sum(np.sum((net.params[k] - before[k]) ** 2) for k in numeric))))
        losses.append(net.loss(X, T).total)
    net.loss_trace = losses
    return TrainTrace(losses, norms)


def train_mtl(model_id, records, X: np.ndarray, s: float = 1.0, epochs: int = 200,
              lr: float = 0.05, batch: int = 32, seed: int = 0,
              space: HyperParamSpace | None = None) -> MultiTaskNet:
    """Train one net on the records where ``model_id`` was tuned successfully.

    ``X`` holds the standardized feature rows aligned with ``records``.
    """
    model_id = ModelId(model_id)
    space = space or default_space(model_id)
    heads = heads_for_space(space)
    net = init_net(model_id, heads, s=s, seed=seed)
    rows, T = targets_from_records(model_id, records, heads)
    if len(rows) == 0:
        raise NoTrainingRows(f"every record failed for {model_id.value}")
    if heads:
        fit_net(net, np.asarray(X, dtype=float)[rows], T, epochs=epochs, lr=lr, batch=batch, seed=seed)
    return net


def predict_hparams(net: MultiTaskNet, z: np.ndarray,
                    space: HyperParamSpace | None = None) -> HyperParamAssignment:
    space = space or default_space(net.model_id)
    outs = net.outputs(z)
    values = {h.name: h.decode(o[0]) for h, o in zip(net.heads, outs)}
    return space.assign(values)
