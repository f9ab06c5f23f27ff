"""Multilayer perceptron alternative for the bit-wise arrival model.

Three fully connected layers (hidden width 512, rectified activations)
trained with the same max-over-paths squared loss as the tree model: the
gradient of each endpoint's loss flows through the argmax path's forward
pass only (subgradient; ties to the lowest path index). Implemented in
plain numpy so analytic gradients can be checked against central finite
differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DivergenceDetected, EmptyBatch, NonFiniteLabel


@dataclass
class MlpConfig:
    hidden_dim: int = 512
    n_layers: int = 3
    learning_rate: float = 1e-3
    epochs: int = 300
    seed: int = 0


class MlpModel:
    """Plain-numpy MLP: in -> hidden -> ... -> 1 with ReLU between layers."""

    def __init__(self, in_dim: int, config: MlpConfig | None = None):
        self.config = config or MlpConfig()
        cfg = self.config
        sizes = [in_dim] + [cfg.hidden_dim] * (cfg.n_layers - 1) + [1]
        rng = np.random.default_rng(cfg.seed)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for a, b in zip(sizes, sizes[1:]):
            self.weights.append(rng.normal(0.0, np.sqrt(2.0 / a), size=(a, b)))
            self.biases.append(np.zeros(b))
        self.train_loss: list[float] = []

    # -- forward / loss ------------------------------------------------------

    def forward(self, X: np.ndarray) -> np.ndarray:
        h = np.asarray(X, dtype=np.float64)
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ W + b
            if i < len(self.weights) - 1:
                h = np.maximum(h, 0.0)
        return h[:, 0]

    predict = forward

    def loss_and_grad(self, X: np.ndarray, y: np.ndarray, starts: np.ndarray,
                      ) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
        """Mean over endpoints of (max-over-paths prediction - label)^2.

        Returns (loss, dW list, db list). Only argmax rows receive
        gradient; ties break to the lowest path index.
        """
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        n_ep = len(starts)
        # forward with caches
        acts = [X]
        h = X
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ W + b
            if i < len(self.weights) - 1:
                h = np.maximum(h, 0.0)
            acts.append(h)
        preds = acts[-1][:, 0]

        counts = np.diff(np.append(starts, len(X)))
        row_ep = np.repeat(np.arange(n_ep), counts)
        seg_max = np.maximum.reduceat(preds, starts)
        idx = np.where(preds == seg_max[row_ep], np.arange(len(preds)), len(preds))
        argmax_rows = np.minimum.reduceat(idx, starts)

        err = seg_max - y
        loss = float(np.mean(err ** 2))

        d_out = np.zeros_like(preds)
        d_out[argmax_rows] = 2.0 * err / n_ep

        dWs = [np.zeros_like(W) for W in self.weights]
        dbs = [np.zeros_like(b) for b in self.biases]
        delta = d_out[:, None]
        for i in range(len(self.weights) - 1, -1, -1):
            a_in = acts[i]
            dWs[i] = a_in.T @ delta
            dbs[i] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.weights[i].T) * (acts[i] > 0.0)
        return loss, dWs, dbs

    # -- parameter vector (for gradient checking) ------------------------------

    def get_params(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.weights + self.biases])

    def set_params(self, vec: np.ndarray):
        off = 0
        for p in self.weights + self.biases:
            n = p.size
            p[...] = vec[off:off + n].reshape(p.shape)
            off += n

    def grad_vector(self, X, y, starts) -> tuple[float, np.ndarray]:
        loss, dWs, dbs = self.loss_and_grad(X, y, starts)
        return loss, np.concatenate([g.ravel() for g in dWs + dbs])

    # -- serialization ----------------------------------------------------------

    def to_json_obj(self) -> dict:
        return {"kind": "mlp",
                "config": {"hidden_dim": self.config.hidden_dim,
                           "n_layers": self.config.n_layers,
                           "learning_rate": self.config.learning_rate,
                           "epochs": self.config.epochs,
                           "seed": self.config.seed},
                "in_dim": self.weights[0].shape[0],
                "weights": [w.tolist() for w in self.weights],
                "biases": [b.tolist() for b in self.biases],
                "train_loss": self.train_loss}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "MlpModel":
        cfg = MlpConfig(**obj["config"])
        model = cls(int(obj["in_dim"]), cfg)
        model.weights = [np.asarray(w, dtype=np.float64) for w in obj["weights"]]
        model.biases = [np.asarray(b, dtype=np.float64) for b in obj["biases"]]
        model.train_loss = [float(x) for x in obj["train_loss"]]
        return model


def train_bitwise_mlp(batch, config: MlpConfig | None = None) -> MlpModel:
    """Full-batch Adam on the max-over-paths squared loss."""
    config = config or MlpConfig()
    X, y, starts = batch.X, batch.y, batch.starts
    if len(y) == 0:
        raise EmptyBatch("no endpoints in batch")
    if not np.all(np.isfinite(y)):
        raise NonFiniteLabel("labels contain non-finite values")
    model = MlpModel(X.shape[1], config)

    params = [*model.weights, *model.biases]
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    for step in range(1, config.epochs + 1):
        loss, dWs, dbs = model.loss_and_grad(X, y, starts)
        if not np.isfinite(loss):
            raise DivergenceDetected(f"training loss became {loss} at epoch {step}")
        model.train_loss.append(loss)
        grads = [*dWs, *dbs]
        for i, (p, g) in enumerate(zip(params, grads)):
            m[i] = beta1 * m[i] + (1 - beta1) * g
            v[i] = beta2 * v[i] + (1 - beta2) * g * g
            mh = m[i] / (1 - beta1 ** step)
            vh = v[i] / (1 - beta2 ** step)
            p -= config.learning_rate * mh / (np.sqrt(vh) + eps)
    loss, _, _ = model.loss_and_grad(X, y, starts)
    model.train_loss.append(float(loss))
    return model


__all__ = ["MlpConfig", "MlpModel", "train_bitwise_mlp"]
