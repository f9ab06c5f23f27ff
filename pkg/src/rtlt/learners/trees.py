"""Gradient-boosted regression trees with a max-over-paths objective.

Each endpoint owns a group of path rows and a single arrival label; the
endpoint prediction is the max over its rows. Per boosting round the
squared-error gradient of each endpoint routes to its current argmax row
(ties to the lowest path index) and a tree is fit to those residuals.
Trees are grown by exact greedy variance-reduction splits (scikit-learn's
splitter) and re-serialized as plain arrays, so trained models predict
without scikit-learn and round-trip bit-exactly through JSON.

A deterministic step-halving guard keeps the recorded training loss
non-increasing: if a round's update would raise the max-composed loss,
its leaf values are scaled down (possibly to zero).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.tree import DecisionTreeRegressor

from ..errors import EmptyBatch, EmptyPathSet, NonFiniteLabel


@dataclass
class LearnerConfig:
    n_trees: int = 100
    max_depth: int = 45
    learning_rate: float = 0.1
    min_samples_leaf: int = 5
    seed: int = 0


@dataclass
class RegressionTree:
    """Array-form regression tree; children -1 marks a leaf."""

    children_left: list[int]
    children_right: list[int]
    feature: list[int]
    threshold: list[float]
    value: list[float]

    @classmethod
    def from_sklearn(cls, tree_) -> "RegressionTree":
        return cls(
            children_left=[int(x) for x in tree_.children_left],
            children_right=[int(x) for x in tree_.children_right],
            feature=[int(x) for x in tree_.feature],
            threshold=[float(x) for x in tree_.threshold],
            value=[float(x) for x in tree_.value[:, 0, 0]],
        )

    def scale_values(self, factor: float):
        self.value = [v * factor for v in self.value]

    def set_leaf_values(self, leaf_values: dict[int, float]):
        for node, v in leaf_values.items():
            self.value[node] = v

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index per row (level-synchronous descent)."""
        cl = np.asarray(self.children_left)
        cr = np.asarray(self.children_right)
        ft = np.maximum(np.asarray(self.feature), 0)
        th = np.asarray(self.threshold)
        node = np.zeros(len(X), dtype=np.int64)
        while True:
            leaf = cl[node] == -1
            if leaf.all():
                return node
            f = ft[node]
            go_left = X[np.arange(len(X)), f] <= th[node]
            nxt = np.where(go_left, cl[node], cr[node])
            node = np.where(leaf, node, nxt)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(self.value)[self.apply(X)]

    def to_json_obj(self) -> dict:
        return {"cl": self.children_left, "cr": self.children_right,
                "f": self.feature, "t": self.threshold, "v": self.value}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "RegressionTree":
        return cls(children_left=[int(x) for x in obj["cl"]],
                   children_right=[int(x) for x in obj["cr"]],
                   feature=[int(x) for x in obj["f"]],
                   threshold=[float(x) for x in obj["t"]],
                   value=[float(x) for x in obj["v"]])


@dataclass
class TreeEnsembleModel:
    """prediction = base_score + learning_rate * sum of tree leaf values."""

    trees: list[RegressionTree] = field(default_factory=list)
    learning_rate: float = 0.1
    base_score: float = 0.0
    feature_names: list[str] = field(default_factory=list)
    train_loss: list[float] = field(default_factory=list)

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        out = np.full(len(X), self.base_score, dtype=np.float64)
        for t in self.trees:
            out += self.learning_rate * t.predict(X)
        return out

    def to_json_obj(self) -> dict:
        return {"kind": "tree-ensemble",
                "trees": [t.to_json_obj() for t in self.trees],
                "learning_rate": self.learning_rate,
                "base_score": self.base_score,
                "feature_names": self.feature_names,
                "train_loss": self.train_loss}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "TreeEnsembleModel":
        return cls(trees=[RegressionTree.from_json_obj(t) for t in obj["trees"]],
                   learning_rate=float(obj["learning_rate"]),
                   base_score=float(obj["base_score"]),
                   feature_names=[str(s) for s in obj["feature_names"]],
                   train_loss=[float(x) for x in obj["train_loss"]])


@dataclass
class EndpointGroupedBatch:
    """Row groups per endpoint: features for each sampled path, one label."""

    X: np.ndarray                 # (n_rows, d)
    y: np.ndarray                 # (n_endpoints,)
    starts: np.ndarray            # first row of each endpoint group
    counts: np.ndarray            # rows per endpoint
    endpoint_keys: list[tuple[str, str]]   # (design_id, endpoint_name)

    def __post_init__(self):
        if len(self.y) == 0:
            raise EmptyBatch("no endpoints in batch")
        if not np.all(np.isfinite(self.y)):
            raise NonFiniteLabel("labels contain non-finite values")
        if np.any(self.counts < 1):
            raise EmptyBatch("endpoint with zero paths")

    @property
    def n_endpoints(self) -> int:
        return len(self.y)

    @property
    def row_endpoint(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_endpoints), self.counts)

    @classmethod
    def from_feature_table(cls, table, basis: str) -> "EndpointGroupedBatch":
        rows = [r for r in table.rows if r.basis == basis]
        if not rows:
            raise EmptyBatch(f"no rows for basis {basis}")
        X, y, starts, counts, keys = [], [], [], [], []
        prev = None
        for r in rows:
            key = (r.design_id, r.endpoint_name)
            if key != prev:
                starts.append(len(X))
                counts.append(0)
                keys.append(key)
                y.append(r.label if r.label is not None else np.nan)
                prev = key
            X.append(r.features)
            counts[-1] += 1
        return cls(X=np.asarray(X, dtype=np.float64),
                   y=np.asarray(y, dtype=np.float64),
                   starts=np.asarray(starts, dtype=np.int64),
                   counts=np.asarray(counts, dtype=np.int64),
                   endpoint_keys=keys)


def _segment_max(pred: np.ndarray, starts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-segment max and its first (lowest-index) row."""
    seg_max = np.maximum.reduceat(pred, starts)
    n_ep = len(starts)
    counts = np.diff(np.append(starts, len(pred)))
    row_ep = np.repeat(np.arange(n_ep), counts)
    idx = np.where(pred == seg_max[row_ep], np.arange(len(pred)), len(pred))
    argmax_rows = np.minimum.reduceat(idx, starts)
    return seg_max, argmax_rows


def fit_boosted(X: np.ndarray, y: np.ndarray, starts: np.ndarray,
                config: LearnerConfig, feature_names: list[str] | None = None,
                ) -> TreeEnsembleModel:
    """Boosting loop shared by the grouped (max-loss) and plain paths.

    `starts` delimits contiguous endpoint groups; with singleton groups
    this is ordinary squared-error gradient boosting.
    """
    n_rows = len(X)
    if n_rows == 0 or len(y) == 0:
        raise EmptyBatch("empty training matrix")
    if not np.all(np.isfinite(y)):
        raise NonFiniteLabel("labels contain non-finite values")
    lr = config.learning_rate
    model = TreeEnsembleModel(learning_rate=lr,
                              base_score=float(np.mean(y)),
                              feature_names=list(feature_names or []))
    pred = np.full(n_rows, model.base_score, dtype=np.float64)
    X32 = np.ascontiguousarray(X, dtype=np.float32)  # sklearn apply() input

    for round_i in range(config.n_trees):
        ep_pred, argmax_rows = _segment_max(pred, starts)
        resid = y - ep_pred
        loss = float(np.mean(resid ** 2))
        model.train_loss.append(loss)
        sk = DecisionTreeRegressor(max_depth=config.max_depth,
                                   min_samples_leaf=min(config.min_samples_leaf,
                                                        max(1, len(argmax_rows))),
                                   random_state=(config.seed * 100003 + round_i) % (2 ** 31))
        sk.fit(X[argmax_rows], resid)
        tree = RegressionTree.from_sklearn(sk.tree_)
        leaf_values = sk.tree_.value[:, 0, 0].astype(np.float64)
        delta = leaf_values[sk.tree_.apply(X32)]

        scale = lr
        chosen = 0.0
        for _ in range(31):
            new_max, _ = _segment_max(pred + scale * delta, starts)
            new_loss = float(np.mean((y - new_max) ** 2))
            if new_loss <= loss + 1e-15:
                chosen = scale
                break
            scale *= 0.5
        if chosen != lr:
            tree.scale_values(chosen / lr)
        if chosen:
            pred += chosen * delta
        model.trees.append(tree)

    ep_pred, _ = _segment_max(pred, starts)
    model.train_loss.append(float(np.mean((y - ep_pred) ** 2)))
    return model


def train_bitwise(batch: EndpointGroupedBatch, config: LearnerConfig | None = None,
                  feature_names: list[str] | None = None) -> TreeEnsembleModel:
    """Bit-wise endpoint arrival model under the max-over-paths loss."""
    config = config or LearnerConfig()
    return fit_boosted(batch.X, batch.y, batch.starts, config, feature_names)


def train_signal_regressor(X, y, config: LearnerConfig | None = None,
                           feature_names: list[str] | None = None) -> TreeEnsembleModel:
    """Plain squared-error boosting over signal-level rows."""
    config = config or LearnerConfig()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    starts = np.arange(len(y), dtype=np.int64)
    return fit_boosted(X, y, starts, config, feature_names)


def predict_endpoint_at(model: TreeEnsembleModel, paths_X) -> float:
    """Endpoint arrival prediction: max over per-path predictions."""
    paths_X = np.asarray(paths_X, dtype=np.float64)
    if paths_X.ndim == 1:
        paths_X = paths_X[None, :]
    if len(paths_X) == 0:
        raise EmptyPathSet("endpoint has no path rows")
    return float(np.max(model.predict(paths_X)))


__all__ = [
    "LearnerConfig", "RegressionTree", "TreeEnsembleModel", "EndpointGroupedBatch",
    "fit_boosted", "train_bitwise", "train_signal_regressor", "predict_endpoint_at",
]
