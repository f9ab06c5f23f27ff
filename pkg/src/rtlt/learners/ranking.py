"""Pairwise learning-to-rank for endpoint criticality (LambdaMART).

Each design is a query, its signal-wise endpoints are the documents, and
relevance comes from the label criticality group (group 1 -> 3 ... group
4 -> 0). Lambda gradients are computed within queries only; trees are
grown on the lambdas with Newton leaf values sum(lambda)/sum(weight).
Only relative score order is meaningful.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from sklearn.tree import DecisionTreeRegressor

from ..errors import DegenerateQuery
from .trees import RegressionTree

logger = logging.getLogger(__name__)


@dataclass
class RankConfig:
    n_trees: int = 100
    max_depth: int = 30
    learning_rate: float = 0.1
    min_samples_leaf: int = 5
    seed: int = 0


@dataclass
class RankModel:
    trees: list[RegressionTree] = field(default_factory=list)
    learning_rate: float = 0.1

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        out = np.zeros(len(X))
        for t in self.trees:
            out += self.learning_rate * t.predict(X)
        return out

    def to_json_obj(self) -> dict:
        return {"kind": "rank-lambdamart",
                "trees": [t.to_json_obj() for t in self.trees],
                "learning_rate": self.learning_rate}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "RankModel":
        return cls(trees=[RegressionTree.from_json_obj(t) for t in obj["trees"]],
                   learning_rate=float(obj["learning_rate"]))


def _query_lambdas(scores: np.ndarray, rel: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """LambdaMART lambdas/weights for one query (vectorized over pairs)."""
    n = len(scores)
    order = np.lexsort((np.arange(n), -scores))
    ranks = np.empty(n)
    ranks[order] = np.arange(1, n + 1)
    gains = (2.0 ** rel) - 1.0
    ideal = np.sort(gains)[::-1]
    idcg = float(np.sum(ideal / np.log2(np.arange(2, n + 2))))
    if idcg <= 0:
        idcg = 1.0
    disc = 1.0 / np.log2(1.0 + ranks)

    rel_gt = rel[:, None] > rel[None, :]
    sdiff = scores[:, None] - scores[None, :]
    rho = np.where(rel_gt, 1.0 / (1.0 + np.exp(np.clip(sdiff, -60, 60))), 0.0)
    dndcg = np.where(rel_gt,
                     np.abs((gains[:, None] - gains[None, :])
                            * (disc[:, None] - disc[None, :])) / idcg,
                     0.0)
    contrib = rho * dndcg
    wcontrib = rho * (1.0 - rho) * dndcg
    lam = contrib.sum(axis=1) - contrib.sum(axis=0)
    w = wcontrib.sum(axis=1) + wcontrib.sum(axis=0)
    return lam, w


def train_rank(queries: list[tuple[np.ndarray, np.ndarray]],
               config: RankConfig | None = None) -> RankModel:
    """Train on (item features, integer relevance) per query.

    Queries whose labels are all equal (or with fewer than two items)
    carry no pairwise signal and are skipped with a warning.
    """
    config = config or RankConfig()
    usable = []
    for qi, (X, rel) in enumerate(queries):
        X = np.asarray(X, dtype=np.float64)
        rel = np.asarray(rel, dtype=np.float64)
        if len(rel) < 2 or np.all(rel == rel[0]):
            logger.warning("rank query %d is degenerate (n=%d); skipped", qi, len(rel))
            continue
        usable.append((X, rel))
    if not usable:
        raise DegenerateQuery("no query with at least two distinct relevance labels")

    X_all = np.concatenate([q[0] for q in usable], axis=0)
    rels = [q[1] for q in usable]
    bounds = np.cumsum([0] + [len(r) for r in rels])
    scores = np.zeros(len(X_all))
    model = RankModel(learning_rate=config.learning_rate)

    for round_i in range(config.n_trees):
        lam = np.zeros(len(X_all))
        w = np.zeros(len(X_all))
        for qi, rel in enumerate(rels):
            lo, hi = bounds[qi], bounds[qi + 1]
            ql, qw = _query_lambdas(scores[lo:hi], rel)
            lam[lo:hi] = ql
            w[lo:hi] = qw
        sk = DecisionTreeRegressor(max_depth=config.max_depth,
                                   min_samples_leaf=min(config.min_samples_leaf, len(X_all)),
                                   random_state=(config.seed * 100003 + round_i) % (2 ** 31))
        sk.fit(X_all, lam)
        tree = RegressionTree.from_sklearn(sk.tree_)
        leaves = tree.apply(X_all)
        leaf_values = {}
        for leaf in np.unique(leaves):
            mask = leaves == leaf
            denom = float(w[mask].sum())
            leaf_values[int(leaf)] = float(lam[mask].sum() / denom) if denom > 0 else 0.0
        tree.set_leaf_values(leaf_values)
        model.trees.append(tree)
        scores += config.learning_rate * tree.predict(X_all)
    return model


__all__ = ["RankConfig", "RankModel", "train_rank"]
