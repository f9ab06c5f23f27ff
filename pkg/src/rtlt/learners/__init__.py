"""Learners: boosted-tree and MLP endpoint arrival models with the
max-over-sampled-paths loss, signal-level regression, pairwise
learning-to-rank, and design-level TNS/WNS heads."""

from .trees import (EndpointGroupedBatch, LearnerConfig, RegressionTree,
                    TreeEnsembleModel, predict_endpoint_at, train_bitwise,
                    train_signal_regressor)
from .mlp import MlpConfig, MlpModel, train_bitwise_mlp
from .ranking import RankConfig, RankModel, train_rank
from .bundle import MODEL_SCHEMA, ModelBundle, load_model, save_model

__all__ = [
    "EndpointGroupedBatch", "LearnerConfig", "RegressionTree", "TreeEnsembleModel",
    "predict_endpoint_at", "train_bitwise", "train_signal_regressor",
    "MlpConfig", "MlpModel", "train_bitwise_mlp",
    "RankConfig", "RankModel", "train_rank",
    "MODEL_SCHEMA", "ModelBundle", "load_model", "save_model",
]
