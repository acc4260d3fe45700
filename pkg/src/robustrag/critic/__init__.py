from .features import DENSE_FEATURES, FeatureMap, FeatureVector, feature_map_version
from .losses import GroupLogits, MaskedGroupError, conf_loss, conf_loss_grad, rank_loss, rank_loss_grad, sigmoid
from .model import (
    CompiledGroup,
    CriticParams,
    EvidenceCritic,
    TrainConfig,
    TrainingError,
    VersionMismatchError,
    compile_groups,
    predict_robustness,
    score,
    total_loss_and_grad,
    train,
    write_training_log,
)
from .remote import RemoteCritic

__all__ = [
    "DENSE_FEATURES", "FeatureMap", "FeatureVector", "feature_map_version",
    "GroupLogits", "MaskedGroupError", "conf_loss", "conf_loss_grad", "rank_loss", "rank_loss_grad", "sigmoid",
    "CompiledGroup", "CriticParams", "EvidenceCritic", "TrainConfig", "TrainingError", "VersionMismatchError",
    "compile_groups", "predict_robustness", "score", "total_loss_and_grad", "train", "write_training_log",
    "RemoteCritic",
]
