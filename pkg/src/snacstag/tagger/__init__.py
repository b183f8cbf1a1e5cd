from ._kernels import HAS_NUMBA
from .baseline import BaselineModel, baseline_tag, train_baseline
from .crf import (
    CrfConfig,
    CrfError,
    CrfModel,
    FeatureSeq,
    TrainingError,
    crf_loglik_grad,
    train_crf,
)
from .features import EmbeddingFeatures, TemplateFeatures, extract_features

__all__ = [
    "HAS_NUMBA",
    "BaselineModel",
    "baseline_tag",
    "train_baseline",
    "CrfConfig",
    "CrfError",
    "CrfModel",
    "FeatureSeq",
    "TrainingError",
    "crf_loglik_grad",
    "train_crf",
    "EmbeddingFeatures",
    "TemplateFeatures",
    "extract_features",
]
