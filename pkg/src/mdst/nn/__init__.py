from .feature import (
    CHANNEL_WIDTHS,
    TAP_NAMES,
    Activations,
    FeatureNetwork,
    feature_backward,
    feature_forward,
)
from .classifier import (
    ClassifierModel,
    TrainConfig,
    classifier_evaluate,
    classifier_train,
    load_checkpoint,
    save_checkpoint,
)
from .ops import Adam, conv_forward

__all__ = [
    "Activations",
    "Adam",
    "CHANNEL_WIDTHS",
    "ClassifierModel",
    "FeatureNetwork",
    "TAP_NAMES",
    "TrainConfig",
    "classifier_evaluate",
    "classifier_train",
    "conv_forward",
    "feature_backward",
    "feature_forward",
    "load_checkpoint",
    "save_checkpoint",
]
