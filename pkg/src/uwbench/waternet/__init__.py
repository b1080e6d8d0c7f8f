"""Gated fusion network: layers, model, loss, trainer, and weight files."""

from .layers import ConvLayer, conv_backward, conv_forward
from .loss import (
    FeatureExtractor,
    identity_extractor,
    perceptual_loss,
    perceptual_loss_tensors,
    random_extractor,
)
from .model import (
    WaterNetConfig,
    WaterNetModel,
    forward,
    fuse,
    init_waternet,
)
from .train import TrainConfig, Trainer, TrainingDiverged, augment, learning_rate
from .weights_io import (
    WeightsCorruptError,
    WeightsError,
    WeightsVersionError,
    load_extractor,
    load_model,
    save_extractor,
    save_model,
)

__all__ = [
    "ConvLayer",
    "conv_forward",
    "conv_backward",
    "FeatureExtractor",
    "identity_extractor",
    "random_extractor",
    "perceptual_loss",
    "perceptual_loss_tensors",
    "WaterNetConfig",
    "WaterNetModel",
    "init_waternet",
    "forward",
    "fuse",
    "TrainConfig",
    "Trainer",
    "TrainingDiverged",
    "augment",
    "learning_rate",
    "save_model",
    "load_model",
    "save_extractor",
    "load_extractor",
    "WeightsError",
    "WeightsVersionError",
    "WeightsCorruptError",
]
