"""Feature-space training loss with a pluggable frozen extractor.

The loss is the squared Euclidean distance between feature maps of the
enhanced and reference images, normalized by the feature dimensions
(channels x height x width) and summed over the batch. The extractor is a
frozen conv stack with optional 2x2 max-pool stages; its parameters never
receive updates, but gradients flow through it back to the enhanced image.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .layers import (
    ConvLayer,
    conv_backward_from_output,
    conv_forward,
    maxpool_backward,
    maxpool_forward,
)
from .model import image_to_tensor

__all__ = [
    "ExtractorStage",
    "FeatureExtractor",
    "identity_extractor",
    "random_extractor",
    "extract_features",
    "perceptual_loss_tensors",
    "perceptual_loss",
]


@dataclass
class ExtractorStage:
    conv: ConvLayer
    pool: bool = False


@dataclass
class FeatureExtractor:
    stages: list[ExtractorStage]
    tap_index: int  # stage whose activation is the feature map

    def __post_init__(self):
        if not 0 <= self.tap_index < len(self.stages):
            raise ValueError("tap_index out of range")


def identity_extractor() -> FeatureExtractor:
    """Pass-through extractor: the feature map is the image itself."""
    kernel = np.zeros((3, 3, 1, 1))
    for c in range(3):
        kernel[c, c, 0, 0] = 1.0
    stage = ExtractorStage(ConvLayer(kernel=kernel, bias=np.zeros(3), activation="none"))
    return FeatureExtractor(stages=[stage], tap_index=0)


def random_extractor(
    seed: int = 0, channels: int = 8, depth: int = 2, pool: bool = True, dtype=np.float64
) -> FeatureExtractor:
    """Seeded frozen conv stack for desk-scale training and tests."""
    rng = np.random.default_rng(seed)
    stages = []
    in_c = 3
    for i in range(depth):
        kernel = rng.normal(0.0, 0.4, size=(channels, in_c, 3, 3)).astype(dtype)
        bias = rng.normal(0.0, 0.05, size=channels).astype(dtype)
        stages.append(
            ExtractorStage(
                ConvLayer(kernel=kernel, bias=bias, activation="relu"),
                pool=pool and i == 0,
            )
        )
        in_c = channels
    return FeatureExtractor(stages=stages, tap_index=len(stages) - 1)


def _forward_stages(fx: FeatureExtractor, x: np.ndarray, cache: list | None):
    for stage in fx.stages[: fx.tap_index + 1]:
        conv_in = x
        x = conv_forward(stage.conv, x)
        conv_out = x
        pool_idx = None
        if stage.pool:
            x, pool_idx = maxpool_forward(x)
        if cache is not None:
            cache.append((conv_in, conv_out, pool_idx))
    return x


def extract_features(fx: FeatureExtractor, x: np.ndarray) -> np.ndarray:
    """Feature map at the tap stage for an NCHW batch."""
    return _forward_stages(fx, x, None)


def _backward_stages(fx: FeatureExtractor, cache, grad) -> np.ndarray:
    for stage, (conv_in, conv_out, pool_idx) in zip(
        reversed(fx.stages[: fx.tap_index + 1]), reversed(cache)
    ):
        if stage.pool:
            grad = maxpool_backward(grad, pool_idx, conv_out.shape)
        grad, _, _ = conv_backward_from_output(stage.conv, conv_in, conv_out, grad)
    return grad


def perceptual_loss_tensors(fx: FeatureExtractor, en: np.ndarray, gt: np.ndarray):
    """Loss and its gradient w.r.t. the enhanced batch.

    loss = sum over the batch of ||phi(en) - phi(gt)||^2 / (C*H*W of the
    feature map). The extractor is frozen: only the input gradient is
    produced.
    """
    if en.shape != gt.shape:
        raise ValueError(f"batch shapes differ: {en.shape} vs {gt.shape}")
    cache: list = []
    f_en = _forward_stages(fx, en, cache)
    f_gt = extract_features(fx, gt)

    chw = f_en.shape[1] * f_en.shape[2] * f_en.shape[3]
    diff = f_en - f_gt
    loss = float((diff * diff).sum()) / chw
    grad_features = (2.0 / chw) * diff
    grad_en = _backward_stages(fx, cache, grad_features)
    return loss, grad_en


def perceptual_loss(fx: FeatureExtractor, img_en: np.ndarray, img_gt: np.ndarray):
    """Image-level convenience wrapper; returns (loss, grad) for one pair."""
    en = image_to_tensor(img_en)
    gt = image_to_tensor(img_gt)
    return perceptual_loss_tensors(fx, en, gt)
