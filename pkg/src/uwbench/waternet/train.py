"""Batch training loop: Adam updates, step-decayed learning rate, and the
flip/rotation augmentation that expands each training pair eightfold.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from ..enhance import EnhanceInputs
from .loss import FeatureExtractor, perceptual_loss_tensors
from .model import WaterNetModel, backward_tensors, forward_tensors, image_to_tensor

__all__ = [
    "TrainConfig",
    "TrainingDiverged",
    "Trainer",
    "learning_rate",
    "augment",
]

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


class TrainingDiverged(RuntimeError):
    """Loss went non-finite; the offending update was not applied."""


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 16
    lr0: float = 1e-3
    lr_decay: float = 0.1
    decay_every: int = 10_000
    max_iters: int = 20_000
    patch: int = 112
    seed: int = 0

    def __post_init__(self):
        if min(self.batch_size, self.max_iters, self.decay_every, self.patch) <= 0:
            raise ValueError("all sizes must be positive")
        if self.lr0 <= 0 or not 0.0 < self.lr_decay < 1.0:
            raise ValueError("need lr0 > 0 and decay in (0, 1)")


def learning_rate(cfg: TrainConfig, iteration: int) -> float:
    """Step schedule: lr0 scaled by decay once per decay_every iterations."""
    return cfg.lr0 * cfg.lr_decay ** (iteration // cfg.decay_every)


class Trainer:
    """Single-writer training loop over one model; Adam with default moments."""

    def __init__(self, model: WaterNetModel, fx: FeatureExtractor, cfg: TrainConfig):
        self.model = model
        self.fx = fx
        self.cfg = cfg
        self.iteration = 0
        dtype = model.head.kernel.dtype
        self._m = [
            (np.zeros_like(l.kernel), np.zeros_like(l.bias)) for l in model.layers()
        ]
        self._v = [
            (np.zeros_like(l.kernel), np.zeros_like(l.bias)) for l in model.layers()
        ]
        self._dtype = dtype

    def step(self, batch: list[tuple[EnhanceInputs, np.ndarray]]) -> float:
        """One forward/backward/update pass; returns the pre-update loss."""
        if not 0 < len(batch) <= self.cfg.batch_size:
            raise ValueError(f"batch size must be in [1, {self.cfg.batch_size}]")
        for inputs, gt in batch:
            if inputs.raw.shape != (self.cfg.patch, self.cfg.patch, 3):
                raise ValueError(f"training pairs must be {self.cfg.patch}x{self.cfg.patch}")
            if gt.shape != inputs.raw.shape:
                raise ValueError("reference dimensions must match the inputs")

        stacks = {
            name: np.concatenate(
                [image_to_tensor(getattr(p, name), self._dtype) for p, _ in batch]
            )
            for name in ("raw", "wb", "he", "gc")
        }
        gt = np.concatenate([image_to_tensor(g, self._dtype) for _, g in batch])

        fused, _, _, cache = forward_tensors(
            self.model, stacks["raw"], stacks["wb"], stacks["he"], stacks["gc"]
        )
        loss, grad_fused = perceptual_loss_tensors(self.fx, fused, gt)
        if not np.isfinite(loss):
            raise TrainingDiverged(f"non-finite loss {loss!r} at iteration {self.iteration}")

        grads = backward_tensors(self.model, cache, grad_fused.astype(self._dtype))
        self._adam_update(grads)
        self.iteration += 1
        return loss

    def _adam_update(self, grads) -> None:
        lr = learning_rate(self.cfg, self.iteration)
        t = self.iteration + 1
        c1 = 1.0 - ADAM_BETA1**t
        c2 = 1.0 - ADAM_BETA2**t
        for layer, (gk, gb), m, v in zip(self.model.layers(), grads, self._m, self._v):
            for param, grad, mom, sec in (
                (layer.kernel, gk.astype(self._dtype), m[0], v[0]),
                (layer.bias, gb.astype(self._dtype), m[1], v[1]),
            ):
                mom *= ADAM_BETA1
                mom += (1.0 - ADAM_BETA1) * grad
                sec *= ADAM_BETA2
                sec += (1.0 - ADAM_BETA2) * grad * grad
                param -= lr * (mom / c1) / (np.sqrt(sec / c2) + ADAM_EPS)


def augment(pair: tuple[np.ndarray, np.ndarray], seed: int | None = None):
    """Original plus its seven flip/right-angle-rotation variants.

    Both images of the pair receive the same transform. Images must be
    square so rotations keep the patch size. With a seed the ordering is
    shuffled deterministically; otherwise it is the canonical
    flip-major/rotation-minor order starting with the original.
    """
    a, b = pair
    if a.shape != b.shape:
        raise ValueError("pair images must share dimensions")
    if a.shape[0] != a.shape[1]:
        raise ValueError("augmentation requires square images")
    versions = []
    for flipped in (False, True):
        fa, fb = (a[:, ::-1], b[:, ::-1]) if flipped else (a, b)
        for quarter_turns in range(4):
            versions.append(
                (
                    np.ascontiguousarray(np.rot90(fa, quarter_turns)),
                    np.ascontiguousarray(np.rot90(fb, quarter_turns)),
                )
            )
    if seed is not None:
        random.Random(seed).shuffle(versions)
    return versions
