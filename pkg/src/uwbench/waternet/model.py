"""The gated fusion enhancement network.

A shared trunk consumes the 12-channel concatenation of the raw image and
its three derived inputs and predicts, through a softmax head, one
confidence map per input. Each derived input is refined by its own small
conv stack (a feature transformation unit ending in a sigmoid), and the
enhanced result is the confidence-weighted sum of the refined inputs, so
the output is a per-pixel convex combination and stays inside [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..enhance import EnhanceInputs
from .layers import (
    ConvLayer,
    conv_backward_from_output,
    conv_forward,
    softmax_backward,
    softmax_channels,
)

__all__ = [
    "WaterNetConfig",
    "WaterNetModel",
    "init_waternet",
    "fuse",
    "forward",
    "forward_tensors",
    "backward_tensors",
    "image_to_tensor",
    "tensor_to_image",
]

INIT_STD = 0.02  # kernel init scale; unit variance diverges at these widths


@dataclass(frozen=True)
class WaterNetConfig:
    """Layer counts and widths; every count is adjustable."""

    trunk_kernels: tuple[int, ...] = (7, 7, 7, 5, 5, 3, 3)
    trunk_channels: int = 32
    head_kernel: int = 3
    ftu_kernels: tuple[int, ...] = (7, 5, 3)
    ftu_channels: tuple[int, ...] = (32, 32, 3)

    def __post_init__(self):
        if len(self.ftu_kernels) != len(self.ftu_channels):
            raise ValueError("ftu_kernels and ftu_channels must align")
        if self.ftu_channels[-1] != 3:
            raise ValueError("final FTU layer must emit 3 channels")

    @staticmethod
    def small() -> "WaterNetConfig":
        """Desk-scale variant: same topology, narrow layers."""
        return WaterNetConfig(
            trunk_kernels=(3, 3, 3),
            trunk_channels=8,
            head_kernel=3,
            ftu_kernels=(3, 3),
            ftu_channels=(8, 3),
        )


@dataclass
class WaterNetModel:
    trunk: list[ConvLayer]
    head: ConvLayer
    ftu_wb: list[ConvLayer]
    ftu_he: list[ConvLayer]
    ftu_gc: list[ConvLayer]
    rng_seed: int = 0
    config: WaterNetConfig = field(default_factory=WaterNetConfig)

    def layers(self) -> list[ConvLayer]:
        """All trainable layers in a fixed traversal order."""
        return [*self.trunk, self.head, *self.ftu_wb, *self.ftu_he, *self.ftu_gc]


def _make_layer(rng, in_c, out_c, k, activation, dtype):
    kernel = rng.normal(0.0, INIT_STD, size=(out_c, in_c, k, k)).astype(dtype)
    bias = np.zeros(out_c, dtype=dtype)
    return ConvLayer(kernel=kernel, bias=bias, activation=activation)


def _make_stack(rng, in_c, kernels, channels, activations, dtype):
    layers = []
    for k, out_c, act in zip(kernels, channels, activations):
        layers.append(_make_layer(rng, in_c, out_c, k, act, dtype))
        in_c = out_c
    return layers


def init_waternet(
    config: WaterNetConfig | None = None, seed: int = 0, dtype=np.float32
) -> WaterNetModel:
    """Fresh model with N(0, 0.02^2) kernels and zero biases."""
    config = config or WaterNetConfig()
    rng = np.random.default_rng(seed)
    n_trunk = len(config.trunk_kernels)
    trunk = _make_stack(
        rng,
        12,
        config.trunk_kernels,
        (config.trunk_channels,) * n_trunk,
        ("relu",) * n_trunk,
        dtype,
    )
    head = _make_layer(rng, config.trunk_channels, 3, config.head_kernel, "none", dtype)
    ftu_acts = ("relu",) * (len(config.ftu_kernels) - 1) + ("sigmoid",)
    ftus = [
        _make_stack(rng, 6, config.ftu_kernels, config.ftu_channels, ftu_acts, dtype)
        for _ in range(3)
    ]
    return WaterNetModel(
        trunk=trunk,
        head=head,
        ftu_wb=ftus[0],
        ftu_he=ftus[1],
        ftu_gc=ftus[2],
        rng_seed=seed,
        config=config,
    )


def image_to_tensor(img: np.ndarray, dtype=np.float64) -> np.ndarray:
    """(H, W, 3) image -> (1, 3, H, W) tensor."""
    return np.ascontiguousarray(img.transpose(2, 0, 1)[None], dtype=dtype)


def tensor_to_image(t: np.ndarray) -> np.ndarray:
    """(1, 3, H, W) tensor -> (H, W, 3) image, clamped to [0, 1]."""
    return np.clip(t[0].transpose(1, 2, 0).astype(np.float64), 0.0, 1.0)


def fuse(refined: list[np.ndarray], maps: np.ndarray) -> np.ndarray:
    """Confidence-weighted sum: sum_k refined[k] * maps[:, k], broadcast to RGB."""
    if len(refined) != maps.shape[1]:
        raise ValueError("one confidence map required per refined input")
    out = np.zeros_like(refined[0])
    for k, r in enumerate(refined):
        out += r * maps[:, k : k + 1]
    return out


def _run_stack(layers, x, cache):
    for layer in layers:
        y = conv_forward(layer, x)
        cache.append((x, y))
        x = y
    return x


def forward_tensors(model: WaterNetModel, raw, wb, he, gc):
    """Batched forward pass.

    Returns (fused, maps, refined, cache); the cache holds every layer's
    input and output so ``backward_tensors`` can run without recomputing
    the forward graph.
    """
    for t in (wb, he, gc):
        if t.shape != raw.shape:
            raise ValueError("input tensors must share dimensions")

    cache: dict = {"trunk": [], "ftu": [[], [], []]}
    trunk_x = _run_stack(model.trunk, np.concatenate([raw, wb, he, gc], axis=1), cache["trunk"])
    logits = conv_forward(model.head, trunk_x)
    cache["head"] = (trunk_x, logits)
    maps = softmax_channels(logits)

    refined = []
    for i, (stack, inp) in enumerate(
        zip((model.ftu_wb, model.ftu_he, model.ftu_gc), (wb, he, gc))
    ):
        refined.append(_run_stack(stack, np.concatenate([raw, inp], axis=1), cache["ftu"][i]))

    fused = fuse(refined, maps)
    cache["maps"] = maps
    cache["refined"] = refined
    return fused, maps, refined, cache


def _backward_stack(layers, io_pairs, grad_out, grads_out_list):
    stack_grads = []
    for layer, (x, y) in zip(reversed(layers), reversed(io_pairs)):
        grad_out, gk, gb = conv_backward_from_output(layer, x, y, grad_out)
        stack_grads.append((gk, gb))
    grads_out_list.extend(reversed(stack_grads))
    return grad_out


def backward_tensors(model: WaterNetModel, cache, grad_fused):
    """Parameter gradients for every layer, ordered like ``model.layers()``."""
    maps = cache["maps"]
    refined = cache["refined"]

    grad_maps = np.empty_like(maps)
    for k in range(3):
        grad_maps[:, k] = (grad_fused * refined[k]).sum(axis=1)
    grad_logits = softmax_backward(grad_maps, maps)

    trunk_grads: list = []
    head_in, head_out = cache["head"]
    grad_head_in, gk, gb = conv_backward_from_output(model.head, head_in, head_out, grad_logits)
    head_grad = (gk, gb)
    _backward_stack(model.trunk, cache["trunk"], grad_head_in, trunk_grads)

    ftu_grads: list = []
    for k, stack in enumerate((model.ftu_wb, model.ftu_he, model.ftu_gc)):
        grad_refined = grad_fused * maps[:, k : k + 1]
        _backward_stack(stack, cache["ftu"][k], grad_refined, ftu_grads)

    return [*trunk_grads, head_grad, *ftu_grads]


def forward(model: WaterNetModel, inputs: EnhanceInputs):
    """Enhance one image bundle.

    Returns the fused image (H, W, 3), the confidence maps as a
    (1, 3, H, W) tensor, and the three refined inputs as images.
    """
    dtype = model.head.kernel.dtype
    tensors = [image_to_tensor(x, dtype) for x in (inputs.raw, inputs.wb, inputs.he, inputs.gc)]
    fused, maps, refined, _ = forward_tensors(model, *tensors)
    if not np.isfinite(fused).all():
        raise FloatingPointError("non-finite values in network output")
    return tensor_to_image(fused), maps, [tensor_to_image(r) for r in refined]
