"""Convolution and pooling primitives with analytic gradients.

Tensors are NCHW numpy arrays. Convolutions are stride-1 cross-correlations
with odd kernels and same-size zero padding, so spatial dimensions never
change; 2x2 max pooling halves even dimensions. Everything is plain numpy,
deterministic, and dtype-preserving.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConvLayer",
    "conv_forward",
    "conv_backward",
    "conv_backward_from_output",
    "maxpool_forward",
    "maxpool_backward",
    "softmax_channels",
    "softmax_backward",
]

ACTIVATIONS = ("none", "relu", "sigmoid")


@dataclass
class ConvLayer:
    kernel: np.ndarray  # (out_c, in_c, k, k), k odd
    bias: np.ndarray  # (out_c,)
    activation: str = "none"

    def __post_init__(self):
        if self.kernel.ndim != 4 or self.kernel.shape[2] != self.kernel.shape[3]:
            raise ValueError(f"bad kernel shape {self.kernel.shape}")
        if self.kernel.shape[2] % 2 != 1:
            raise ValueError("kernel size must be odd")
        if self.bias.shape != (self.kernel.shape[0],):
            raise ValueError("bias length must match output channels")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")

    @property
    def out_channels(self) -> int:
        return self.kernel.shape[0]

    @property
    def in_channels(self) -> int:
        return self.kernel.shape[1]

    @property
    def ksize(self) -> int:
        return self.kernel.shape[2]


def _im2col(x: np.ndarray, k: int) -> np.ndarray:
    """Patch matrix of shape (n*h*w, c*k*k) for same-size correlation."""
    n, c, h, w = x.shape
    p = k // 2
    xp = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p)))
    s = xp.strides
    win = np.lib.stride_tricks.as_strided(
        xp, shape=(n, c, k, k, h, w), strides=(s[0], s[1], s[2], s[3], s[2], s[3])
    )
    return np.ascontiguousarray(win.transpose(0, 4, 5, 1, 2, 3)).reshape(n * h * w, c * k * k)


def _correlate(x: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    n, _, h, w = x.shape
    out_c = kernel.shape[0]
    cols = _im2col(x, kernel.shape[2])
    y = cols @ kernel.reshape(out_c, -1).T
    return y.reshape(n, h, w, out_c).transpose(0, 3, 1, 2)


def _activate(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "sigmoid":
        return 1.0 / (1.0 + np.exp(-z))
    return z


def _activation_grad(grad_out: np.ndarray, out: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return grad_out * (out > 0)
    if kind == "sigmoid":
        return grad_out * out * (1.0 - out)
    return grad_out


def conv_forward(layer: ConvLayer, x: np.ndarray) -> np.ndarray:
    """Same-size cross-correlation plus bias, then the layer's activation."""
    if x.ndim != 4 or x.shape[1] != layer.in_channels:
        raise ValueError(
            f"expected {layer.in_channels} input channels, got shape {x.shape}"
        )
    z = _correlate(x, layer.kernel) + layer.bias[None, :, None, None]
    return _activate(z, layer.activation)


def conv_backward(
    layer: ConvLayer, x: np.ndarray, grad_out: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of the forward map w.r.t. input, kernel, and bias.

    ``grad_out`` is the loss gradient at the layer output (after the
    activation). The forward pass is recomputed to rebuild the activation
    mask.
    """
    return conv_backward_from_output(layer, x, conv_forward(layer, x), grad_out)


def conv_backward_from_output(
    layer: ConvLayer, x: np.ndarray, out: np.ndarray, grad_out: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Like conv_backward, reusing an already computed layer output."""
    if grad_out.shape != out.shape:
        raise ValueError(f"grad shape {grad_out.shape} != output shape {out.shape}")
    g = _activation_grad(grad_out, out, layer.activation)

    n, _, h, w = x.shape
    k = layer.ksize
    g_mat = g.transpose(0, 2, 3, 1).reshape(n * h * w, layer.out_channels)
    cols = _im2col(x, k)
    grad_kernel = (g_mat.T @ cols).reshape(layer.kernel.shape)
    grad_bias = g.sum(axis=(0, 2, 3))

    # Input gradient is a correlation of g with the spatially flipped kernel,
    # channels transposed.
    flipped = layer.kernel[:, :, ::-1, ::-1].transpose(1, 0, 2, 3)
    grad_x = _correlate(g, np.ascontiguousarray(flipped))
    return grad_x, grad_kernel, grad_bias


def maxpool_forward(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """2x2 stride-2 max pooling; returns (pooled, argmax) for the backward pass."""
    n, c, h, w = x.shape
    if h % 2 or w % 2:
        raise ValueError("max pooling needs even spatial dimensions")
    v = x.reshape(n, c, h // 2, 2, w // 2, 2).transpose(0, 1, 2, 4, 3, 5)
    flat = np.ascontiguousarray(v).reshape(n, c, h // 2, w // 2, 4)
    idx = flat.argmax(axis=-1)
    y = np.take_along_axis(flat, idx[..., None], axis=-1)[..., 0]
    return y, idx


def maxpool_backward(grad_out: np.ndarray, idx: np.ndarray, x_shape) -> np.ndarray:
    """Route pooled gradients back to the (first) argmax of each 2x2 cell."""
    n, c, h, w = x_shape
    cells = np.zeros((n, c, h // 2, w // 2, 4), dtype=grad_out.dtype)
    np.put_along_axis(cells, idx[..., None], grad_out[..., None], axis=-1)
    v = cells.reshape(n, c, h // 2, w // 2, 2, 2).transpose(0, 1, 2, 4, 3, 5)
    return v.reshape(n, c, h, w)


def softmax_channels(z: np.ndarray) -> np.ndarray:
    """Numerically stable softmax across the channel axis, per pixel."""
    e = np.exp(z - z.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def softmax_backward(grad_out: np.ndarray, s: np.ndarray) -> np.ndarray:
    dot = (grad_out * s).sum(axis=1, keepdims=True)
    return s * (grad_out - dot)
