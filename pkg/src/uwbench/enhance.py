"""The three classical pre-processing operators feeding the fusion network.

White balance corrects color casts, CLAHE on the Lab L channel improves
contrast, and gamma correction lightens dark regions. ``generate_inputs``
bundles all three with the untouched original.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imaging import lab_to_rgb, rgb_to_lab, validate_image

__all__ = [
    "EnhanceInputs",
    "WhiteBalanceInfo",
    "ClaheInfo",
    "white_balance",
    "clahe_on_l",
    "clahe_on_lab",
    "equalize_channel",
    "gamma_correct",
    "generate_inputs",
    "DEFAULT_GAMMA",
    "DEFAULT_CLIP_LIMIT",
    "DEFAULT_TILES",
]

# Gray-world gains are clamped to keep extreme casts from blowing up.
GAIN_CLAMP = (0.5, 3.0)

DEFAULT_GAMMA = 0.7
DEFAULT_CLIP_LIMIT = 0.01
DEFAULT_TILES = (8, 8)
HIST_BINS = 256


@dataclass(frozen=True)
class EnhanceInputs:
    """The raw image plus its three derived inputs, identical dimensions."""

    raw: np.ndarray
    wb: np.ndarray
    he: np.ndarray
    gc: np.ndarray

    def __post_init__(self):
        dims = {a.shape for a in (self.raw, self.wb, self.he, self.gc)}
        if len(dims) != 1:
            raise ValueError(f"input bundle dimensions differ: {dims}")


@dataclass(frozen=True)
class WhiteBalanceInfo:
    gains: tuple[float, float, float]
    clamped: bool
    zero_channels: tuple[int, ...]


@dataclass(frozen=True)
class ClaheInfo:
    tiles: tuple[int, int]
    grid_reduced: bool


def white_balance(img, *, with_info=False):
    """Gray-world white balance with per-channel gain clamped to [0.5, 3].

    Each channel is scaled by mean(live channels) / mean(channel). A channel
    whose mean is exactly zero is left untouched (gain 1) and excluded from
    the reference mean; the info record flags it.
    """
    img = validate_image(img)
    means = img.reshape(-1, 3).mean(axis=0)
    zero = tuple(int(c) for c in np.flatnonzero(means == 0.0))
    live = [c for c in range(3) if c not in zero]
    if not live:
        raise ValueError("all channel means are zero")
    ref = means[live].mean()

    gains = np.ones(3)
    gains[live] = ref / means[live]
    clamped_gains = np.clip(gains, *GAIN_CLAMP)
    out = np.clip(img * clamped_gains, 0.0, 1.0)

    if with_info:
        info = WhiteBalanceInfo(
            gains=tuple(float(g) for g in clamped_gains),
            clamped=bool((clamped_gains != gains).any()),
            zero_channels=zero,
        )
        return out, info
    return out


def equalize_channel(chan, clip_limit, tiles, *, nbins=HIST_BINS, domain=(0.0, 100.0)):
    """Contrast-limited adaptive histogram equalization of one 2-D channel.

    The channel is split into a tiles[0] x tiles[1] grid; each tile's
    histogram (nbins bins spanning ``domain``) is clipped and the excess
    redistributed uniformly in a single pass, then turned into a CDF
    mapping. Per-pixel outputs blend the four surrounding tile mappings
    bilinearly. Output values span the channel's own original range, so a
    constant channel comes back unchanged.
    """
    chan = np.asarray(chan, dtype=np.float64)
    if chan.ndim != 2:
        raise ValueError("expected a 2-D channel")
    if not 0.0 < clip_limit <= 1.0:
        raise ValueError("clip_limit must lie in (0, 1]")
    ty, tx = int(tiles[0]), int(tiles[1])
    if ty < 1 or tx < 1:
        raise ValueError("tile grid must be at least 1x1")
    h, w = chan.shape
    reduced = (min(ty, h), min(tx, w))
    ty, tx = reduced

    lo, hi = float(chan.min()), float(chan.max())
    if hi == lo:
        return chan.copy(), (ty, tx)

    tile_h = -(-h // ty)
    tile_w = -(-w // tx)
    padded = np.pad(chan, ((0, ty * tile_h - h), (0, tx * tile_w - w)), mode="symmetric")

    d0, d1 = domain
    bins = np.clip(((padded - d0) / (d1 - d0) * nbins).astype(np.intp), 0, nbins - 1)

    npix = tile_h * tile_w
    # Flattening floor: clipping below the uniform level would invert contrast.
    flat = npix / nbins
    clip = flat + clip_limit * (npix - flat)

    mappings = np.empty((ty, tx, nbins))
    for r in range(ty):
        for c in range(tx):
            tile = bins[r * tile_h : (r + 1) * tile_h, c * tile_w : (c + 1) * tile_w]
            hist = np.bincount(tile.ravel(), minlength=nbins).astype(np.float64)
            excess = np.maximum(hist - clip, 0.0).sum()
            hist = np.minimum(hist, clip) + excess / nbins
            cdf = np.cumsum(hist) / npix
            mappings[r, c] = lo + cdf * (hi - lo)

    # Bilinear blend between the four nearest tile mappings, clamped at the
    # border so edge pixels use the edge tiles alone.
    rr = (np.arange(h) + 0.5) / tile_h - 0.5
    cc = (np.arange(w) + 0.5) / tile_w - 0.5
    r0 = np.clip(np.floor(rr).astype(np.intp), 0, ty - 1)
    c0 = np.clip(np.floor(cc).astype(np.intp), 0, tx - 1)
    r1 = np.minimum(r0 + 1, ty - 1)
    c1 = np.minimum(c0 + 1, tx - 1)
    wr = np.clip(rr - r0, 0.0, 1.0)[:, None]
    wc = np.clip(cc - c0, 0.0, 1.0)[None, :]

    b = bins[:h, :w]
    rows = np.arange(h)[:, None]
    cols = np.arange(w)[None, :]
    m00 = mappings[r0[rows], c0[cols], b]
    m01 = mappings[r0[rows], c1[cols], b]
    m10 = mappings[r1[rows], c0[cols], b]
    m11 = mappings[r1[rows], c1[cols], b]
    top = m00 * (1.0 - wc) + m01 * wc
    bot = m10 * (1.0 - wc) + m11 * wc
    return top * (1.0 - wr) + bot * wr, (ty, tx)


def clahe_on_lab(lab, clip_limit=DEFAULT_CLIP_LIMIT, tiles=DEFAULT_TILES):
    """Equalize the L channel of a Lab stack; a and b pass through untouched."""
    lab = np.asarray(lab, dtype=np.float64)
    eq, grid = equalize_channel(lab[..., 0], clip_limit, tiles)
    out = lab.copy()
    out[..., 0] = eq
    return out, grid


def clahe_on_l(img, clip_limit=DEFAULT_CLIP_LIMIT, tiles=DEFAULT_TILES, *, with_info=False):
    """CLAHE applied to the L channel in Lab space, converted back to RGB."""
    img = validate_image(img)
    lab, grid = clahe_on_lab(rgb_to_lab(img), clip_limit, tiles)
    out = lab_to_rgb(lab)
    if with_info:
        return out, ClaheInfo(tiles=grid, grid_reduced=grid != tuple(tiles))
    return out


def gamma_correct(img, gamma=DEFAULT_GAMMA):
    """Per-channel power law v -> v ** gamma."""
    img = validate_image(img)
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return img**gamma


def generate_inputs(img) -> EnhanceInputs:
    """Derive the white-balanced, equalized, and gamma-corrected inputs."""
    img = validate_image(img)
    return EnhanceInputs(
        raw=img,
        wb=white_balance(img),
        he=clahe_on_l(img),
        gc=gamma_correct(img),
    )
