"""Pixel containers, color conversion, resizing, and image file I/O.

Images are numpy arrays of shape (H, W, 3), dtype float64, RGB channel
order, values in [0, 1]. Lab images share the spatial layout with channels
(L, a, b); L lies in [0, 100], a and b are unbounded. 8-bit quantization
happens only at the file boundary.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

__all__ = [
    "FormatError",
    "load_image",
    "save_image",
    "rgb_to_lab",
    "lab_to_rgb",
    "resize_bilinear",
    "validate_image",
]


class FormatError(ValueError):
    """Raised for image files this toolkit does not read or write."""


# sRGB linear-RGB -> XYZ (D65, 2 degree observer). The white point is taken
# as the image of (1,1,1) under this matrix so the gray axis maps to a=b=0
# exactly instead of within matrix rounding error.
_RGB_TO_XYZ = np.array(
    [
        [0.4124, 0.3576, 0.1805],
        [0.2126, 0.7152, 0.0722],
        [0.0193, 0.1192, 0.9505],
    ]
)
_XYZ_TO_RGB = np.linalg.inv(_RGB_TO_XYZ)
_WHITE = _RGB_TO_XYZ @ np.ones(3)

_DELTA = 6.0 / 29.0


def validate_image(img: np.ndarray) -> np.ndarray:
    """Check the (H, W, 3) float-in-[0,1] contract; returns the array."""
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) image, got shape {img.shape}")
    if not np.isfinite(img).all():
        raise ValueError("image contains non-finite values")
    if img.min() < 0.0 or img.max() > 1.0:
        raise ValueError("image values fall outside [0, 1]")
    return img


def load_image(path: str | Path) -> np.ndarray:
    """Load an 8-bit PNG (RGB or RGBA, alpha dropped) or binary PPM (P6).

    Each 8-bit value v maps to v / 255. Anything else (16-bit PNG,
    grayscale, palette, other formats) raises FormatError.
    """
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix in (".ppm", ".pnm"):
        return _load_ppm(path)
    if suffix == ".png":
        return _load_png(path)
    raise FormatError(f"unsupported image format: {path.name}")


def save_image(img: np.ndarray, path: str | Path) -> None:
    """Write an image as 8-bit PNG or PPM P6, chosen by file extension.

    Values are scaled by 255 and rounded; a load of the written file
    reproduces each channel within 1/255.
    """
    img = validate_image(img)
    path = Path(path)
    data = np.rint(img * 255.0).astype(np.uint8)
    suffix = path.suffix.lower()
    if suffix in (".ppm", ".pnm"):
        h, w = data.shape[:2]
        with open(path, "wb") as f:
            f.write(b"P6\n%d %d\n255\n" % (w, h))
            f.write(data.tobytes())
    elif suffix == ".png":
        Image.fromarray(data, mode="RGB").save(path, format="PNG")
    else:
        raise FormatError(f"unsupported output format: {path.name}")


def _load_png(path: Path) -> np.ndarray:
    try:
        im = Image.open(path)
        im.load()
    except OSError as exc:
        raise FormatError(f"unreadable PNG: {path}") from exc
    if im.format != "PNG":
        raise FormatError(f"not a PNG file: {path}")
    if im.mode not in ("RGB", "RGBA"):
        raise FormatError(
            f"unsupported PNG mode {im.mode!r} (8-bit RGB/RGBA only): {path}"
        )
    arr = np.asarray(im)
    return arr[:, :, :3].astype(np.float64) / 255.0


def _load_ppm(path: Path) -> np.ndarray:
    with open(path, "rb") as f:
        blob = f.read()
    if not blob.startswith(b"P6"):
        raise FormatError(f"not a binary PPM (P6): {path}")
    fields, offset = _ppm_header_fields(blob)
    width, height, maxval = fields
    if maxval != 255:
        raise FormatError(f"unsupported PPM maxval {maxval} (8-bit only): {path}")
    expected = width * height * 3
    raster = blob[offset : offset + expected]
    if len(raster) < expected:
        raise FormatError(f"truncated PPM raster: {path}")
    data = np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3)
    return data.astype(np.float64) / 255.0


def _ppm_header_fields(blob: bytes) -> tuple[tuple[int, int, int], int]:
    # Header: magic, then three whitespace-separated integers; '#' starts a
    # comment running to end of line. Exactly one whitespace byte separates
    # the maxval from the raster.
    fields: list[int] = []
    i = 2
    while len(fields) < 3:
        while i < len(blob) and blob[i : i + 1].isspace():
            i += 1
        if i < len(blob) and blob[i : i + 1] == b"#":
            while i < len(blob) and blob[i : i + 1] != b"\n":
                i += 1
            continue
        start = i
        while i < len(blob) and not blob[i : i + 1].isspace():
            i += 1
        if start == i:
            raise FormatError("malformed PPM header")
        try:
            fields.append(int(blob[start:i]))
        except ValueError as exc:
            raise FormatError("malformed PPM header") from exc
    return (fields[0], fields[1], fields[2]), i + 1


def _srgb_to_linear(v: np.ndarray) -> np.ndarray:
    return np.where(v > 0.04045, ((v + 0.055) / 1.055) ** 2.4, v / 12.92)


def _linear_to_srgb(v: np.ndarray) -> np.ndarray:
    v = np.maximum(v, 0.0)
    return np.where(v > 0.0031308, 1.055 * v ** (1.0 / 2.4) - 0.055, 12.92 * v)


def _lab_f(t: np.ndarray) -> np.ndarray:
    return np.where(t > _DELTA**3, np.cbrt(t), t / (3.0 * _DELTA**2) + 4.0 / 29.0)


def _lab_f_inv(t: np.ndarray) -> np.ndarray:
    return np.where(t > _DELTA, t**3, 3.0 * _DELTA**2 * (t - 4.0 / 29.0))


def rgb_to_lab(img: np.ndarray) -> np.ndarray:
    """Convert an sRGB image to CIELAB (D65). Returns (H, W, 3) = (L, a, b)."""
    img = validate_image(img)
    lin = _srgb_to_linear(img)
    xyz = lin @ _RGB_TO_XYZ.T
    f = _lab_f(xyz / _WHITE)
    lab = np.empty_like(f)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


def lab_to_rgb(lab: np.ndarray) -> np.ndarray:
    """Convert CIELAB back to sRGB, clamping out-of-gamut pixels to [0, 1]."""
    lab = np.asarray(lab, dtype=np.float64)
    fy = (lab[..., 0] + 16.0) / 116.0
    fx = fy + lab[..., 1] / 500.0
    fz = fy - lab[..., 2] / 200.0
    xyz = np.stack([_lab_f_inv(fx), _lab_f_inv(fy), _lab_f_inv(fz)], axis=-1) * _WHITE
    lin = xyz @ _XYZ_TO_RGB.T
    return np.clip(_linear_to_srgb(lin), 0.0, 1.0)


def resize_bilinear(img: np.ndarray, width: int, height: int) -> np.ndarray:
    """Resize with bilinear interpolation at half-pixel-centered samples."""
    img = validate_image(img)
    if width < 1 or height < 1:
        raise ValueError("target dimensions must be >= 1")
    src_h, src_w = img.shape[:2]
    if (src_w, src_h) == (width, height):
        return img.copy()

    # Output center (i + 0.5) maps to source coordinate (i + 0.5) * scale - 0.5,
    # clamped so edge samples do not read outside the image.
    ys = (np.arange(height) + 0.5) * (src_h / height) - 0.5
    xs = (np.arange(width) + 0.5) * (src_w / width) - 0.5
    ys = np.clip(ys, 0.0, src_h - 1.0)
    xs = np.clip(xs, 0.0, src_w - 1.0)

    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, src_h - 1)
    x1 = np.minimum(x0 + 1, src_w - 1)
    wy = (ys - y0)[:, None, None]
    wx = (xs - x0)[None, :, None]

    top = img[y0][:, x0] * (1.0 - wx) + img[y0][:, x1] * wx
    bot = img[y1][:, x0] * (1.0 - wx) + img[y1][:, x1] * wx
    out = top * (1.0 - wy) + bot * wy
    return np.clip(out, 0.0, 1.0)
