"""Binary weight files for models and feature extractors.

Layout: the magic bytes "UWNET1", a 32-bit kind tag, the payload, and a
CRC32 trailer over everything before it. All integers are little-endian
uint32 and all parameters little-endian float32, so files round-trip
float32 models bit-exactly across platforms.

Fusion model payload (kind 1): five layer stacks in fixed order (trunk,
head, ftu_wb, ftu_he, ftu_gc), each a layer count followed by layer
records. Extractor payload (kind 2): tap index, stage count, then per
stage a pool flag and a layer record. A layer record is activation code,
out channels, in channels, kernel size, kernel data, bias data.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from .layers import ACTIVATIONS, ConvLayer
from .loss import ExtractorStage, FeatureExtractor
from .model import WaterNetModel

__all__ = [
    "WeightsError",
    "WeightsVersionError",
    "WeightsCorruptError",
    "save_model",
    "load_model",
    "save_extractor",
    "load_extractor",
]

MAGIC = b"UWNET1"
KIND_MODEL = 1
KIND_EXTRACTOR = 2


class WeightsError(Exception):
    """Base error for weight files."""


class WeightsVersionError(WeightsError):
    """Magic bytes do not match this format version."""


class WeightsCorruptError(WeightsError):
    """Truncated file or checksum mismatch."""


def _pack_layer(layer: ConvLayer) -> bytes:
    out_c, in_c, k, _ = layer.kernel.shape
    head = struct.pack(
        "<4I", ACTIVATIONS.index(layer.activation), out_c, in_c, k
    )
    kernel = np.ascontiguousarray(layer.kernel, dtype="<f4").tobytes()
    bias = np.ascontiguousarray(layer.bias, dtype="<f4").tobytes()
    return head + kernel + bias


class _Reader:
    def __init__(self, blob: bytes, offset: int):
        self.blob = blob
        self.pos = offset

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.blob):
            raise WeightsCorruptError("truncated weight file")
        chunk = self.blob[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def layer(self) -> ConvLayer:
        act_code, out_c, in_c, k = struct.unpack("<4I", self.take(16))
        if act_code >= len(ACTIVATIONS):
            raise WeightsCorruptError(f"unknown activation code {act_code}")
        if k % 2 != 1 or min(out_c, in_c, k) < 1:
            raise WeightsCorruptError(f"bad layer shape ({out_c}, {in_c}, {k})")
        kernel = np.frombuffer(self.take(out_c * in_c * k * k * 4), dtype="<f4")
        bias = np.frombuffer(self.take(out_c * 4), dtype="<f4")
        return ConvLayer(
            kernel=kernel.reshape(out_c, in_c, k, k).copy(),
            bias=bias.copy(),
            activation=ACTIVATIONS[act_code],
        )


def _write(path: Path, kind: int, payload: bytes) -> None:
    body = MAGIC + struct.pack("<I", kind) + payload
    with open(path, "wb") as f:
        f.write(body + struct.pack("<I", zlib.crc32(body)))


def _read(path: Path, kind: int) -> _Reader:
    blob = Path(path).read_bytes()
    if blob[: len(MAGIC)] != MAGIC:
        raise WeightsVersionError(f"not a {MAGIC.decode()} weight file: {path}")
    if len(blob) < len(MAGIC) + 8:
        raise WeightsCorruptError("truncated weight file")
    stored = struct.unpack("<I", blob[-4:])[0]
    if zlib.crc32(blob[:-4]) != stored:
        raise WeightsCorruptError("checksum mismatch")
    reader = _Reader(blob[:-4], len(MAGIC))
    got_kind = reader.u32()
    if got_kind != kind:
        raise WeightsError(f"expected kind {kind}, file holds kind {got_kind}")
    return reader


def save_model(model: WaterNetModel, path: str | Path) -> None:
    parts = [struct.pack("<I", model.rng_seed & 0xFFFFFFFF)]
    for stack in (model.trunk, [model.head], model.ftu_wb, model.ftu_he, model.ftu_gc):
        parts.append(struct.pack("<I", len(stack)))
        parts.extend(_pack_layer(layer) for layer in stack)
    _write(Path(path), KIND_MODEL, b"".join(parts))


def load_model(path: str | Path) -> WaterNetModel:
    r = _read(Path(path), KIND_MODEL)
    seed = r.u32()
    stacks = []
    for _ in range(5):
        count = r.u32()
        stacks.append([r.layer() for _ in range(count)])
    trunk, head_stack, ftu_wb, ftu_he, ftu_gc = stacks
    if len(head_stack) != 1:
        raise WeightsCorruptError("model file must hold exactly one head layer")
    if r.pos != len(r.blob):
        raise WeightsCorruptError("trailing bytes after model payload")
    model = WaterNetModel(
        trunk=trunk,
        head=head_stack[0],
        ftu_wb=ftu_wb,
        ftu_he=ftu_he,
        ftu_gc=ftu_gc,
        rng_seed=seed,
    )
    _check_wiring(model)
    return model


def _check_wiring(model: WaterNetModel) -> None:
    # Channel counts must chain correctly or inference would crash later.
    expect = 12
    for layer in model.trunk:
        if layer.in_channels != expect:
            raise WeightsCorruptError("trunk channel chain broken")
        expect = layer.out_channels
    if model.head.in_channels != expect or model.head.out_channels != 3:
        raise WeightsCorruptError("head channels inconsistent")
    for stack in (model.ftu_wb, model.ftu_he, model.ftu_gc):
        expect = 6
        for layer in stack:
            if layer.in_channels != expect:
                raise WeightsCorruptError("ftu channel chain broken")
            expect = layer.out_channels
        if expect != 3:
            raise WeightsCorruptError("ftu must emit 3 channels")


def save_extractor(fx: FeatureExtractor, path: str | Path) -> None:
    parts = [struct.pack("<2I", fx.tap_index, len(fx.stages))]
    for stage in fx.stages:
        parts.append(struct.pack("<I", int(stage.pool)))
        parts.append(_pack_layer(stage.conv))
    _write(Path(path), KIND_EXTRACTOR, b"".join(parts))


def load_extractor(path: str | Path) -> FeatureExtractor:
    r = _read(Path(path), KIND_EXTRACTOR)
    tap_index = r.u32()
    count = r.u32()
    stages = []
    for _ in range(count):
        pool = bool(r.u32())
        stages.append(ExtractorStage(conv=r.layer(), pool=pool))
    if r.pos != len(r.blob):
        raise WeightsCorruptError("trailing bytes after extractor payload")
    return FeatureExtractor(stages=stages, tap_index=tap_index)
