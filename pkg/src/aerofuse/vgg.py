"""First two VGG-19 stages: weight loading, forward pass, activity and weight maps.

Weights come from a portable little-endian "VGGW" file:

    magic "VGGW" | version u32=1 | preprocessing 12 x f32 (mean[3], std[3],
    reserved[6]) | layerCount u32 | per layer: nameLen u32, name bytes,
    outC u32, inC u32, kH u32, kW u32, kernel f32[outC*inC*kH*kW] in
    outC-major order, bias f32[outC]

Only conv1_1, conv1_2 and conv2_1 are consumed; the preprocessing block makes
the file self-describing, so the forward pass standardises inputs with the
constants the exported model was trained with.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BadMagic, ShapeMismatch, TruncatedFile, WeightsMissing
from .image import PlanarImage, resize_bilinear

VGGW_MAGIC = b"VGGW"
VGGW_VERSION = 1

REQUIRED_LAYERS: tuple[tuple[str, tuple[int, int, int, int]], ...] = (
    ("conv1_1", (64, 3, 3, 3)),
    ("conv1_2", (64, 64, 3, 3)),
    ("conv2_1", (128, 64, 3, 3)),
)

EPSILON = 1e-12


@dataclass(frozen=True, eq=False)
class ConvLayerWeights:
    name: str
    kernel: np.ndarray  # (outC, inC, kH, kW) float32
    bias: np.ndarray  # (outC,) float32

    def __post_init__(self) -> None:
        k = np.ascontiguousarray(self.kernel, dtype=np.float32)
        b = np.ascontiguousarray(self.bias, dtype=np.float32)
        if k.ndim != 4 or b.ndim != 1 or b.shape[0] != k.shape[0]:
            raise ShapeMismatch(f"layer {self.name!r}: kernel {k.shape} / bias {b.shape}")
        if not (np.isfinite(k).all() and np.isfinite(b).all()):
            raise ValueError(f"layer {self.name!r} has non-finite values")
        k.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "kernel", k)
        object.__setattr__(self, "bias", b)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.kernel.shape


@dataclass(frozen=True, eq=False)
class VggWeights:
    """The three required conv layers plus the preprocessing constants."""

    layers: tuple[ConvLayerWeights, ConvLayerWeights, ConvLayerWeights]
    mean: np.ndarray  # (3,) float32
    std: np.ndarray  # (3,) float32

    def __post_init__(self) -> None:
        m = np.ascontiguousarray(self.mean, dtype=np.float32)
        s = np.ascontiguousarray(self.std, dtype=np.float32)
        m.flags.writeable = False
        s.flags.writeable = False
        object.__setattr__(self, "mean", m)
        object.__setattr__(self, "std", s)

    def layer(self, name: str) -> ConvLayerWeights:
        for lw in self.layers:
            if lw.name == name:
                return lw
        raise KeyError(name)


class _Reader:
    def __init__(self, blob: bytes) -> None:
        self.blob = blob
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.blob):
            raise TruncatedFile(f"needed {n} bytes at offset {self.pos}, file has {len(self.blob)}")
        chunk = self.blob[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def f32_array(self, count: int) -> np.ndarray:
        raw = self.take(4 * count)
        return np.frombuffer(raw, dtype="<f4", count=count).astype(np.float32)


def load_weights(path: str) -> VggWeights:
    """Parse a VGGW file and return exactly the three required layers."""
    with open(path, "rb") as fh:
        blob = fh.read()
    r = _Reader(blob)
    if r.take(4) != VGGW_MAGIC:
        raise BadMagic(f"{path}: not a VGGW file")
    version = r.u32()
    if version != VGGW_VERSION:
        raise BadMagic(f"{path}: unsupported VGGW version {version}")
    pre = r.f32_array(12)
    mean, std = pre[0:3], pre[3:6]
    if np.any(std <= 0):
        raise ShapeMismatch(f"{path}: preprocessing std must be positive, got {std.tolist()}")
    layer_count = r.u32()
    found: dict[str, ConvLayerWeights] = {}
    for _ in range(layer_count):
        name_len = r.u32()
        name = r.take(name_len).decode("utf-8")
        out_c, in_c, k_h, k_w = (r.u32() for _ in range(4))
        kernel = r.f32_array(out_c * in_c * k_h * k_w).reshape(out_c, in_c, k_h, k_w)
        bias = r.f32_array(out_c)
        found[name] = ConvLayerWeights(name, kernel, bias)
    layers = []
    for name, shape in REQUIRED_LAYERS:
        if name not in found:
            raise ShapeMismatch(f"{path}: required layer {name!r} missing")
        lw = found[name]
        if lw.shape != shape:
            raise ShapeMismatch(f"{path}: layer {name!r} has shape {lw.shape}, expected {shape}")
        layers.append(lw)
    return VggWeights(tuple(layers), mean, std)


@dataclass(frozen=True, eq=False)
class FeatureStack:
    """Post-ReLU feature volumes: layers[0] is relu_1_1, layers[1] is relu_2_1."""

    layers: tuple[np.ndarray, ...]  # each (channels, height, width) float64, >= 0


def _conv3x3(x: np.ndarray, layer: ConvLayerWeights) -> np.ndarray:
    # 3x3, stride 1, zero padding 1, computed as blocked im2col + GEMM.
    # Accumulation is float64 so the result tracks a direct-summation
    # reference everywhere, including near cancellation zeros.
    c, h, w = x.shape
    out_c = layer.kernel.shape[0]
    xp = np.zeros((c, h + 2, w + 2), dtype=np.float64)
    xp[:, 1:-1, 1:-1] = x
    windows = np.lib.stride_tricks.sliding_window_view(xp, (3, 3), axis=(1, 2))
    kmat = layer.kernel.astype(np.float64).reshape(out_c, c * 9).T
    bias = layer.bias.astype(np.float64)
    out = np.empty((out_c, h, w), dtype=np.float64)
    # keep the per-block patch buffer around 64 MB
    block = max(1, (64 << 20) // max(1, c * 9 * w * 8))
    for r0 in range(0, h, block):
        r1 = min(h, r0 + block)
        patches = windows[:, r0:r1].transpose(1, 2, 0, 3, 4).reshape((r1 - r0) * w, c * 9)
        res = patches @ kmat
        out[:, r0:r1, :] = res.reshape(r1 - r0, w, out_c).transpose(2, 0, 1)
    out += bias[:, None, None]
    return out


def _maxpool2(x: np.ndarray) -> np.ndarray:
    # 2x2 max, stride 2, no padding; odd trailing row/column is dropped (floor)
    c, h, w = x.shape
    h2, w2 = h // 2, w // 2
    return x[:, : h2 * 2, : w2 * 2].reshape(c, h2, 2, w2, 2).max(axis=(2, 4))


def forward(img: PlanarImage, weights: VggWeights) -> FeatureStack:
    """Run conv1_1 .. conv2_1 on a 3-plane image, returning relu_1_1 and relu_2_1."""
    if weights is None:
        raise WeightsMissing("forward pass needs loaded VGGW weights")
    if img.planes != 3:
        raise ShapeMismatch(f"forward expects a 3-plane image, got {img.planes}")
    mean = weights.mean.astype(np.float64)
    std = weights.std.astype(np.float64)
    x = (img.data - mean[:, None, None]) / std[:, None, None]
    phi1 = np.maximum(_conv3x3(x, weights.layer("conv1_1")), 0.0)
    t = np.maximum(_conv3x3(phi1, weights.layer("conv1_2")), 0.0)
    phi2 = np.maximum(_conv3x3(_maxpool2(t), weights.layer("conv2_1")), 0.0)
    return FeatureStack((phi1, phi2))


def activity_map(stack: FeatureStack, layer: int) -> PlanarImage:
    """Per-pixel channel-wise l1 magnitude of one feature volume (layer is 1-based)."""
    if layer not in (1, 2):
        raise ValueError(f"layer must be 1 or 2, got {layer}")
    vol = stack.layers[layer - 1]
    return PlanarImage(np.abs(vol).sum(axis=0, dtype=np.float64))


def weight_map(
    activities: Sequence[PlanarImage],
    target_size: tuple[int, int],
    epsilon: float = EPSILON,
) -> PlanarImage:
    """Bounded saliency weight: upsample each activity map to ``target_size``
    (height, width), normalise each by its own max, average across layers."""
    if len(activities) < 1:
        raise ValueError("need at least one activity map")
    th, tw = target_size
    acc = np.zeros((th, tw))
    for amap in activities:
        arr = resize_bilinear(amap.plane(0), th, tw)
        acc += arr / max(float(arr.max()), epsilon)
    return PlanarImage(np.clip(acc / len(activities), 0.0, 1.0))
