"""Checkpoint extraction and deterministic VGGW serialization.

Container layout (little-endian): magic ``VGGW``, version u32, 12 f32
preprocessing values (mean[3], std[3], 6 reserved zeros), layer count u32,
then per layer a u32 name length, the ASCII name, four u32 kernel dimensions
(outC, inC, kH, kW), the f32 kernel coefficients and the f32 biases.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

SOURCE_MODEL_IDENTIFIER = "torchvision/vgg19-dcbb9e9d"
CHECKPOINT_URL = "https://download.pytorch.org/models/vgg19-dcbb9e9d.pth"

# network-order conv layers and the checkpoint keys they live under
LAYER_SOURCES = (
    ("conv1_1", "features.0"),
    ("conv1_2", "features.2"),
    ("conv2_1", "features.5"),
)
EXPECTED_SHAPES = {
    "conv1_1": (64, 3, 3, 3),
    "conv1_2": (64, 64, 3, 3),
    "conv2_1": (128, 64, 3, 3),
}
LAYER_NAMES = tuple(name for name, _ in LAYER_SOURCES)

# normalization the pretrained model assumes, as documented by its publisher
MEAN = (0.485, 0.456, 0.406)
STD = (0.229, 0.224, 0.225)

FORMAT_VERSION = 1
MAGIC = b"VGGW"


class ModelUnavailable(Exception):
    """Pretrained weights could not be obtained or are not a VGG-19."""


class WriteFailure(Exception):
    """The output file could not be written."""


@dataclass(frozen=True)
class ExportManifest:
    """Record of one export: where the weights came from and what was written."""

    source_model_identifier: str
    layer_names: tuple[str, ...]
    checksum: str

    def __post_init__(self) -> None:
        if self.layer_names != LAYER_NAMES:
            raise ValueError(
                f"expected layers {LAYER_NAMES} in network order, got {self.layer_names}"
            )

    def to_dict(self) -> dict:
        return {
            "sourceModelIdentifier": self.source_model_identifier,
            "layerNames": list(self.layer_names),
            "checksum": self.checksum,
        }


def _load_state_dict(source: str | None) -> dict:
    try:
        import torch
    except ImportError as exc:
        raise ModelUnavailable(f"torch is required to read checkpoints: {exc}") from exc
    try:
        if source is not None:
            return torch.load(source, map_location="cpu", weights_only=True)
        import torch.hub

        return torch.hub.load_state_dict_from_url(
            CHECKPOINT_URL, map_location="cpu", weights_only=True
        )
    except ModelUnavailable:
        raise
    except Exception as exc:
        origin = source if source is not None else CHECKPOINT_URL
        raise ModelUnavailable(f"cannot obtain checkpoint from {origin}: {exc}") from exc


def _extract_layers(state_dict: dict) -> list[tuple[str, np.ndarray, np.ndarray]]:
    layers = []
    for name, key in LAYER_SOURCES:
        try:
            weight = state_dict[f"{key}.weight"]
            bias = state_dict[f"{key}.bias"]
        except KeyError as exc:
            raise ModelUnavailable(
                f"checkpoint lacks {exc.args[0]}; not a VGG-19 state dict"
            ) from exc
        kernel = np.ascontiguousarray(
            weight.detach().cpu().numpy(), dtype=np.float32)
        bias_arr = np.ascontiguousarray(bias.detach().cpu().numpy(), dtype=np.float32)
        if kernel.shape != EXPECTED_SHAPES[name] or bias_arr.shape != (kernel.shape[0],):
            raise ModelUnavailable(
                f"layer {name}: kernel {kernel.shape} / bias {bias_arr.shape} do not "
                f"match the VGG-19 architecture {EXPECTED_SHAPES[name]}"
            )
        layers.append((name, kernel, bias_arr))
    return layers


def serialize(layers: list[tuple[str, np.ndarray, np.ndarray]]) -> bytes:
    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<I", FORMAT_VERSION)
    blob += struct.pack("<12f", *MEAN, *STD, *(0.0,) * 6)
    blob += struct.pack("<I", len(layers))
    for name, kernel, bias in layers:
        encoded = name.encode("ascii")
        blob += struct.pack("<I", len(encoded))
        blob += encoded
        blob += struct.pack("<4I", *kernel.shape)
        blob += np.ascontiguousarray(kernel, dtype="<f4").tobytes()
        blob += np.ascontiguousarray(bias, dtype="<f4").tobytes()
    return bytes(blob)


def export(output_path: str, source: str | None = None) -> ExportManifest:
    """Write the VGGW file and return the manifest describing it."""
    state_dict = _load_state_dict(source)
    layers = _extract_layers(state_dict)
    blob = serialize(layers)
    try:
        with open(output_path, "wb") as fh:
            fh.write(blob)
    except OSError as exc:
        raise WriteFailure(f"cannot write {output_path}: {exc}") from exc
    identifier = SOURCE_MODEL_IDENTIFIER if source is None else f"file:{source}"
    return ExportManifest(
        source_model_identifier=identifier,
        layer_names=tuple(name for name, _, _ in layers),
        checksum=hashlib.sha256(blob).hexdigest(),
    )
