"""One-shot exporter for the VGGW weights file.

Pulls conv1_1, conv1_2 and conv2_1 from a standard pretrained VGG-19
checkpoint and serialises them, together with the normalization constants the
model assumes, into the binary container the fusion engine loads.  The writer
is deterministic: the same source weights always produce the same bytes.
"""

from .exporter import (
    ExportManifest,
    LAYER_SOURCES,
    ModelUnavailable,
    SOURCE_MODEL_IDENTIFIER,
    WriteFailure,
    export,
)

__all__ = [
    "ExportManifest",
    "LAYER_SOURCES",
    "ModelUnavailable",
    "SOURCE_MODEL_IDENTIFIER",
    "WriteFailure",
    "export",
]
