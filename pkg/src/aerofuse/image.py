"""Raster container, channel roles, and colour conversions used by every stage.

Samples are stored as normalised float64 in planar (plane, row, column) order.
The nominal range is [0, 1]; signed intermediates (high-detail layers) may
leave it, but every sample stays finite.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import UnknownColormap, UnsupportedPlaneCount

# Rec.601 luma triple; sums to exactly 1.0 so replicate/grayscale round-trips hold.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


class ChannelRole(Enum):
    BASIS = "basis"
    FEATURE = "feature"


class Modality(Enum):
    RGB = "rgb"
    THERMAL = "thermal"
    OTHER = "other"


class Acquisition(Enum):
    SINGLE = "single"
    INTEGRAL = "integral"


@dataclass(frozen=True)
class ChannelDescriptor:
    """How one input participates in a fusion job."""

    role: ChannelRole
    modality: Modality = Modality.OTHER
    acquisition: Acquisition = Acquisition.SINGLE
    color_coded: bool = False


@dataclass(frozen=True, eq=False)
class PlanarImage:
    """Immutable multi-plane raster.

    ``data`` has shape (planes, height, width), dtype float64, and is made
    read-only on construction, so instances are safe to share across threads.
    """

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.data, dtype=np.float64, copy=True, order="C")
        if arr.ndim == 2:
            arr = arr[np.newaxis, :, :]
        if arr.ndim != 3 or min(arr.shape) < 1:
            raise ValueError(f"expected a (planes, height, width) array, got shape {np.shape(self.data)}")
        if not np.isfinite(arr).all():
            raise ValueError("image samples must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def planes(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    def plane(self, index: int) -> np.ndarray:
        """Read-only view of one plane as a (height, width) array."""
        return self.data[index]

    @classmethod
    def constant(cls, value: float, height: int, width: int, planes: int = 1) -> "PlanarImage":
        return cls(np.full((planes, height, width), float(value)))

    @classmethod
    def from_interleaved(cls, arr: np.ndarray) -> "PlanarImage":
        """Build from (H, W) or (H, W, C) pixel-interleaved layout."""
        a = np.asarray(arr, dtype=np.float64)
        if a.ndim == 2:
            return cls(a[np.newaxis, :, :])
        if a.ndim == 3:
            return cls(np.moveaxis(a, 2, 0))
        raise ValueError(f"expected (H, W) or (H, W, C), got shape {a.shape}")

    def to_interleaved(self) -> np.ndarray:
        return np.moveaxis(self.data, 0, 2).copy()

    def clamped(self) -> "PlanarImage":
        return PlanarImage(np.clip(self.data, 0.0, 1.0))


def to_grayscale(img: PlanarImage) -> PlanarImage:
    """Collapse to a single luminance plane (Rec.601 weights); 1-plane input is copied."""
    if img.planes == 1:
        return PlanarImage(img.data)
    if img.planes == 3:
        w = LUMA_WEIGHTS
        gray = w[0] * img.data[0] + w[1] * img.data[1] + w[2] * img.data[2]
        return PlanarImage(gray)
    raise UnsupportedPlaneCount(f"grayscale conversion expects 1 or 3 planes, got {img.planes}")


def replicate_planes(img: PlanarImage) -> PlanarImage:
    """Stack a single plane into three identical planes."""
    if img.planes != 1:
        raise UnsupportedPlaneCount(f"replicate_planes expects 1 plane, got {img.planes}")
    return PlanarImage(np.broadcast_to(img.data[0], (3,) + img.data.shape[1:]))


def _gray_table() -> np.ndarray:
    ramp = np.arange(256, dtype=np.float64) / 255.0
    return np.stack([ramp, ramp, ramp], axis=1)


def _ember_table() -> np.ndarray:
    # Fixed perceptual heat map (black -> purple -> red -> orange -> pale yellow),
    # monotone in Rec.601 luminance.
    stops = np.array([0.0, 0.15, 0.35, 0.55, 0.75, 0.90, 1.0])
    colors = np.array(
        [
            [0.001, 0.000, 0.014],
            [0.230, 0.040, 0.430],
            [0.550, 0.120, 0.480],
            [0.850, 0.280, 0.260],
            [0.980, 0.550, 0.080],
            [0.990, 0.800, 0.150],
            [0.990, 0.990, 0.750],
        ]
    )
    t = np.arange(256, dtype=np.float64) / 255.0
    table = np.empty((256, 3))
    for c in range(3):
        table[:, c] = np.interp(t, stops, colors[:, c])
    return table


COLORMAPS: dict[str, np.ndarray] = {
    "gray": _gray_table(),
    "ember": _ember_table(),
}


def color_code(img: PlanarImage, colormap: str = "ember") -> PlanarImage:
    """Map a single plane through a 256-entry colour table (linear interpolation)."""
    if img.planes != 1:
        raise UnsupportedPlaneCount(f"color_code expects 1 plane, got {img.planes}")
    try:
        table = COLORMAPS[colormap]
    except KeyError:
        raise UnknownColormap(f"unknown colormap {colormap!r}; available: {sorted(COLORMAPS)}") from None
    x = np.clip(img.data[0], 0.0, 1.0) * 255.0
    i0 = np.floor(x).astype(np.intp)
    i1 = np.minimum(i0 + 1, 255)
    frac = x - i0
    out = np.empty((3,) + x.shape)
    for c in range(3):
        out[c] = table[i0, c] * (1.0 - frac) + table[i1, c] * frac
    return PlanarImage(out)


def resize_bilinear(arr: np.ndarray, out_height: int, out_width: int) -> np.ndarray:
    """Bilinear resampling of a 2-D array, half-pixel-centre convention, clamped edges."""
    a = np.asarray(arr, dtype=np.float64)
    h, w = a.shape
    if (h, w) == (out_height, out_width):
        return a.copy()
    ys = np.clip((np.arange(out_height) + 0.5) * h / out_height - 0.5, 0.0, h - 1.0)
    xs = np.clip((np.arange(out_width) + 0.5) * w / out_width - 0.5, 0.0, w - 1.0)
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.minimum(y0, h - 2) if h > 1 else y0
    x0 = np.minimum(x0, w - 2) if w > 1 else x0
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    top = a[np.ix_(y0, x0)] * (1 - fx) + a[np.ix_(y0, x1)] * fx
    bot = a[np.ix_(y1, x0)] * (1 - fx) + a[np.ix_(y1, x1)] * fx
    return top * (1 - fy) + bot * fy
