"""PNG and TIFF codecs for planar images.

Encoding clamps to [0, 1] and quantises round-half-up. 8-bit PNG carries 1 or
3 planes; TIFF carries 8- or 16-bit integer samples (16-bit restricted to one
plane) or raw 32-bit float planes as a multi-page file.
"""

from __future__ import annotations

import os

import numpy as np
from PIL import Image, ImageSequence

from .image import PlanarImage


def quantize(arr: np.ndarray, max_code: int) -> np.ndarray:
    # round-half-up, not banker's rounding
    return np.floor(np.clip(arr, 0.0, 1.0) * max_code + 0.5)


def write_png(img: PlanarImage, path: str | os.PathLike) -> None:
    codes = quantize(img.data, 255).astype(np.uint8)
    if img.planes == 1:
        Image.fromarray(codes[0], mode="L").save(path, format="PNG")
    elif img.planes == 3:
        Image.fromarray(np.moveaxis(codes, 0, 2), mode="RGB").save(path, format="PNG")
    else:
        raise ValueError(f"PNG supports 1 or 3 planes, got {img.planes}")


def write_tiff(img: PlanarImage, path: str | os.PathLike, bit_depth: int = 16) -> None:
    if bit_depth == 8:
        codes = quantize(img.data, 255).astype(np.uint8)
        if img.planes == 1:
            Image.fromarray(codes[0], mode="L").save(path, format="TIFF")
        elif img.planes == 3:
            Image.fromarray(np.moveaxis(codes, 0, 2), mode="RGB").save(path, format="TIFF")
        else:
            raise ValueError(f"8-bit TIFF supports 1 or 3 planes, got {img.planes}")
    elif bit_depth == 16:
        if img.planes != 1:
            raise ValueError("16-bit TIFF output is single-plane only")
        codes = quantize(img.data[0], 65535).astype(np.uint16)
        Image.fromarray(codes).save(path, format="TIFF")
    else:
        raise ValueError(f"unsupported TIFF bit depth {bit_depth}")


def write_float_tiff(img: PlanarImage, path: str | os.PathLike) -> None:
    """Raw 32-bit float dump, one page per plane, no clamping or quantisation."""
    frames = [Image.fromarray(p.astype(np.float32), mode="F") for p in img.data]
    frames[0].save(path, format="TIFF", save_all=True, append_images=frames[1:])


def write_image(img: PlanarImage, path: str | os.PathLike) -> None:
    """Write by extension: .png -> 8-bit PNG, .tif/.tiff -> 16-bit (1 plane) or 8-bit TIFF."""
    ext = os.path.splitext(os.fspath(path))[1].lower()
    if ext == ".png":
        write_png(img, path)
    elif ext in (".tif", ".tiff"):
        write_tiff(img, path, bit_depth=16 if img.planes == 1 else 8)
    else:
        raise ValueError(f"unsupported image extension {ext!r} (use .png, .tif, .tiff)")


def read_image(path: str | os.PathLike) -> PlanarImage:
    """Decode a PNG/TIFF into normalised [0, 1] samples (float pages pass through raw)."""
    with Image.open(path) as im:
        if im.format == "TIFF" and im.mode == "F":
            planes = [np.asarray(fr, dtype=np.float64) for fr in ImageSequence.Iterator(im)]
            return PlanarImage(np.stack(planes))
        if im.mode in ("I;16", "I;16B", "I;16L"):
            return PlanarImage(np.asarray(im, dtype=np.float64) / 65535.0)
        if im.mode == "I":
            # 32-bit integer container, assume 16-bit payload
            return PlanarImage(np.asarray(im, dtype=np.float64) / 65535.0)
        if im.mode in ("RGBA", "LA", "P"):
            im = im.convert("RGB" if im.mode in ("RGBA", "P") else "L")
        if im.mode == "L":
            return PlanarImage(np.asarray(im, dtype=np.float64) / 255.0)
        if im.mode == "RGB":
            arr = np.asarray(im, dtype=np.float64) / 255.0
            return PlanarImage(np.moveaxis(arr, 2, 0))
    raise ValueError(f"unsupported image mode {im.mode!r} in {path}")
