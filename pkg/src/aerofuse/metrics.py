"""Fusion quality metrics: mutual information, visual information fidelity, PSNR.

Every metric compares one fused image against the source channels it was
built from, after an internal grayscale conversion.  Aggregation across
sources: MI sums, VIF and PSNR average (PSNR averages the per-source decibel
values).  All parameter choices are exposed through ``metric_parameters`` so
reports are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.ndimage import convolve as _ndconvolve
from scipy.signal import fftconvolve

from .errors import EmptyInput, SizeMismatch, TooSmall
from .image import PlanarImage, to_grayscale
from .io import quantize

HISTOGRAM_BINS = 256
PSNR_CAP_DB = 99.0
VIF_SCALES = 4
VIF_WINDOW_SUPPORTS = (11, 5, 3, 3)
VIF_WINDOW_SIGMAS = (2.0, 1.0, 0.5, 0.25)
VIF_NOISE_VARIANCE = 2.0  # on the 0-255 intensity scale
VIF_MIN_SIZE = 32
_EPS = 1e-10


def metric_parameters() -> dict:
    """Parameterization block recorded alongside every metrics report."""
    return {
        "mutual_information": {
            "histogram_bins": HISTOGRAM_BINS,
            "quantization": "8-bit, round half up",
            "log_base": 2,
            "aggregation": "sum over sources",
        },
        "vif": {
            "scales": VIF_SCALES,
            "window_supports": list(VIF_WINDOW_SUPPORTS),
            "window_sigmas": list(VIF_WINDOW_SIGMAS),
            "noise_variance": VIF_NOISE_VARIANCE,
            "intensity_scale": 255,
            "aggregation": "mean over scales, then mean over sources",
        },
        "psnr": {
            "peak": 1.0,
            "cap_db": PSNR_CAP_DB,
            "aggregation": "mean of per-source decibel values",
        },
    }


def _as_gray_pair(fused: PlanarImage, source: PlanarImage) -> tuple[np.ndarray, np.ndarray]:
    if (fused.height, fused.width) != (source.height, source.width):
        raise SizeMismatch(
            f"fused is {fused.height}x{fused.width}, source is {source.height}x{source.width}"
        )
    return to_grayscale(fused).plane(0), to_grayscale(source).plane(0)


def _require_sources(sources: Sequence[PlanarImage]) -> None:
    if len(sources) == 0:
        raise EmptyInput("metrics need at least one source channel")


def mutual_information_single(fused: PlanarImage, source: PlanarImage) -> float:
    """MI in bits between 8-bit-quantized grayscale versions of the two images."""
    a, b = _as_gray_pair(fused, source)
    ca = quantize(a, HISTOGRAM_BINS - 1).astype(np.intp)
    cb = quantize(b, HISTOGRAM_BINS - 1).astype(np.intp)
    joint = np.bincount(
        ca.ravel() * HISTOGRAM_BINS + cb.ravel(), minlength=HISTOGRAM_BINS * HISTOGRAM_BINS
    ).reshape(HISTOGRAM_BINS, HISTOGRAM_BINS)
    p = joint / joint.sum()
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    nz = p > 0
    outer = px[:, None] * py[None, :]
    return float(np.sum(p[nz] * np.log2(p[nz] / outer[nz])))


def mutual_information(fused: PlanarImage, sources: Sequence[PlanarImage]) -> float:
    """Total information transmitted from the sources: sum of per-source MI."""
    _require_sources(sources)
    return float(sum(mutual_information_single(fused, s) for s in sources))


def _gaussian_window(support: int, sigma: float) -> np.ndarray:
    x = np.arange(support, dtype=np.float64) - (support - 1) / 2.0
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    k2 = np.outer(k, k)
    return k2 / k2.sum()


def vif_single(fused: PlanarImage, source: PlanarImage) -> float:
    """Visual information fidelity of ``fused`` with the source as reference.

    Per scale: local Gaussian-window variance statistics feed the ratio of
    distorted-channel information to reference information; the four scale
    ratios are averaged with equal weights.  Values above 1 are legitimate
    (contrast-enhanced results carry more apparent information) and are not
    clamped.
    """
    dist, ref = _as_gray_pair(fused, source)
    if min(ref.shape) < VIF_MIN_SIZE:
        raise TooSmall(f"vif needs at least {VIF_MIN_SIZE}x{VIF_MIN_SIZE}, got {ref.shape}")
    ref = ref * 255.0
    dist = dist * 255.0
    ratios = []
    for scale in range(VIF_SCALES):
        win = _gaussian_window(VIF_WINDOW_SUPPORTS[scale], VIF_WINDOW_SIGMAS[scale])
        if scale > 0:
            ref = _ndconvolve(ref, win, mode="reflect")[::2, ::2]
            dist = _ndconvolve(dist, win, mode="reflect")[::2, ::2]
        mu1 = fftconvolve(ref, win, mode="valid")
        mu2 = fftconvolve(dist, win, mode="valid")
        s1 = np.maximum(fftconvolve(ref * ref, win, mode="valid") - mu1 * mu1, 0.0)
        s2 = np.maximum(fftconvolve(dist * dist, win, mode="valid") - mu2 * mu2, 0.0)
        s12 = fftconvolve(ref * dist, win, mode="valid") - mu1 * mu2

        g = s12 / (s1 + _EPS)
        sv = s2 - g * s12
        g = np.where(s1 < _EPS, 0.0, g)
        sv = np.where(s1 < _EPS, s2, sv)
        s1 = np.where(s1 < _EPS, 0.0, s1)
        sv = np.where(s2 < _EPS, 0.0, sv)
        g = np.where(s2 < _EPS, 0.0, g)
        sv = np.where(g < 0.0, s2, sv)
        g = np.maximum(g, 0.0)
        sv = np.maximum(sv, _EPS)

        num = float(np.sum(np.log10(1.0 + g * g * s1 / (sv + VIF_NOISE_VARIANCE))))
        den = float(np.sum(np.log10(1.0 + s1 / VIF_NOISE_VARIANCE)))
        ratios.append(num / den if den > _EPS else 1.0)
    return float(np.mean(ratios))


def vif(fused: PlanarImage, sources: Sequence[PlanarImage]) -> float:
    """Mean per-source visual information fidelity of the fused image."""
    _require_sources(sources)
    return float(np.mean([vif_single(fused, s) for s in sources]))


def psnr_single(fused: PlanarImage, source: PlanarImage) -> float:
    """Peak signal-to-noise ratio in dB on [0,1] grayscale, capped at 99 dB."""
    a, b = _as_gray_pair(fused, source)
    mse = float(np.mean((a - b) ** 2))
    if mse <= 0.0:
        return PSNR_CAP_DB
    return min(10.0 * math.log10(1.0 / mse), PSNR_CAP_DB)


def psnr(fused: PlanarImage, sources: Sequence[PlanarImage]) -> float:
    """Mean of the per-source PSNR values, in dB."""
    _require_sources(sources)
    return float(np.mean([psnr_single(fused, s) for s in sources]))


@dataclass(frozen=True)
class SourceScores:
    """Per-source metric breakdown, in source-list order."""

    name: str
    mi: float
    vif: float
    psnr: float


@dataclass(frozen=True)
class MetricsReport:
    """Aggregate metrics plus the per-source breakdown they came from."""

    mi: float
    vif: float
    psnr: float
    per_source: tuple[SourceScores, ...]

    def to_dict(self) -> dict:
        return {
            "metrics": [
                {
                    "name": "mutual_information",
                    "aggregate": self.mi,
                    "perSource": {s.name: s.mi for s in self.per_source},
                },
                {
                    "name": "vif",
                    "aggregate": self.vif,
                    "perSource": {s.name: s.vif for s in self.per_source},
                },
                {
                    "name": "psnr",
                    "aggregate": self.psnr,
                    "perSource": {s.name: s.psnr for s in self.per_source},
                },
            ],
            "parameterization": metric_parameters(),
        }


def evaluate(
    fused: PlanarImage,
    sources: Sequence[PlanarImage],
    names: Sequence[str] | None = None,
) -> MetricsReport:
    """Compute all three metrics and their per-source breakdown."""
    _require_sources(sources)
    if names is None:
        names = [f"source{i}" for i in range(len(sources))]
    if len(names) != len(sources):
        raise SizeMismatch(f"{len(names)} names for {len(sources)} sources")
    rows = tuple(
        SourceScores(
            name=str(names[i]),
            mi=mutual_information_single(fused, src),
            vif=vif_single(fused, src),
            psnr=psnr_single(fused, src),
        )
        for i, src in enumerate(sources)
    )
    return MetricsReport(
        mi=float(sum(r.mi for r in rows)),
        vif=float(np.mean([r.vif for r in rows])),
        psnr=float(np.mean([r.psnr for r in rows])),
        per_source=rows,
    )
