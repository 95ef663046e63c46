"""Fusion pipeline: combine a basis image with salient detail from feature channels.

Per feature channel n the pipeline extracts the high-detail residual H_n with
the unified filter, derives a saliency weight W_n from shallow CNN features,
forms the feature mask FM_n = W_n * H_n, the feature map G_n = FM_n * F_n, and
finally adds every G_n onto the untouched basis image.  Two ablations degrade
the pipeline on purpose: ``filterOnly`` forces W_n to 1 (no CNN influence) and
``cnnOnly`` forces H_n to 1 (no filter influence).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .errors import EmptyInput, SizeMismatch, UnsupportedPlaneCount, WeightsMissing
from .filters import FilterParams, Solver, high_detail
from .image import (
    ChannelDescriptor,
    ChannelRole,
    PlanarImage,
    replicate_planes,
    resize_bilinear,
    to_grayscale,
)
from .vgg import VggWeights, activity_map, forward, weight_map


class WeightRule(Enum):
    NORMALIZED_AVERAGE = "normalizedAverage"
    CROSS_CHANNEL_SOFTMAX = "crossChannelSoftmax"


class MaskNormalization(Enum):
    MINMAX = "minmax"
    NONE = "none"


class Ablation(Enum):
    FULL = "full"
    FILTER_ONLY = "filterOnly"
    CNN_ONLY = "cnnOnly"


ProgressHook = Callable[[str, float], None]


@dataclass(frozen=True)
class FusionConfig:
    lam: float = 5.0
    layers: tuple[int, ...] = (1, 2)
    weight_rule: WeightRule = WeightRule.NORMALIZED_AVERAGE
    mask_normalization: MaskNormalization = MaskNormalization.MINMAX
    epsilon: float = 1e-12
    clamp_output: bool = True
    ablation: Ablation = Ablation.FULL
    solver: Solver = Solver.SPECTRAL_PERIODIC

    def __post_init__(self) -> None:
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if len(self.layers) == 0:
            raise ValueError("at least one CNN layer index is required")
        if any(i not in (1, 2) for i in self.layers):
            raise ValueError(f"layer indices must be in {{1, 2}}, got {self.layers}")

    def filter_params(self) -> FilterParams:
        return FilterParams(lam=self.lam, solver=self.solver)

    def describe(self) -> dict:
        """Flat JSON-ready view for report parameterization blocks."""
        return {
            "lambda": self.lam,
            "layers": list(self.layers),
            "weightRule": self.weight_rule.value,
            "maskNormalization": self.mask_normalization.value,
            "epsilon": self.epsilon,
            "clampOutput": self.clamp_output,
            "ablation": self.ablation.value,
            "solver": self.solver.value,
        }


@dataclass(frozen=True)
class Channel:
    """One input image plus its role description and an optional display label."""

    image: PlanarImage
    descriptor: ChannelDescriptor
    label: str | None = None


@dataclass(frozen=True)
class FusionJob:
    basis: Channel
    features: tuple[Channel, ...]
    config: FusionConfig = field(default_factory=FusionConfig)

    def __post_init__(self) -> None:
        if self.basis.descriptor.role is not ChannelRole.BASIS:
            raise ValueError("basis channel must carry the Basis role")
        if len(self.features) == 0:
            raise EmptyInput("a fusion job needs at least one feature channel")
        size = (self.basis.image.height, self.basis.image.width)
        for ch in self.features:
            if ch.descriptor.role is not ChannelRole.FEATURE:
                raise ValueError("feature channels must carry the Feature role")
            if (ch.image.height, ch.image.width) != size:
                raise SizeMismatch(
                    f"feature {ch.label or '?'} is {ch.image.height}x{ch.image.width}, "
                    f"basis is {size[0]}x{size[1]}"
                )


@dataclass(frozen=True)
class ChannelIntermediates:
    """Everything the pipeline produced for one feature channel.

    ``activities`` are the per-layer CNN activity maps at their native
    resolutions; empty when the CNN stage was skipped (filterOnly ablation).
    """

    label: str
    high_detail: PlanarImage
    activities: tuple[PlanarImage, ...]
    weight: PlanarImage
    mask: PlanarImage
    feature_map: PlanarImage


@dataclass(frozen=True)
class FusionResult:
    fused: PlanarImage
    channels: tuple[ChannelIntermediates, ...]


def feature_mask(weight: PlanarImage, detail: PlanarImage, config: FusionConfig) -> PlanarImage:
    """FM = W * H with the weight broadcast over planes, optionally min-max
    rescaled to [0,1] over the whole channel (a constant mask maps to 0)."""
    if (weight.height, weight.width) != (detail.height, detail.width):
        raise SizeMismatch(
            f"weight is {weight.height}x{weight.width}, detail is {detail.height}x{detail.width}"
        )
    if weight.planes != 1 and weight.planes != detail.planes:
        raise SizeMismatch(f"weight has {weight.planes} planes, detail has {detail.planes}")
    fm = weight.data * detail.data if weight.planes == detail.planes else weight.data[0] * detail.data
    if config.mask_normalization is MaskNormalization.MINMAX:
        lo = float(fm.min())
        hi = float(fm.max())
        span = hi - lo
        fm = (fm - lo) / span if span > config.epsilon else np.zeros_like(fm)
    return PlanarImage(fm)


def feature_map(mask: PlanarImage, feature: PlanarImage) -> PlanarImage:
    """G = FM * F elementwise; a 1-plane mask broadcasts over F's planes."""
    if (mask.height, mask.width) != (feature.height, feature.width):
        raise SizeMismatch(
            f"mask is {mask.height}x{mask.width}, feature is {feature.height}x{feature.width}"
        )
    if mask.planes == feature.planes:
        return PlanarImage(mask.data * feature.data)
    if mask.planes == 1:
        return PlanarImage(mask.data[0] * feature.data)
    raise SizeMismatch(f"mask has {mask.planes} planes, feature has {feature.planes}")


def _cnn_input(img: PlanarImage) -> PlanarImage:
    if img.planes == 3:
        return img
    if img.planes == 1:
        return replicate_planes(img)
    raise UnsupportedPlaneCount(f"feature channels must have 1 or 3 planes, got {img.planes}")


def _match_planes(img: PlanarImage, planes: int) -> PlanarImage:
    """Adapt a feature map to the basis plane count for the final sum."""
    if img.planes == planes:
        return img
    if img.planes == 1:
        return PlanarImage(np.broadcast_to(img.data[0], (planes,) + img.data.shape[1:]))
    if planes == 1:
        return to_grayscale(img)
    raise UnsupportedPlaneCount(f"cannot adapt {img.planes} planes to {planes}")


def _channel_activities(
    img: PlanarImage, config: FusionConfig, weights: VggWeights | None
) -> tuple[PlanarImage, ...]:
    if weights is None:
        raise WeightsMissing("fusion with CNN saliency needs a loaded weights file")
    stack = forward(_cnn_input(img), weights)
    return tuple(activity_map(stack, layer) for layer in config.layers)


def _softmax_weights(
    all_activities: Sequence[tuple[PlanarImage, ...]],
    size: tuple[int, int],
    epsilon: float,
) -> list[PlanarImage]:
    """Cross-channel weight rule: W_n is channel n's share of total activity."""
    sums = []
    for activities in all_activities:
        total = np.zeros(size)
        for amap in activities:
            total += resize_bilinear(amap.plane(0), *size)
        sums.append(total)
    denom = np.add.reduce(sums) + epsilon
    return [PlanarImage(np.clip(s / denom, 0.0, 1.0)) for s in sums]


def run_job(
    job: FusionJob,
    weights: VggWeights | None = None,
    progress: ProgressHook | None = None,
) -> FusionResult:
    """Execute the full pipeline, keeping per-channel intermediates.

    ``progress`` (if given) is called with (label, seconds) after each feature
    channel completes; the cross-channel weight rule reports its shared CNN
    pass once under the label "saliency".
    """
    config = job.config
    size = (job.basis.image.height, job.basis.image.width)
    params = config.filter_params()
    ones_weight = PlanarImage(np.ones(size))

    cnn_active = config.ablation is not Ablation.FILTER_ONLY
    shared: tuple[list[tuple[PlanarImage, ...]], list[PlanarImage]] | None = None
    if cnn_active and config.weight_rule is WeightRule.CROSS_CHANNEL_SOFTMAX:
        started = time.perf_counter()
        all_activities = [
            _channel_activities(ch.image, config, weights) for ch in job.features
        ]
        shared = (all_activities, _softmax_weights(all_activities, size, config.epsilon))
        if progress is not None:
            progress("saliency", time.perf_counter() - started)

    intermediates = []
    total = np.zeros_like(job.basis.image.data)
    for i, ch in enumerate(job.features):
        started = time.perf_counter()
        if not cnn_active:
            activities: tuple[PlanarImage, ...] = ()
            weight = ones_weight
        elif shared is not None:
            activities = shared[0][i]
            weight = shared[1][i]
        else:
            activities = _channel_activities(ch.image, config, weights)
            weight = weight_map(activities, size, epsilon=config.epsilon)
        if config.ablation is Ablation.CNN_ONLY:
            detail = PlanarImage(np.ones_like(ch.image.data))
        else:
            detail = high_detail(ch.image, params)
        mask = feature_mask(weight, detail, config)
        gmap = feature_map(mask, ch.image)
        total = total + _match_planes(gmap, job.basis.image.planes).data
        intermediates.append(
            ChannelIntermediates(
                label=ch.label or f"feature{i}",
                high_detail=detail,
                activities=activities,
                weight=weight,
                mask=mask,
                feature_map=gmap,
            )
        )
        if progress is not None:
            progress(intermediates[-1].label, time.perf_counter() - started)

    fused = PlanarImage(job.basis.image.data + total)
    if config.clamp_output:
        fused = fused.clamped()
    return FusionResult(fused=fused, channels=tuple(intermediates))


def fuse(
    job: FusionJob,
    weights: VggWeights | None = None,
    progress: ProgressHook | None = None,
) -> PlanarImage:
    """Fused image: basis plus the sum of all per-channel feature maps."""
    return run_job(job, weights, progress).fused


def alpha_blend(images: Sequence[PlanarImage]) -> PlanarImage:
    """Equal-contribution per-pixel mean; 1-plane inputs broadcast to the max
    plane count.  The comparison baseline for every fused result."""
    if len(images) == 0:
        raise EmptyInput("alpha blend needs at least one image")
    size = (images[0].height, images[0].width)
    planes = max(img.planes for img in images)
    acc = np.zeros((planes,) + size)
    for img in images:
        if (img.height, img.width) != size:
            raise SizeMismatch(f"image is {img.height}x{img.width}, expected {size[0]}x{size[1]}")
        acc += _match_planes(img, planes).data
    return PlanarImage(acc / len(images))
