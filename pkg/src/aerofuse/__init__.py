"""aerofuse: fuse one aerial basis image with salient spectral-channel detail.

The public surface re-exports the core types and operations; submodules stay
importable directly for the less common pieces (report writers, sample data).
"""

from .aos import (
    CameraFrame,
    FocalPlane,
    SyntheticApertureSpec,
    integrate,
    load_focal_plane,
    load_pose_file,
    measure_point_spread,
    project_to_focal_plane,
)
from .errors import AerofuseError
from .filters import FilterParams, Solver, high_detail, smooth
from .fusion import (
    Ablation,
    Channel,
    FusionConfig,
    FusionJob,
    FusionResult,
    MaskNormalization,
    WeightRule,
    alpha_blend,
    feature_map,
    feature_mask,
    fuse,
    run_job,
)
from .image import (
    Acquisition,
    ChannelDescriptor,
    ChannelRole,
    Modality,
    PlanarImage,
    color_code,
    replicate_planes,
    to_grayscale,
)
from .io import read_image, write_image
from .metrics import MetricsReport, evaluate, mutual_information, psnr, vif
from .vgg import FeatureStack, VggWeights, activity_map, forward, load_weights, weight_map

__version__ = "0.1.0"

__all__ = [
    "AerofuseError",
    "Ablation",
    "Acquisition",
    "CameraFrame",
    "Channel",
    "ChannelDescriptor",
    "ChannelRole",
    "FeatureStack",
    "FilterParams",
    "FocalPlane",
    "FusionConfig",
    "FusionJob",
    "FusionResult",
    "MaskNormalization",
    "MetricsReport",
    "Modality",
    "PlanarImage",
    "Solver",
    "SyntheticApertureSpec",
    "VggWeights",
    "WeightRule",
    "activity_map",
    "alpha_blend",
    "color_code",
    "evaluate",
    "feature_map",
    "feature_mask",
    "forward",
    "fuse",
    "high_detail",
    "integrate",
    "load_focal_plane",
    "load_pose_file",
    "load_weights",
    "measure_point_spread",
    "mutual_information",
    "project_to_focal_plane",
    "psnr",
    "read_image",
    "replicate_planes",
    "run_job",
    "smooth",
    "to_grayscale",
    "vif",
    "weight_map",
    "write_image",
]
