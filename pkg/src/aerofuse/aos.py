"""Synthetic-aperture integral imaging.

A stack of pose-annotated single images is registered onto a common focal
plane by plane-induced homographies and averaged.  Scene content on the focal
plane stays sharp while content at an offset o is smeared over a point spread
of roughly b = a * o / (h - o) for an aperture of size a at distance h.

Conventions: world coordinates are meters, ``orientation`` maps world to
camera (x_cam = R @ (X - position)), the camera looks along +z of its own
frame, and pixels follow u = fx * x / z + cx, v = fy * y / z + cy.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateHomography, EmptyStack, NoBlobFound, ShapeMismatch
from .image import PlanarImage, to_grayscale
from .io import read_image

DET_FLOOR = 1e-12
EDGE_TOLERANCE = 1e-6
CONTRAST_FLOOR = 2.0


@dataclass(frozen=True, eq=False)
class CameraFrame:
    """One captured exposure: pose, pinhole intrinsics and (optionally) pixels.

    ``image`` may be None for frames that only describe an output pixel grid,
    in which case ``width`` and ``height`` must be given explicitly.
    """

    position: np.ndarray  # (3,) meters, world frame
    orientation: np.ndarray  # (3, 3) rotation, world -> camera
    fx: float
    fy: float
    cx: float
    cy: float
    image: PlanarImage | None = None
    width: int | None = None
    height: int | None = None

    def __post_init__(self) -> None:
        pos = np.ascontiguousarray(self.position, dtype=np.float64).reshape(3)
        rot = np.ascontiguousarray(self.orientation, dtype=np.float64).reshape(3, 3)
        if not (np.isfinite(pos).all() and np.isfinite(rot).all()):
            raise ValueError("camera pose has non-finite entries")
        if np.abs(rot @ rot.T - np.eye(3)).max() > 1e-6 or abs(np.linalg.det(rot) - 1.0) > 1e-6:
            raise ValueError("orientation must be a proper rotation matrix")
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")
        w, h = self.width, self.height
        if self.image is not None:
            if w is None:
                w = self.image.width
            if h is None:
                h = self.image.height
            if (w, h) != (self.image.width, self.image.height):
                raise ShapeMismatch("explicit width/height disagree with the attached image")
        if w is None or h is None:
            raise ValueError("a frame without an image needs explicit width and height")
        if not (0 <= self.cx < w and 0 <= self.cy < h):
            raise ValueError("principal point lies outside the pixel grid")
        pos.flags.writeable = False
        rot.flags.writeable = False
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "orientation", rot)
        object.__setattr__(self, "width", int(w))
        object.__setattr__(self, "height", int(h))

    def without_image(self) -> "CameraFrame":
        return CameraFrame(
            self.position, self.orientation, self.fx, self.fy, self.cx, self.cy,
            image=None, width=self.width, height=self.height,
        )


@dataclass(frozen=True, eq=False)
class FocalPlane:
    """The plane everything is registered onto: n . X = n . point."""

    point: np.ndarray  # (3,) meters
    normal: np.ndarray  # (3,) unit vector

    def __post_init__(self) -> None:
        p = np.ascontiguousarray(self.point, dtype=np.float64).reshape(3)
        n = np.ascontiguousarray(self.normal, dtype=np.float64).reshape(3)
        if not (np.isfinite(p).all() and np.isfinite(n).all()):
            raise ValueError("focal plane has non-finite entries")
        norm = float(np.linalg.norm(n))
        if norm < 1e-12:
            raise ValueError("focal plane normal must be non-zero")
        n = n / norm
        p.flags.writeable = False
        n.flags.writeable = False
        object.__setattr__(self, "point", p)
        object.__setattr__(self, "normal", n)

    @property
    def offset(self) -> float:
        """Signed plane offset d in n . X = d."""
        return float(self.normal @ self.point)


@dataclass(frozen=True)
class SyntheticApertureSpec:
    """Geometry of one aperture sweep: sizes in meters, spread as measured."""

    aperture_size: float
    occluder_offset: float
    point_spread: float | None = None

    def __post_init__(self) -> None:
        if self.aperture_size < 0 or self.occluder_offset < 0:
            raise ValueError("aperture size and occluder offset must be non-negative")

    def predicted_spread(self, focal_distance: float) -> float:
        """Similar-triangles prediction b = a * o / (h - o), in meters."""
        gap = focal_distance - self.occluder_offset
        if gap <= 0:
            raise ValueError("occluder must sit between camera and focal plane")
        return self.aperture_size * self.occluder_offset / gap


@dataclass(frozen=True, eq=False)
class Projection:
    """A frame resampled into the output grid plus its per-pixel coverage."""

    image: PlanarImage
    coverage: np.ndarray  # (height, width) float64 in {0, 1}


def _intrinsic_matrix(frame: CameraFrame) -> np.ndarray:
    return np.array(
        [[frame.fx, 0.0, frame.cx], [0.0, frame.fy, frame.cy], [0.0, 0.0, 1.0]]
    )


def plane_homography(source: CameraFrame, plane: FocalPlane, output: CameraFrame) -> np.ndarray:
    """Pixel-to-pixel homography from ``source`` to ``output`` induced by the plane."""
    n = plane.normal
    d = plane.offset
    c_o, c_f = source.position, output.position
    r_o, r_f = source.orientation, output.orientation
    core = np.outer(c_o - c_f, n) + (d - float(n @ c_o)) * np.eye(3)
    k_o = _intrinsic_matrix(source)
    k_f = _intrinsic_matrix(output)
    return k_f @ r_f @ core @ r_o.T @ np.linalg.inv(k_o)


def project_to_focal_plane(
    frame: CameraFrame, plane: FocalPlane, output_grid: CameraFrame
) -> Projection:
    """Resample ``frame.image`` into the output camera's grid via the plane.

    Each output pixel's viewing ray is intersected with the plane and the hit
    point reprojected into the source camera; values are sampled bilinearly.
    Output pixels whose rays miss the plane, hit it behind either camera, or
    land outside the source image carry coverage 0 and value 0.
    """
    if frame.image is None:
        raise ValueError("frame to project carries no image")
    h_mat = plane_homography(frame, plane, output_grid)
    if abs(np.linalg.det(h_mat)) <= DET_FLOOR:
        raise DegenerateHomography(
            "focal plane passes through a camera center; projection is rank-deficient"
        )

    oh, ow = output_grid.height, output_grid.width
    us, vs = np.meshgrid(np.arange(ow, dtype=np.float64), np.arange(oh, dtype=np.float64))
    # viewing rays in world coordinates, unit z in the output camera frame
    dirs_cam = np.stack(
        [(us - output_grid.cx) / output_grid.fx, (vs - output_grid.cy) / output_grid.fy,
         np.ones_like(us)],
        axis=-1,
    )
    dirs = dirs_cam @ output_grid.orientation  # == R_f.T applied to each row vector
    denom = dirs @ plane.normal
    numer = plane.offset - float(plane.normal @ output_grid.position)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(np.abs(denom) > 1e-15, numer / denom, np.inf)
    valid = np.isfinite(s) & (s > 0)

    hits = output_grid.position[None, None, :] + s[..., None] * dirs
    cam = (hits - frame.position[None, None, :]) @ frame.orientation.T
    z = cam[..., 2]
    valid &= z > 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        u_src = frame.fx * cam[..., 0] / z + frame.cx
        v_src = frame.fy * cam[..., 1] / z + frame.cy
    sw, sh = frame.image.width, frame.image.height
    valid &= (
        (u_src >= -EDGE_TOLERANCE) & (u_src <= sw - 1 + EDGE_TOLERANCE)
        & (v_src >= -EDGE_TOLERANCE) & (v_src <= sh - 1 + EDGE_TOLERANCE)
    )

    u_c = np.clip(np.where(valid, u_src, 0.0), 0.0, sw - 1.0)
    v_c = np.clip(np.where(valid, v_src, 0.0), 0.0, sh - 1.0)
    u0 = np.floor(u_c).astype(np.intp)
    v0 = np.floor(v_c).astype(np.intp)
    u1 = np.minimum(u0 + 1, sw - 1)
    v1 = np.minimum(v0 + 1, sh - 1)
    fu = u_c - u0
    fv = v_c - v0

    src = frame.image.data
    out = np.zeros((frame.image.planes, oh, ow))
    for p in range(frame.image.planes):
        sp = src[p]
        top = sp[v0, u0] * (1.0 - fu) + sp[v0, u1] * fu
        bot = sp[v1, u0] * (1.0 - fu) + sp[v1, u1] * fu
        out[p] = np.where(valid, top * (1.0 - fv) + bot * fv, 0.0)
    return Projection(PlanarImage(out), valid.astype(np.float64))


def integrate(
    frames: Sequence[CameraFrame],
    plane: FocalPlane,
    output_grid: CameraFrame | None = None,
    gain: float = 1.0,
) -> PlanarImage:
    """Coverage-weighted per-pixel mean of all frames projected onto the plane.

    Pixels no frame covers are 0.  ``gain`` is an optional display gain
    applied after averaging; the default leaves values in the input range.
    """
    if len(frames) == 0:
        raise EmptyStack("integration needs at least one frame")
    planes = {f.image.planes for f in frames if f.image is not None}
    if len(planes) != 1:
        raise ShapeMismatch(f"frames disagree on plane count: {sorted(planes)}")
    if output_grid is None:
        output_grid = centroid_grid(frames)
    acc = np.zeros((planes.pop(), output_grid.height, output_grid.width))
    cov = np.zeros((output_grid.height, output_grid.width))
    for frame in frames:
        proj = project_to_focal_plane(frame, plane, output_grid)
        acc += proj.image.data * proj.coverage[None, :, :]
        cov += proj.coverage
    with np.errstate(divide="ignore", invalid="ignore"):
        mean = np.where(cov[None, :, :] > 0, acc / np.maximum(cov[None, :, :], 1.0), 0.0)
    return PlanarImage(mean * gain)


def centroid_grid(frames: Sequence[CameraFrame]) -> CameraFrame:
    """Default output camera: centroid position, chordal-mean orientation,
    averaged intrinsics, pixel grid of the first frame."""
    if len(frames) == 0:
        raise EmptyStack("cannot build a centroid grid from an empty stack")
    pos = np.mean([f.position for f in frames], axis=0)
    m = np.mean([f.orientation for f in frames], axis=0)
    u, _, vt = np.linalg.svd(m)
    rot = u @ np.diag([1.0, 1.0, float(np.sign(np.linalg.det(u @ vt)))]) @ vt
    return CameraFrame(
        position=pos,
        orientation=rot,
        fx=float(np.mean([f.fx for f in frames])),
        fy=float(np.mean([f.fy for f in frames])),
        cx=float(np.mean([f.cx for f in frames])),
        cy=float(np.mean([f.cy for f in frames])),
        width=frames[0].width,
        height=frames[0].height,
    )


def _half_max_width(profile: np.ndarray, peak_index: int, half_level: float) -> float:
    """Interpolated distance between the half-level crossings around the peak."""
    left = 0.0 - peak_index  # fallback: extent runs to the array edge
    for i in range(peak_index, 0, -1):
        if profile[i - 1] < half_level <= profile[i]:
            t = (profile[i] - half_level) / (profile[i] - profile[i - 1])
            left = -(peak_index - i + t)
            break
    right = len(profile) - 1 - peak_index
    for i in range(peak_index, len(profile) - 1):
        if profile[i + 1] < half_level <= profile[i]:
            t = (profile[i] - half_level) / (profile[i] - profile[i + 1])
            right = i - peak_index + t
            break
    return right - left


def measure_point_spread(
    integral: PlanarImage,
    target_location: tuple[float, float],
    search_radius: int = 12,
) -> float:
    """Full width at half maximum, in pixels, of the blob near ``target_location``.

    ``target_location`` is (x, y) in pixel coordinates.  The blob peak is
    located within ``search_radius`` of the given point, the background level
    is the image median, and the width is measured along the image row and
    column through the peak, returning the wider of the two.
    Raises NoBlobFound when the peak fails a 2x contrast bound.
    """
    gray = to_grayscale(integral).plane(0)
    h, w = gray.shape
    x, y = target_location
    x0 = max(0, int(round(x)) - search_radius)
    x1 = min(w, int(round(x)) + search_radius + 1)
    y0 = max(0, int(round(y)) - search_radius)
    y1 = min(h, int(round(y)) + search_radius + 1)
    window = gray[y0:y1, x0:x1]
    if window.size == 0:
        raise NoBlobFound("target location lies outside the image")
    flat = int(np.argmax(window))
    py, px = np.unravel_index(flat, window.shape)
    py += y0
    px += x0
    peak = float(gray[py, px])
    background = float(np.median(gray))
    if peak <= 0 or peak < CONTRAST_FLOOR * background + 1e-12:
        raise NoBlobFound(
            f"peak {peak:.4g} fails the {CONTRAST_FLOOR}x contrast bound over background "
            f"{background:.4g}"
        )
    half = background + 0.5 * (peak - background)
    width_x = _half_max_width(gray[py, :], px, half)
    width_y = _half_max_width(gray[:, px], py, half)
    return max(width_x, width_y)


def load_focal_plane(path: str) -> FocalPlane:
    """Read a focal plane from JSON: {"point": [x,y,z], "normal": [x,y,z]}."""
    with open(path, "r", encoding="utf-8") as fh:
        rec = json.load(fh)
    return FocalPlane(np.asarray(rec["point"], dtype=np.float64),
                      np.asarray(rec["normal"], dtype=np.float64))


def load_pose_file(path: str) -> list[CameraFrame]:
    """Read a camera stack from JSON: a list of records

        {"image": path, "position": [x,y,z], "rotation": [9 row-major],
         "fx": .., "fy": .., "cx": .., "cy": ..}

    Image paths are resolved relative to the pose file's directory.
    """
    with open(path, "r", encoding="utf-8") as fh:
        records = json.load(fh)
    if not isinstance(records, list) or len(records) == 0:
        raise EmptyStack(f"{path}: pose file holds no camera records")
    base = os.path.dirname(os.path.abspath(path))
    frames = []
    for rec in records:
        img_path = rec["image"]
        if not os.path.isabs(img_path):
            img_path = os.path.join(base, img_path)
        frames.append(
            CameraFrame(
                position=np.asarray(rec["position"], dtype=np.float64),
                orientation=np.asarray(rec["rotation"], dtype=np.float64).reshape(3, 3),
                fx=float(rec["fx"]),
                fy=float(rec["fy"]),
                cx=float(rec["cx"]),
                cy=float(rec["cy"]),
                image=read_image(img_path),
            )
        )
    return frames


def nadir_orientation() -> np.ndarray:
    """World->camera rotation for a straight-down view with +z world up:
    camera x follows world x, camera y follows world -y, camera z looks -z."""
    return np.array([[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]])


def ground_sample_distance(frame: CameraFrame, plane: FocalPlane) -> float:
    """Meters per pixel on the plane along the camera's x axis (nadir setups)."""
    dist = abs(float(plane.normal @ (frame.position - plane.point)))
    return dist / frame.fx


__all__ = [
    "CameraFrame",
    "FocalPlane",
    "SyntheticApertureSpec",
    "Projection",
    "plane_homography",
    "project_to_focal_plane",
    "integrate",
    "centroid_grid",
    "measure_point_spread",
    "load_focal_plane",
    "load_pose_file",
    "nadir_orientation",
    "ground_sample_distance",
]
