"""Procedural sample data: fusion scenes and layered aerial stacks.

Everything here is deterministic given a seed, so the bundled fixtures under
``data/scenes`` can be regenerated bit-for-bit and tests can synthesise
arbitrarily many controlled inputs.  A scene is one basis RGB image plus a
thermal and an RGB integral-style channel, with annotated target and
background boxes.  The layered renderer produces pose-annotated single frames
of a two-layer world (textured ground plus floating sprites) for the
synthetic-aperture pipeline.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.ndimage import gaussian_filter

from .aos import CameraFrame, nadir_orientation
from .image import PlanarImage
from .io import read_image, write_image

Box = tuple[int, int, int, int]  # x0, y0, x1, y1 (exclusive upper bounds)

DEFAULT_SCENE_SEEDS = (11, 23, 47)
SCENE_SIZE = 256


def _sinusoid_field(rng: np.random.Generator, size: int, terms: int,
                    fmin: float, fmax: float) -> np.ndarray:
    """Smooth pseudo-random field in [-1, 1] from a seeded sinusoid mixture."""
    ys, xs = np.mgrid[0:size, 0:size] / size
    acc = np.zeros((size, size))
    amps = rng.uniform(0.4, 1.0, terms)
    for a in amps:
        fx, fy = rng.uniform(fmin, fmax, 2) * (2.0 * np.pi)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        acc += a * np.sin(fx * xs + fy * ys + phase)
    return acc / np.sum(amps)


def _soft_disc(size: int, cx: float, cy: float, radius: float, edge: float = 1.5) -> np.ndarray:
    ys, xs = np.mgrid[0:size, 0:size]
    r = np.hypot(xs - cx, ys - cy)
    return np.clip((radius - r) / edge + 0.5, 0.0, 1.0)


@dataclass(frozen=True)
class SampleScene:
    """One fusion test scene with ground-truth annotation boxes."""

    basis: PlanarImage  # 3-plane single RGB
    thermal: PlanarImage  # 1-plane thermal integral
    irgb: PlanarImage  # 3-plane RGB integral
    target_box: Box
    background_box: Box


def make_scene(seed: int, size: int = SCENE_SIZE) -> SampleScene:
    """Synthesise one scene: textured ground, an occluded hot target that the
    integral channels reveal, and a quiet background region for ablation
    measurements."""
    rng = np.random.default_rng(seed)

    ground = 0.58 + 0.33 * _sinusoid_field(rng, size, 6, 1.0, 4.0)
    fine = 0.1 * _sinusoid_field(rng, size, 8, 10.0, 24.0)
    canopy = 0.12 * _sinusoid_field(rng, size, 6, 5.0, 12.0)

    tcx, tcy = 0.62 * size, 0.38 * size
    spread = 0.035 * size
    # Small sharp discs on a soft pedestal: features narrower than the detail
    # filter's kernel scale keep the low-pass response flat, so the detail
    # layer is strongly positive-skewed and the normalized mask floor stays
    # low, while the pedestal keeps inter-disc gaps free of undershoot.
    blob_offsets = rng.uniform(-0.45, 0.45, (7, 2)) * spread
    hot = np.zeros((size, size))
    for dx, dy in blob_offsets:
        hot = np.maximum(
            hot, _soft_disc(size, tcx + dx * 1.6, tcy + dy * 1.6, 0.22 * spread, edge=1.0))
    pedestal = _soft_disc(size, tcx, tcy, 0.95 * spread, edge=3.0)
    margin = int(round(0.025 * size))
    target_box = (int(tcx) - margin, int(tcy) - margin, int(tcx) + margin, int(tcy) + margin)
    bcx, bcy = int(0.22 * size), int(0.74 * size)
    background_box = (bcx - margin, bcy - margin, bcx + margin, bcy + margin)

    tint = np.array([1.05, 1.0, 0.88]) + rng.uniform(-0.05, 0.05, 3)
    basis = np.clip(tint[:, None, None] * (ground + fine + 0.3 * canopy)[None, :, :], 0.0, 1.0)

    # Dark backgrounds on the integral channels: low-amplitude texture keeps
    # the CNN branch responsive there without carrying detail energy, so the
    # fused composite stays close to the basis away from the targets.
    ambient = 0.035 + 0.03 * gaussian_filter(_sinusoid_field(rng, size, 5, 2.0, 6.0), 2.0)
    streaks = 0.012 * _sinusoid_field(rng, size, 4, 14.0, 30.0)
    hot_texture = 0.04 * _sinusoid_field(rng, size, 6, 16.0, 32.0)
    thermal = np.clip(
        ambient + streaks + 0.3 * pedestal + hot * (0.85 + hot_texture), 0.0, 1.0)

    person_offsets = rng.uniform(-0.45, 0.45, (7, 2)) * spread
    person = np.zeros((size, size))
    for dx, dy in person_offsets:
        person = np.maximum(
            person, _soft_disc(size, tcx + dx * 1.6, tcy + dy * 1.6, 0.22 * spread, edge=1.0))
    irgb_base = gaussian_filter(ground + 0.4 * canopy, 2.4)
    irgb_tint = np.array([0.95, 1.0, 0.9]) + rng.uniform(-0.04, 0.04, 3)
    irgb = np.clip(
        irgb_tint[:, None, None] * irgb_base[None, :, :] * 0.07
        + (0.3 * pedestal + person * 0.75)[None, :, :]
        * np.array([0.95, 0.8, 0.6])[:, None, None],
        0.0,
        1.0,
    )

    return SampleScene(
        basis=PlanarImage(basis),
        thermal=PlanarImage(thermal),
        irgb=PlanarImage(irgb),
        target_box=target_box,
        background_box=background_box,
    )


def write_scene(scene: SampleScene, directory: str) -> None:
    """Persist a scene as srgb.png (8-bit RGB), it.tif (16-bit gray),
    irgb.png (8-bit RGB) and scene.json (annotation boxes)."""
    os.makedirs(directory, exist_ok=True)
    write_image(scene.basis, os.path.join(directory, "srgb.png"))
    write_image(scene.thermal, os.path.join(directory, "it.tif"))
    write_image(scene.irgb, os.path.join(directory, "irgb.png"))
    record = {
        "target_box": list(scene.target_box),
        "background_box": list(scene.background_box),
    }
    with open(os.path.join(directory, "scene.json"), "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_scene(directory: str) -> SampleScene:
    """Read back a scene written by write_scene (values are post-quantization)."""
    with open(os.path.join(directory, "scene.json"), "r", encoding="utf-8") as fh:
        record = json.load(fh)
    return SampleScene(
        basis=read_image(os.path.join(directory, "srgb.png")),
        thermal=read_image(os.path.join(directory, "it.tif")),
        irgb=read_image(os.path.join(directory, "irgb.png")),
        target_box=tuple(record["target_box"]),
        background_box=tuple(record["background_box"]),
    )


def make_bundled_scenes(root: str, seeds: Sequence[int] = DEFAULT_SCENE_SEEDS) -> list[str]:
    """Write the fixture scenes scene01..N under ``root``; returns the paths."""
    paths = []
    for i, seed in enumerate(seeds, start=1):
        directory = os.path.join(root, f"scene{i:02d}")
        write_scene(make_scene(seed), directory)
        paths.append(directory)
    return paths


@dataclass(frozen=True)
class Sprite:
    """Soft opaque dot floating at height z, used as target or occluder."""

    x: float
    y: float
    z: float
    sigma: float  # gaussian footprint, meters
    intensity: float


def sinusoid_texture(seed: int, base: float = 0.45, amplitude: float = 0.2,
                     terms: int = 6, frequency: float = 1.2) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """Continuous world-coordinate ground texture, resampleable at any point."""
    rng = np.random.default_rng(seed)
    amps = rng.uniform(0.4, 1.0, terms)
    freqs = rng.uniform(0.3 * frequency, frequency, (terms, 2)) * (2.0 * np.pi)
    phases = rng.uniform(0.0, 2.0 * np.pi, terms)

    def texture(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        acc = np.zeros_like(xs)
        for a, (fx, fy), p in zip(amps, freqs, phases):
            acc += a * np.sin(fx * xs + fy * ys + p)
        return base + amplitude * acc / np.sum(amps)

    return texture


def render_layered_frame(
    camera: CameraFrame,
    ground: Callable[[np.ndarray, np.ndarray], np.ndarray],
    sprites: Sequence[Sprite] = (),
    ground_z: float = 0.0,
) -> PlanarImage:
    """Render a single-plane view of a layered world through a pinhole camera.

    Each pixel ray samples the ground texture where it crosses z = ground_z,
    then composites the sprites front-to-back by their gaussian falloff.
    """
    h, w = camera.height, camera.width
    us, vs = np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))
    dirs_cam = np.stack(
        [(us - camera.cx) / camera.fx, (vs - camera.cy) / camera.fy, np.ones_like(us)], axis=-1
    )
    dirs = dirs_cam @ camera.orientation
    cz = camera.position[2]
    dz = dirs[..., 2]

    def layer_hit(z: float) -> tuple[np.ndarray, np.ndarray]:
        s = (z - cz) / dz
        xs = camera.position[0] + s * dirs[..., 0]
        ys = camera.position[1] + s * dirs[..., 1]
        return xs, ys

    gx, gy = layer_hit(ground_z)
    value = np.asarray(ground(gx, gy), dtype=np.float64)
    # paint nearer layers over farther ones; the camera sits above the scene
    for sprite in sorted(sprites, key=lambda sp: sp.z):
        sx, sy = layer_hit(sprite.z)
        r2 = (sx - sprite.x) ** 2 + (sy - sprite.y) ** 2
        alpha = np.exp(-r2 / (2.0 * sprite.sigma**2))
        value = (1.0 - alpha) * value + alpha * sprite.intensity
    return PlanarImage(np.clip(value, 0.0, 1.0))


def aperture_cameras(
    count: int,
    aperture: float,
    altitude: float,
    size: int = 128,
    fx: float | None = None,
    axis: str = "x",
) -> list[CameraFrame]:
    """Nadir cameras spread evenly along one axis of a 1D synthetic aperture."""
    if fx is None:
        fx = 2.0 * size  # narrow field of view keeps the scene footprint small
    offsets = np.linspace(-aperture / 2.0, aperture / 2.0, count) if count > 1 else np.zeros(1)
    frames = []
    for off in offsets:
        x, y = (off, 0.0) if axis == "x" else (0.0, off)
        frames.append(
            CameraFrame(
                position=np.array([x, y, altitude]),
                orientation=nadir_orientation(),
                fx=fx,
                fy=fx,
                cx=(size - 1) / 2.0,
                cy=(size - 1) / 2.0,
                width=size,
                height=size,
            )
        )
    return frames


def render_aperture_stack(
    cameras: Sequence[CameraFrame],
    ground: Callable[[np.ndarray, np.ndarray], np.ndarray],
    sprites: Sequence[Sprite] = (),
) -> list[CameraFrame]:
    """Attach a rendered image to every camera of an aperture sweep."""
    return [
        CameraFrame(
            position=cam.position,
            orientation=cam.orientation,
            fx=cam.fx,
            fy=cam.fy,
            cx=cam.cx,
            cy=cam.cy,
            image=render_layered_frame(cam, ground, sprites),
        )
        for cam in cameras
    ]


def write_pose_stack(frames: Sequence[CameraFrame], directory: str) -> str:
    """Write frames as frame000.png.. plus poses.json; returns the pose path."""
    os.makedirs(directory, exist_ok=True)
    records = []
    for i, frame in enumerate(frames):
        name = f"frame{i:03d}.png"
        write_image(frame.image, os.path.join(directory, name))
        records.append(
            {
                "image": name,
                "position": [float(v) for v in frame.position],
                "rotation": [float(v) for v in frame.orientation.ravel()],
                "fx": frame.fx,
                "fy": frame.fy,
                "cx": frame.cx,
                "cy": frame.cy,
            }
        )
    pose_path = os.path.join(directory, "poses.json")
    with open(pose_path, "w", encoding="utf-8") as fh:
        json.dump(records, fh, indent=2)
        fh.write("\n")
    return pose_path
