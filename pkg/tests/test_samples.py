"""Procedural sample data: scene synthesis, persistence, layered rendering."""

import numpy as np
import pytest

from aerofuse.image import PlanarImage
from aerofuse.io import quantize
from aerofuse.samples import (
    DEFAULT_SCENE_SEEDS,
    SCENE_SIZE,
    Sprite,
    aperture_cameras,
    load_scene,
    make_bundled_scenes,
    make_scene,
    render_layered_frame,
    sinusoid_texture,
    write_scene,
)


def _box_in_bounds(box, size):
    x0, y0, x1, y1 = box
    return 0 <= x0 < x1 <= size and 0 <= y0 < y1 <= size


class TestMakeScene:
    def test_deterministic_per_seed(self):
        a = make_scene(11, size=96)
        b = make_scene(11, size=96)
        assert np.array_equal(a.basis.data, b.basis.data)
        assert np.array_equal(a.thermal.data, b.thermal.data)
        assert np.array_equal(a.irgb.data, b.irgb.data)
        assert a.target_box == b.target_box

    def test_seeds_differ(self):
        a = make_scene(11, size=96)
        b = make_scene(23, size=96)
        assert not np.array_equal(a.basis.data, b.basis.data)

    def test_channel_shapes_and_ranges(self):
        scene = make_scene(11, size=96)
        assert scene.basis.planes == 3
        assert scene.thermal.planes == 1
        assert scene.irgb.planes == 3
        for img in (scene.basis, scene.thermal, scene.irgb):
            assert (img.height, img.width) == (96, 96)
            assert float(img.data.min()) >= 0.0
            assert float(img.data.max()) <= 1.0

    def test_annotation_boxes_in_bounds_and_disjoint(self):
        for seed in DEFAULT_SCENE_SEEDS:
            scene = make_scene(seed)
            assert _box_in_bounds(scene.target_box, SCENE_SIZE)
            assert _box_in_bounds(scene.background_box, SCENE_SIZE)
            tx0, ty0, tx1, ty1 = scene.target_box
            bx0, by0, bx1, by1 = scene.background_box
            assert tx1 <= bx0 or bx1 <= tx0 or ty1 <= by0 or by1 <= ty0

    def test_target_hot_in_integral_channels_only(self):
        # the target region must stand out against the scene in the integral
        # channels while the basis shows nothing special there
        scene = make_scene(11)
        x0, y0, x1, y1 = scene.target_box
        t = scene.thermal.plane(0)
        assert float(t[y0:y1, x0:x1].max()) > 0.7
        bx0, by0, bx1, by1 = scene.background_box
        assert float(t[by0:by1, bx0:bx1].max()) < 0.2
        basis_gray = scene.basis.data.mean(axis=0)
        target_mean = float(basis_gray[y0:y1, x0:x1].mean())
        assert abs(target_mean - float(basis_gray.mean())) < 0.35


class TestScenePersistence:
    def test_write_load_round_trip(self, tmp_path):
        scene = make_scene(11, size=64)
        write_scene(scene, str(tmp_path))
        back = load_scene(str(tmp_path))
        assert back.target_box == scene.target_box
        assert back.background_box == scene.background_box
        # png is 8-bit, tif 16-bit; equality holds post-quantization
        assert np.array_equal(back.basis.data, quantize(scene.basis.data, 255) / 255.0)
        assert np.array_equal(back.irgb.data, quantize(scene.irgb.data, 255) / 255.0)
        assert np.array_equal(
            back.thermal.data, quantize(scene.thermal.data, 65535) / 65535.0)

    def test_bundled_layout(self, tmp_path):
        paths = make_bundled_scenes(str(tmp_path), seeds=(11, 23))
        assert [p.rsplit("/", 1)[-1] for p in paths] == ["scene01", "scene02"]
        for p in paths:
            scene = load_scene(p)
            assert scene.basis.planes == 3


class TestSinusoidTexture:
    def test_deterministic_and_vectorised(self):
        tex = sinusoid_texture(5)
        xs = np.linspace(-3.0, 3.0, 7)
        ys = np.zeros(7)
        assert np.array_equal(tex(xs, ys), sinusoid_texture(5)(xs, ys))
        grid = tex(*np.mgrid[0:4, 0:4].astype(np.float64))
        assert grid.shape == (4, 4)

    def test_range_follows_base_and_amplitude(self):
        tex = sinusoid_texture(5, base=0.5, amplitude=0.1)
        xs, ys = np.mgrid[0:64, 0:64] / 4.0
        values = tex(xs, ys)
        assert float(values.min()) >= 0.4 - 1e-9
        assert float(values.max()) <= 0.6 + 1e-9


class TestLayeredRenderer:
    def test_sprite_on_ground_plane_lands_at_projection(self):
        cams = aperture_cameras(1, 0.0, 32.0, size=64)
        sprite = Sprite(x=1.0, y=0.0, z=0.0, sigma=0.4, intensity=1.0)
        frame = render_layered_frame(cams[0], lambda xs, ys: np.zeros_like(xs), [sprite])
        u = cams[0].cx + cams[0].fx * 1.0 / 32.0
        v = cams[0].cy
        patch = frame.plane(0)[int(v) - 1:int(v) + 2, int(u) - 1:int(u) + 2]
        assert float(patch.max()) > 0.8
        far = frame.plane(0).copy()
        far[int(v) - 6:int(v) + 7, int(u) - 6:int(u) + 7] = 0.0
        assert float(far.max()) < 0.05

    def test_higher_sprite_occludes_lower(self):
        # both sprites project onto the image center; the camera looks down,
        # so the higher-z layer is nearer and must win
        cams = aperture_cameras(1, 0.0, 32.0, size=64)
        low = Sprite(x=0.0, y=0.0, z=0.0, sigma=0.5, intensity=1.0)
        high = Sprite(x=0.0, y=0.0, z=16.0, sigma=0.25, intensity=0.2)
        frame = render_layered_frame(
            cams[0], lambda xs, ys: np.zeros_like(xs), [high, low])
        center = float(frame.plane(0)[31:33, 31:33].mean())
        assert abs(center - 0.2) < 0.05

    def test_output_clamped(self):
        cams = aperture_cameras(1, 0.0, 32.0, size=32)
        frame = render_layered_frame(cams[0], lambda xs, ys: 2.0 * np.ones_like(xs))
        assert float(frame.data.max()) <= 1.0


class TestApertureCameras:
    def test_count_and_span(self):
        cams = aperture_cameras(5, 4.0, 30.0, size=64)
        assert len(cams) == 5
        xs = [c.position[0] for c in cams]
        assert xs[0] == pytest.approx(-2.0)
        assert xs[-1] == pytest.approx(2.0)
        assert np.allclose(np.diff(xs), 1.0)
        for c in cams:
            assert c.position[2] == pytest.approx(30.0)
            assert (c.width, c.height) == (64, 64)
            assert c.fx == pytest.approx(128.0)

    def test_single_camera_centered(self):
        cams = aperture_cameras(1, 4.0, 30.0)
        assert np.allclose(cams[0].position, [0.0, 0.0, 30.0])

    def test_axis_selects_direction(self):
        cams = aperture_cameras(3, 2.0, 30.0, axis="y")
        assert all(c.position[0] == 0.0 for c in cams)
        assert [c.position[1] for c in cams] == pytest.approx([-1.0, 0.0, 1.0])
