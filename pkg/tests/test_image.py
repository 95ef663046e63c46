import numpy as np
import pytest

from aerofuse.errors import UnknownColormap, UnsupportedPlaneCount
from aerofuse.image import (
    LUMA_WEIGHTS,
    PlanarImage,
    color_code,
    replicate_planes,
    resize_bilinear,
    to_grayscale,
)


class TestPlanarImage:
    def test_accepts_planar_array(self, rng):
        img = PlanarImage(rng.random((3, 8, 10)))
        assert (img.planes, img.height, img.width) == (3, 8, 10)

    def test_accepts_2d_and_interleaved_arrays(self, rng):
        assert PlanarImage(rng.random((8, 10))).planes == 1
        hwc = rng.random((8, 10, 3))
        img = PlanarImage.from_interleaved(hwc)
        assert (img.planes, img.height, img.width) == (3, 8, 10)
        assert np.array_equal(img.to_interleaved(), hwc)

    def test_data_is_float64_contiguous_readonly(self, rng):
        img = PlanarImage(rng.random((1, 4, 4)).astype(np.float32))
        assert img.data.dtype == np.float64
        assert img.data.flags.c_contiguous
        with pytest.raises(ValueError):
            img.data[0, 0, 0] = 1.0

    def test_rejects_bad_shapes(self):
        with pytest.raises(ValueError):
            PlanarImage(np.zeros(5))
        with pytest.raises(ValueError):
            PlanarImage(np.zeros((1, 2, 3, 4)))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            PlanarImage(np.array([[[np.nan]]]))
        with pytest.raises(ValueError):
            PlanarImage(np.array([[[np.inf]]]))


class TestGrayscale:
    def test_luma_weights_are_rec601(self):
        assert np.allclose(LUMA_WEIGHTS, (0.299, 0.587, 0.114))
        assert abs(sum(LUMA_WEIGHTS) - 1.0) < 1e-12

    def test_known_mix(self):
        arr = np.zeros((3, 1, 1))
        arr[0], arr[1], arr[2] = 0.5, 0.25, 1.0
        gray = to_grayscale(PlanarImage(arr))
        expected = 0.299 * 0.5 + 0.587 * 0.25 + 0.114 * 1.0
        assert abs(gray.data[0, 0, 0] - expected) < 1e-12

    def test_single_plane_passthrough(self, rng):
        img = PlanarImage(rng.random((1, 5, 5)))
        assert np.array_equal(to_grayscale(img).data, img.data)

    def test_constant_image_maps_to_same_constant(self):
        img = PlanarImage(np.full((3, 4, 4), 0.3))
        assert np.allclose(to_grayscale(img).data, 0.3)

    def test_rejects_other_plane_counts(self, rng):
        with pytest.raises(UnsupportedPlaneCount):
            to_grayscale(PlanarImage(rng.random((2, 3, 3))))


class TestReplicatePlanes:
    def test_replicates_single_plane(self, rng):
        img = PlanarImage(rng.random((1, 6, 7)))
        rep = replicate_planes(img)
        assert rep.planes == 3
        for p in range(3):
            assert np.array_equal(rep.data[p], img.data[0])

    def test_rejects_multi_plane(self, rng):
        with pytest.raises(UnsupportedPlaneCount):
            replicate_planes(PlanarImage(rng.random((3, 4, 4))))


class TestColorCode:
    def test_produces_three_planes_in_range(self, rng):
        out = color_code(PlanarImage(rng.random((1, 16, 16))))
        assert out.planes == 3
        assert out.data.min() >= 0.0 and out.data.max() <= 1.0

    def test_monotone_luminance(self):
        ramp = PlanarImage(np.linspace(0, 1, 64).reshape(1, 1, 64))
        lum = to_grayscale(color_code(ramp)).data[0, 0]
        assert np.all(np.diff(lum) > -1e-9)
        assert lum[-1] - lum[0] > 0.3

    def test_endpoints_spread(self):
        two = color_code(PlanarImage(np.array([[[0.0, 1.0]]])))
        assert np.linalg.norm(two.data[:, 0, 0] - two.data[:, 0, 1]) > 0.5

    def test_requires_single_plane(self, rng):
        with pytest.raises(UnsupportedPlaneCount):
            color_code(PlanarImage(rng.random((3, 4, 4))))

    def test_unknown_colormap(self, rng):
        with pytest.raises(UnknownColormap):
            color_code(PlanarImage(rng.random((1, 4, 4))), colormap="nope")


class TestResizeBilinear:
    def test_identity_when_size_matches(self, rng):
        arr = rng.random((5, 7))
        assert np.allclose(resize_bilinear(arr, 5, 7), arr, atol=1e-12)

    def test_exact_on_linear_ramp(self):
        # bilinear interpolation reproduces affine functions exactly; the
        # half-pixel-centre source coordinates are clamped at the borders
        ys, xs = np.mgrid[0:8, 0:12]
        arr = 0.3 * xs + 0.2 * ys + 0.1
        big = resize_bilinear(arr, 31, 45)
        ys2 = np.clip((np.arange(31) + 0.5) * 8 / 31 - 0.5, 0.0, 7.0)[:, None]
        xs2 = np.clip((np.arange(45) + 0.5) * 12 / 45 - 0.5, 0.0, 11.0)[None, :]
        assert np.allclose(big, 0.3 * xs2 + 0.2 * ys2 + 0.1, atol=1e-10)

    def test_constant_preserved(self):
        out = resize_bilinear(np.full((4, 4), 0.6), 9, 13)
        assert np.allclose(out, 0.6, atol=1e-12)

    def test_range_bounded_by_input(self, rng):
        arr = rng.random((6, 6))
        out = resize_bilinear(arr, 17, 23)
        assert out.min() >= arr.min() - 1e-12
        assert out.max() <= arr.max() + 1e-12
