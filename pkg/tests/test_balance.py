"""Mirror symmetry, balance, center-of-mass and homogeneity contracts."""

import math

import numpy as np
import pytest

from imgprops import balance
from imgprops.errors import TooSmallError
from imgprops.raster import ColorSpace, RasterImage


def gray_u8(arr):
    return RasterImage(np.asarray(arr, dtype=np.uint8), ColorSpace.GRAY8)


def rgb_u8(arr):
    return RasterImage(np.asarray(arr, dtype=np.uint8), ColorSpace.RGB8)


class TestMirrorSymmetry:
    def test_constant_is_100(self):
        assert balance.mirror_symmetry(gray_u8(np.full((6, 6), 42))) == pytest.approx(100.0)

    def test_mirrored_image_vertical_term(self):
        rng = np.random.default_rng(101)
        half = rng.integers(0, 256, (8, 4)).astype(np.uint8)
        arr = np.concatenate([half, half[:, ::-1]], axis=1)
        gray = arr  # vertical-axis reflection is exact
        score = balance._axis_score(gray, gray[:, ::-1])
        assert score == pytest.approx(100.0, abs=1e-12)

    def test_left_black_right_white_nonsquare(self):
        arr = np.zeros((4, 6), dtype=np.uint8)
        arr[:, 3:] = 255
        # vertical term 0, horizontal term 100, non-square: mean = 50
        assert balance.mirror_symmetry(rgb_u8(arr[:, :, None].repeat(3, axis=2))) == pytest.approx(50.0)

    def test_square_uses_four_axes(self):
        arr = np.zeros((4, 4), dtype=np.uint8)
        arr[0, 3] = 255  # breaks all four axes differently
        square = balance.mirror_symmetry(gray_u8(arr))
        gray = arr
        terms = [
            balance._axis_score(gray, gray[:, ::-1]),
            balance._axis_score(gray, gray[::-1, :]),
            balance._axis_score(gray, gray.T),
            balance._axis_score(gray, gray[::-1, ::-1].T),
        ]
        assert square == pytest.approx(np.mean(terms))

    def test_rotation_180_invariant(self):
        rng = np.random.default_rng(102)
        arr = rng.integers(0, 256, (10, 14)).astype(np.uint8)
        a = balance.mirror_symmetry(gray_u8(arr))
        b = balance.mirror_symmetry(gray_u8(arr[::-1, ::-1].copy()))
        assert a == pytest.approx(b, abs=1e-9)


class TestBalanceScore:
    def test_constant_zero_everywhere(self):
        comps = balance.balance_components(gray_u8(np.full((8, 8), 17)))
        assert comps == pytest.approx([0.0] * 8, abs=1e-12)

    def test_all_mass_left(self):
        arr = np.full((8, 8), 255, dtype=np.uint8)
        arr[:, :4] = 0  # dark (heavy) left half
        comps = balance.balance_components(gray_u8(arr))
        assert comps[0] == pytest.approx(100.0)

    def test_matches_region_sum_oracle(self):
        rng = np.random.default_rng(103)
        arr = rng.integers(0, 256, (12, 16)).astype(np.uint8)
        comps = balance.balance_components(gray_u8(arr))
        mass = (255.0 - arr.astype(np.float64)) / 255.0
        h, w = mass.shape

        def score(a, b):
            return 0.0 if a + b <= 0 else 100.0 * abs(a - b) / (a + b)

        # oracle via explicit pixel loops
        left = sum(mass[i][j] for i in range(h) for j in range(w // 2))
        right = sum(mass[i][j] for i in range(h) for j in range(w - w // 2, w))
        assert comps[0] == pytest.approx(score(left, right), abs=1e-9)
        top = sum(mass[i][j] for i in range(h // 2) for j in range(w))
        bottom = sum(mass[i][j] for i in range(h - h // 2, h) for j in range(w))
        assert comps[1] == pytest.approx(score(top, bottom), abs=1e-9)
        above = below = 0.0
        for i in range(h):
            for j in range(w):
                lhs, rhs = (i + 0.5) / h, (j + 0.5) / w
                if lhs < rhs:
                    above += mass[i, j]
                elif lhs > rhs:
                    below += mass[i, j]
        assert comps[2] == pytest.approx(score(above, below), abs=1e-9)
        num = den = 0.0
        for j in range(w // 2):
            a = sum(mass[i][j] for i in range(h))
            b = sum(mass[i][w - 1 - j] for i in range(h))
            num += abs(a - b)
            den += a + b
        assert comps[6] == pytest.approx(0.0 if den == 0 else 100 * num / den, abs=1e-9)

    def test_rotation_180_invariant(self):
        rng = np.random.default_rng(104)
        arr = rng.integers(0, 256, (9, 13)).astype(np.uint8)
        a = balance.balance_score(gray_u8(arr))
        b = balance.balance_score(gray_u8(arr[::-1, ::-1].copy()))
        assert a == pytest.approx(b, abs=1e-9)

    def test_transpose_swaps_axis_roles(self):
        rng = np.random.default_rng(105)
        arr = rng.integers(0, 256, (11, 7)).astype(np.uint8)
        a = sorted(balance.balance_components(gray_u8(arr)))
        b = sorted(balance.balance_components(gray_u8(arr.T.copy())))
        assert a == pytest.approx(b, abs=1e-9)

    def test_range(self):
        rng = np.random.default_rng(106)
        for _ in range(10):
            comps = balance.balance_components(gray_u8(rng.integers(0, 256, (10, 10))))
            assert all(0.0 <= c <= 100.0 for c in comps)


class TestDcm:
    def test_constant_nonwhite_centered(self):
        assert balance.dcm(gray_u8(np.full((7, 9), 80))) == pytest.approx(0.0, abs=1e-9)

    def test_single_corner_pixel_is_100(self):
        arr = np.full((8, 8), 255, dtype=np.uint8)
        arr[0, 0] = 0
        assert balance.dcm(gray_u8(arr)) == pytest.approx(100.0, abs=1e-9)

    def test_all_white_nan(self):
        assert math.isnan(balance.dcm(gray_u8(np.full((5, 5), 255))))

    def test_matches_com_oracle(self):
        rng = np.random.default_rng(107)
        arr = rng.integers(0, 256, (10, 12)).astype(np.uint8)
        mass = (255.0 - arr.astype(np.float64)) / 255.0
        total = mass.sum()
        cx = sum(mass[i][j] * j for i in range(10) for j in range(12)) / total
        cy = sum(mass[i][j] * i for i in range(10) for j in range(12)) / total
        gx, gy = (12 - 1) / 2, (10 - 1) / 2
        expect = 100 * math.hypot(cx - gx, cy - gy) / math.hypot(gx, gy)
        assert balance.dcm(gray_u8(arr)) == pytest.approx(expect, abs=1e-9)

    def test_mass_scaling_invariant(self):
        # scale all masses by a constant: COM unchanged (gray variant)
        rng = np.random.default_rng(108)
        arr = rng.integers(100, 200, (8, 8)).astype(np.uint8)
        darker = 255 - ((255 - arr) * 0.5).astype(np.uint8)  # half the mass
        a = balance.dcm(gray_u8(arr))
        b = balance.dcm(gray_u8(darker))
        assert a == pytest.approx(b, abs=0.5)  # u8 rounding keeps this loose

    def test_rgb_input(self):
        rng = np.random.default_rng(109)
        assert 0 <= balance.dcm(rgb_u8(rng.integers(0, 255, (8, 8, 3)))) <= 100


class TestOtsu:
    def test_bimodal_split(self):
        values = np.concatenate([np.full(50, 40), np.full(50, 200)]).astype(np.uint8)
        t = balance.otsu_threshold(values.reshape(10, 10))
        assert 40 <= t < 200

    def test_matches_exhaustive_search(self):
        rng = np.random.default_rng(110)
        gray = rng.integers(0, 256, (20, 20)).astype(np.uint8)
        flat = gray.ravel().astype(float)
        best_t, best_v = 0, -1.0
        for t in range(256):
            c0 = flat[flat <= t]
            c1 = flat[flat > t]
            if len(c0) == 0 or len(c1) == 0:
                continue
            v = len(c0) * len(c1) * (c0.mean() - c1.mean()) ** 2
            if v > best_v + 1e-9:
                best_v, best_t = v, t
        assert balance.otsu_threshold(gray) == best_t


class TestHomogeneity:
    def test_equal_cells_is_100(self):
        # one black pixel in the same place of every 10x10 cell
        arr = np.full((100, 100), 255, dtype=np.uint8)
        arr[5::10, 5::10] = 0
        assert balance.homogeneity(gray_u8(arr)) == pytest.approx(100.0, abs=1e-9)

    def test_single_cell_is_0(self):
        arr = np.full((100, 100), 255, dtype=np.uint8)
        arr[2:8, 2:8] = 0  # black only inside the first cell
        assert balance.homogeneity(gray_u8(arr)) == pytest.approx(0.0, abs=1e-9)

    def test_matches_step_oracle(self):
        rng = np.random.default_rng(111)
        arr = (rng.integers(0, 2, (40, 40)) * 255).astype(np.uint8)
        got = balance.homogeneity(gray_u8(arr))
        t = balance.otsu_threshold(arr)
        black = arr <= t
        cells = np.zeros((10, 10))
        for i in range(10):
            for j in range(10):
                cells[i, j] = black[i * 4 : (i + 1) * 4, j * 4 : (j + 1) * 4].sum()
        vals = []
        for sums in (cells.sum(axis=1), cells.sum(axis=0)):
            p = sums / sums.sum()
            entropy = -sum(x * math.log2(x) for x in p if x > 0)
            vals.append(entropy / math.log2(10))
        assert got == pytest.approx(100 * np.mean(vals), abs=1e-9)

    def test_constant_nan(self):
        assert math.isnan(balance.homogeneity(gray_u8(np.full((20, 20), 123))))

    def test_too_small(self):
        with pytest.raises(TooSmallError):
            balance.homogeneity(gray_u8(np.zeros((5, 30), dtype=np.uint8)))

    def test_rotation_180_invariant(self):
        rng = np.random.default_rng(112)
        arr = rng.integers(0, 256, (30, 30)).astype(np.uint8)
        a = balance.homogeneity(gray_u8(arr))
        b = balance.homogeneity(gray_u8(arr[::-1, ::-1].copy()))
        assert a == pytest.approx(b, abs=1e-9)
