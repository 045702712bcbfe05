"""Gabor bank, edge density and edge-orientation entropy contracts."""

import math

import numpy as np
import pytest

from imgprops import edges
from imgprops.raster import ColorSpace, RasterImage


def gray_u8(arr):
    return RasterImage(np.asarray(arr, dtype=np.uint8), ColorSpace.GRAY8)


def naive_pair_histogram(xs, ys, oris, strengths, min_distance=20, fold=True, weighted=True):
    """Double-loop reference for the pairwise difference histogram."""
    n = len(xs)
    if weighted:
        top = max(strengths)
        q = [int(math.floor(s / top * (1 << 18) + 0.5)) for s in strengths]
    else:
        q = [1] * n
    bins = 13 if fold else 24
    hist = [0] * bins
    limit = min_distance * min_distance
    for i in range(n):
        for j in range(i + 1, n):
            dx = int(xs[i]) - int(xs[j])
            dy = int(ys[i]) - int(ys[j])
            if dx * dx + dy * dy < limit:
                continue
            d = (int(oris[i]) - int(oris[j])) % 24
            w = q[i] * q[j]
            if fold:
                hist[min(d, 24 - d)] += w
            else:
                hist[d] += w
                hist[(24 - d) % 24] += w
    return hist


def direct_gabor_oracle(gray, kernel):
    """Spatial-domain convolution with symmetric padding, rectified."""
    half = (kernel.shape[0] - 1) // 2
    padded = np.pad(gray.astype(np.float64), half, mode="symmetric")
    h, w = gray.shape
    out = np.zeros((h, w))
    for i in range(h):
        for j in range(w):
            window = padded[i : i + 2 * half + 1, j : j + 2 * half + 1]
            out[i, j] = abs(float((window * kernel).sum()))
    return out


class TestGaborBank:
    def test_bank_shape_and_dc(self):
        bank = edges.gabor_bank()
        assert len(bank) == 24
        for kernel in bank:
            assert kernel.shape == (33, 33)
            assert abs(kernel.sum()) < 1e-6

    def test_constant_image_silent(self):
        field = edges.gabor_responses(gray_u8(np.full((32, 32), 77)))
        assert np.allclose(field.responses, 0.0, atol=1e-6)
        assert len(field.strengths) == 0

    def test_matches_direct_convolution(self):
        rng = np.random.default_rng(81)
        gray = rng.integers(0, 256, (16, 16)).astype(np.uint8)
        field = edges.gabor_responses(gray_u8(gray))
        bank = edges.gabor_bank()
        for k in (0, 5, 13):
            oracle = direct_gabor_oracle(gray, bank[k])
            assert np.allclose(field.responses[k], oracle, atol=1e-6)

    def test_vertical_step_edge_orientation(self):
        arr = np.zeros((64, 64), dtype=np.uint8)
        arr[:, 32:] = 255
        field = edges.gabor_responses(gray_u8(arr))
        win = field.responses.argmax(axis=0)
        # variation along x: the 0-degree kernel (or its 180 twin) wins
        for row in range(20, 44):
            assert win[row, 31] in (0, 12)
            assert win[row, 32] in (0, 12)

    def test_small_image_not_resized(self):
        field = edges.gabor_responses(gray_u8(np.zeros((50, 70), dtype=np.uint8)))
        assert field.responses.shape == (24, 50, 70)

    def test_large_image_capped(self):
        field = edges.gabor_responses(gray_u8(np.zeros((400, 400), dtype=np.uint8)))
        h, w = field.responses.shape[1:]
        assert h * w <= 120_000

    def test_strongest_edges_sorted_and_capped(self):
        rng = np.random.default_rng(82)
        field = edges.gabor_responses(gray_u8(rng.integers(0, 256, (150, 150))))
        assert len(field.strengths) == 10_000
        assert np.all(np.diff(field.strengths) <= 0)
        assert np.all(field.strengths > 0)


class TestEdgeDensity:
    def test_constant_zero(self):
        field = edges.gabor_responses(gray_u8(np.full((32, 32), 10)))
        mean, raw = edges.edge_density(field)
        assert mean == pytest.approx(0.0, abs=1e-9)
        assert raw == pytest.approx(0.0, abs=1e-6)

    def test_contrast_ordering(self):
        board = (np.indices((48, 48)).sum(axis=0) % 2).astype(np.uint8)
        hi = edges.gabor_responses(gray_u8(board * 200))
        lo = edges.gabor_responses(gray_u8(board * 40))
        assert edges.edge_density(hi)[0] > edges.edge_density(lo)[0]

    def test_matches_oracle_sum(self):
        rng = np.random.default_rng(83)
        gray = rng.integers(0, 256, (16, 16)).astype(np.uint8)
        field = edges.gabor_responses(gray_u8(gray))
        bank = edges.gabor_bank()
        oracle_raw = sum(direct_gabor_oracle(gray, k).sum() for k in bank)
        mean, raw = edges.edge_density(field)
        assert raw == pytest.approx(oracle_raw, rel=1e-6)
        assert mean == pytest.approx(oracle_raw / 256.0, rel=1e-6)


class TestFirstOrderEntropy:
    def test_constant_nan(self):
        field = edges.gabor_responses(gray_u8(np.full((32, 32), 5)))
        assert math.isnan(edges.eoe_first_order(field))

    def test_matches_handbuilt_histogram(self):
        rng = np.random.default_rng(84)
        field = edges.gabor_responses(gray_u8(rng.integers(0, 256, (40, 40))))
        hist = [float(field.responses[k].sum()) for k in range(24)]
        total = sum(hist)
        expect = -sum(v / total * math.log2(v / total) for v in hist if v > 0)
        assert edges.eoe_first_order(field) == pytest.approx(expect, abs=1e-9)

    def test_isotropic_high_grating_low(self):
        from imgprops.synth import random_phase_image

        iso = [
            edges.eoe_first_order(edges.gabor_responses(random_phase_image(256, 0.5, np.random.default_rng(85 + k))))
            for k in range(10)
        ]
        assert np.mean(iso) >= 4.4
        grating = np.tile((np.arange(256) % 8 < 4).astype(np.uint8) * 255, (256, 1))
        low = edges.eoe_first_order(edges.gabor_responses(gray_u8(grating)))
        assert low <= 2.5
        assert low < min(iso)

    def test_bounded_by_log2_24(self):
        rng = np.random.default_rng(86)
        for _ in range(5):
            field = edges.gabor_responses(gray_u8(rng.integers(0, 256, (64, 64))))
            assert edges.eoe_first_order(field) <= math.log2(24) + 1e-12

    def test_position_permutation_invariant(self):
        # first-order entropy only sees the response mass per orientation
        rng = np.random.default_rng(87)
        field = edges.gabor_responses(gray_u8(rng.integers(0, 256, (32, 32))))
        perm = rng.permutation(32 * 32)
        shuffled = edges.EdgeField(
            responses=field.responses.reshape(24, -1)[:, perm].reshape(24, 32, 32),
            xs=field.xs, ys=field.ys, orientations=field.orientations, strengths=field.strengths,
        )
        assert edges.eoe_first_order(shuffled) == pytest.approx(edges.eoe_first_order(field), abs=1e-12)


def synthetic_edges(rng, n, span=300):
    xs = rng.integers(0, span, n)
    ys = rng.integers(0, span, n)
    oris = rng.integers(0, 24, n)
    strengths = rng.uniform(0.1, 5.0, n)
    return xs, ys, oris, strengths


class TestSecondOrderEntropy:
    def test_matches_naive_oracle_exactly(self):
        for n in (10, 100, 300, 500):
            rng = np.random.default_rng(88 + n)
            xs, ys, oris, strengths = synthetic_edges(rng, n)
            got = edges.pair_difference_histogram(xs, ys, oris, strengths)
            want = naive_pair_histogram(xs, ys, oris, strengths)
            assert got == want

    def test_oracle_equality_unweighted_and_unfolded(self):
        rng = np.random.default_rng(89)
        xs, ys, oris, strengths = synthetic_edges(rng, 200)
        for fold in (True, False):
            for weighted in (True, False):
                got = edges.pair_difference_histogram(xs, ys, oris, strengths, fold=fold, weighted=weighted)
                want = naive_pair_histogram(xs, ys, oris, strengths, fold=fold, weighted=weighted)
                assert got == want

    def test_worker_counts_bitwise_identical(self):
        rng = np.random.default_rng(90)
        xs, ys, oris, strengths = synthetic_edges(rng, 400, span=120)
        results = [
            edges.pair_difference_histogram(xs, ys, oris, strengths, workers=w)
            for w in (1, 2, 8)
        ]
        assert results[0] == results[1] == results[2]

    def test_single_orientation_zero_bits(self):
        xs = np.arange(50) * 30
        ys = np.zeros(50, dtype=np.int64)
        field = edges.EdgeField(np.zeros((24, 1, 1)), xs, ys, np.full(50, 7), np.ones(50))
        assert edges.eoe_second_order(field) == 0.0

    def test_uniform_difference_classes_max_entropy(self):
        # 13 well-separated edges, one per folded class against edge 0,
        # pairwise weights all equal -> uniform 13-bin histogram is not
        # trivially constructible; instead check a engineered two-edge
        # set per class sums to log2(13) when classes fire equally
        xs, ys, oris = [], [], []
        for c in range(13):
            xs.extend([0, 1000 + 40 * c])
            ys.extend([40 * c, 40 * c])
            oris.extend([0, c])
        field = edges.EdgeField(
            np.zeros((24, 1, 1)),
            np.asarray(xs), np.asarray(ys), np.asarray(oris), np.ones(len(xs)),
        )
        hist = edges.pair_difference_histogram(
            field.xs, field.ys, field.orientations, field.strengths, weighted=False
        )
        # all 26 edges pairwise valid: class counts are dominated by the
        # engineered pairs plus cross terms; verify against the oracle
        want = naive_pair_histogram(field.xs, field.ys, field.orientations, field.strengths, weighted=False)
        assert hist == want

    def test_exactly_uniform_histogram_gives_log2_13(self):
        # direct uniform histogram: entropy formula check on the helper
        assert edges._entropy_bits([5] * 13) == pytest.approx(math.log2(13), abs=1e-12)

    def test_orientation_relabeling_invariant(self):
        rng = np.random.default_rng(91)
        xs, ys, oris, strengths = synthetic_edges(rng, 150)
        a = edges.pair_difference_histogram(xs, ys, oris, strengths)
        b = edges.pair_difference_histogram(xs, ys, (oris + 5) % 24, strengths)
        assert a == b

    def test_close_pairs_excluded(self):
        xs = np.array([0, 10, 100])
        ys = np.array([0, 0, 0])
        oris = np.array([0, 3, 6])
        hist = edges.pair_difference_histogram(xs, ys, oris, np.ones(3), weighted=False)
        # pair (0,1) is 10 px apart -> dropped; pairs (0,2) and (1,2) stay
        assert sum(hist) == 2
        assert hist[6] == 1 and hist[3] == 1

    def test_too_few_edges_nan(self):
        field = edges.EdgeField(np.zeros((24, 1, 1)), np.array([0]), np.array([0]), np.array([0]), np.array([1.0]))
        assert math.isnan(edges.eoe_second_order(field))

    def test_second_order_from_image(self):
        rng = np.random.default_rng(92)
        field = edges.gabor_responses(gray_u8(rng.integers(0, 256, (80, 80))))
        value = edges.eoe_second_order(field)
        assert 0.0 <= value <= math.log2(13) + 1e-12
