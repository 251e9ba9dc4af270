"""Bilinear resize, center Gaussian, and feature pooling properties."""

from __future__ import annotations

import math

import numpy as np
import pytest

from oracles import naive_bilinear, naive_gaussian_map, naive_phi
from scenesearch.config import EngineConfig
from scenesearch.errors import FeatureError
from scenesearch.hypercolumn import (
    bilinear_resize,
    build_hypercolumns,
    gaussian_center_map,
    phi_from_blocks,
)


class TestBilinearResize:
    def test_constant_preserved_exactly(self):
        out = bilinear_resize(np.full((7, 7), 3.5), 56)
        assert out.shape == (56, 56)
        assert np.all(out == 3.5)

    def test_hand_computed_upsample(self):
        out = bilinear_resize(np.array([[0.0, 1.0], [2.0, 3.0]]), 3)
        expected = np.array([[0.0, 0.5, 1.0], [1.0, 1.5, 2.0], [2.0, 2.5, 3.0]])
        assert np.array_equal(out, expected)

    def test_identity_bit_exact(self):
        rng = np.random.default_rng(1)
        src = rng.normal(size=(9, 13))
        out = bilinear_resize(src, 9, 13)
        assert np.array_equal(out, src)

    def test_matches_naive_formula(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            h, w = rng.integers(1, 12, size=2)
            oh, ow = rng.integers(1, 15, size=2)
            src = rng.normal(size=(h, w))
            np.testing.assert_allclose(
                bilinear_resize(src, int(oh), int(ow)),
                naive_bilinear(src, int(oh), int(ow)),
                atol=1e-12,
            )

    def test_downsample_corners_align(self):
        src = np.arange(25, dtype=np.float64).reshape(5, 5)
        out = bilinear_resize(src, 2)
        assert out[0, 0] == src[0, 0]
        assert out[0, 1] == src[0, 4]
        assert out[1, 0] == src[4, 0]
        assert out[1, 1] == src[4, 4]

    def test_single_row_source(self):
        out = bilinear_resize(np.array([[1.0, 3.0]]), 4, 3)
        np.testing.assert_allclose(out, [[1, 2, 3]] * 4, atol=1e-12)


class TestGaussianCenterMap:
    def test_center_pixel_is_one_for_odd_size(self):
        g = gaussian_center_map(7, 4.5)
        assert g[3, 3] == 1.0

    def test_corner_symmetry(self):
        for size in (4, 5, 8, 9):
            g = gaussian_center_map(size, 1.2)
            assert g[0, 0] == g[size - 1, size - 1] == g[0, size - 1] == g[size - 1, 0]
            assert np.array_equal(g, g.T)
            assert np.array_equal(g, g[::-1, :])
            assert np.array_equal(g, g[:, ::-1])

    def test_corner_value_closed_form(self):
        # size 4, sigma_b 0.25 -> sigma = 1; corner at distance (1.5, 1.5).
        g = gaussian_center_map(4, 0.25)
        assert g[0, 0] == pytest.approx(math.exp(-2.25), abs=1e-12)
        assert g[0, 0] == pytest.approx(0.105399, abs=1e-6)

    def test_strictly_positive_peak_at_center(self):
        g = gaussian_center_map(9, 0.3)
        assert np.all(g > 0)
        assert g.max() == g[4, 4] == 1.0

    def test_default_sigma_nearly_uniform(self):
        # sigma_b = 4.5 means sigma is 4.5x the map side: weighting is
        # intentionally gentle at the published default.
        g = gaussian_center_map(56, 4.5)
        assert g.min() > 0.96

    def test_matches_naive(self):
        np.testing.assert_allclose(
            gaussian_center_map(11, 0.7), naive_gaussian_map(11, 0.7), atol=1e-15
        )


class TestBuildHypercolumns:
    def _random_bundle(self, rng, sizes=((12, 12), (9, 9), (6, 6), (4, 4), (2, 2))):
        return [rng.normal(size=s) for s in sizes]

    def test_constant_bundle(self, config):
        k = 2.75
        bundle = [np.full((6, 6), k), np.full((5, 5), k), np.full((4, 4), k),
                  np.full((3, 3), k), np.full((2, 2), k)]
        feats = build_hypercolumns(bundle, config)
        gauss_mean = gaussian_center_map(config.map_size, config.sigma_b).mean()
        means = feats.phi[0::2]
        stds = feats.phi[1::2]
        assert np.all(stds == 0.0)
        np.testing.assert_allclose(means, k * gauss_mean, rtol=1e-12)

    def test_zero_bundle(self, config):
        bundle = [np.zeros((4, 4))] * 5
        phi = phi_from_blocks(bundle, config)
        assert np.all(phi == 0.0)

    def test_linearity_under_scaling(self, config):
        rng = np.random.default_rng(3)
        bundle = self._random_bundle(rng)
        base = phi_from_blocks(bundle, config)
        for lam in (0.5, 2.0, 10.0):
            scaled = phi_from_blocks([lam * m for m in bundle], config)
            np.testing.assert_allclose(scaled, lam * base, rtol=1e-6)

    def test_matches_naive_recompute(self, config):
        rng = np.random.default_rng(4)
        bundle = self._random_bundle(rng)
        cfg = EngineConfig(map_size=10, sigma_b=0.6)
        np.testing.assert_allclose(
            phi_from_blocks(bundle, cfg), naive_phi(bundle, 10, 0.6), atol=1e-10
        )

    def test_incomplete_bundle(self, config):
        with pytest.raises(FeatureError) as err:
            build_hypercolumns([np.ones((3, 3))] * 4, config)
        assert err.value.code == "incomplete-bundle"

    def test_phi_ordering_and_shapes(self, config):
        rng = np.random.default_rng(5)
        bundle = self._random_bundle(rng)
        feats = build_hypercolumns(bundle, config)
        assert feats.phi.shape == (10,)
        assert len(feats.maps) == 5
        assert all(m.shape == (config.map_size, config.map_size) for m in feats.maps)
        assert np.all(feats.phi[1::2] >= 0)  # std components
        # Block order: perturbing block b moves exactly components 2b, 2b+1.
        for b in range(5):
            changed = [m.copy() for m in bundle]
            changed[b] = changed[b] + 10.0
            other = build_hypercolumns(changed, config)
            diff = np.nonzero(~np.isclose(other.phi, feats.phi, rtol=1e-9))[0]
            assert set(diff) <= {2 * b, 2 * b + 1}
            assert 2 * b in diff  # the mean surely moved

    def test_block_mean_resize_commutes_with_channel_mean(self, config):
        # Resizing a channel-mean map equals the mean of per-channel resizes.
        rng = np.random.default_rng(6)
        channels = rng.normal(size=(7, 5, 8))  # 7 channels of 5x8 maps
        mean_map = channels.mean(axis=0)
        a = bilinear_resize(mean_map, 12, 12)
        b = np.mean([bilinear_resize(c, 12, 12) for c in channels], axis=0)
        np.testing.assert_allclose(a, b, atol=1e-12)

    def test_weighted_std_emphasizes_center(self):
        # Variation at the center must contribute more than at the corner
        # once the Gaussian is narrow.
        cfg = EngineConfig(map_size=9, sigma_b=0.15)
        flat = np.zeros((9, 9))
        center_bump = flat.copy()
        center_bump[4, 4] = 1.0
        corner_bump = flat.copy()
        corner_bump[0, 0] = 1.0
        mk = lambda m: [m, np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 2))]
        std_center = phi_from_blocks(mk(center_bump), cfg)[1]
        std_corner = phi_from_blocks(mk(corner_bump), cfg)[1]
        assert std_center > std_corner
