"""Aesthetic feature construction from convolutional block activation maps.

Each keyframe ships five block-level maps (the channel-and-layer mean of one
convolutional block at its native resolution). Every map is resized to a
fixed S x S grid with align-corners bilinear interpolation, weighted by a
Gaussian centered on the image (std sigma_b * S, peak value 1), and
summarized by two numbers: the mean of the weighted map and the
center-weighted population standard deviation of the resized map. The
resulting 10-dim vector, ordered [mean_1, std_1, ..., mean_5, std_5], is the
feature the ranking model scores.

Both statistics are 1-homogeneous in the input, and a constant input map
yields exactly zero std (deviations are anchored to a sample value so no
rounding residue survives).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import EngineConfig
from .errors import FeatureError

BLOCK_COUNT = 5
PHI_DIM = 2 * BLOCK_COUNT


@dataclass(frozen=True)
class HypercolumnFeatures:
    maps: tuple[np.ndarray, ...]  # 5 weighted maps, each [S, S]
    phi: np.ndarray  # [10]


def bilinear_resize(map2d: np.ndarray, out_h: int, out_w: int | None = None) -> np.ndarray:
    """Align-corners bilinear resampling of a 2-D map.

    Written in lerp form a + t*(b - a), so constant maps stay exactly
    constant and resizing to the source size is a bit-exact identity.
    """
    if out_w is None:
        out_w = out_h
    src = np.asarray(map2d, dtype=np.float64)
    if src.ndim != 2:
        raise FeatureError("bad-features", f"block map must be rank 2, got rank {src.ndim}")
    h, w = src.shape
    if h < 1 or w < 1 or out_h < 1 or out_w < 1:
        raise FeatureError("bad-features", "map sizes must be >= 1")

    def coords(n_src: int, n_out: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if n_out == 1 or n_src == 1:
            pos = np.zeros(n_out)
        else:
            pos = np.arange(n_out) * (n_src - 1) / (n_out - 1)
        i0 = np.floor(pos).astype(np.intp)
        i0 = np.minimum(i0, n_src - 1)
        i1 = np.minimum(i0 + 1, n_src - 1)
        return i0, i1, pos - i0

    y0, y1, fy = coords(h, out_h)
    x0, x1, fx = coords(w, out_w)
    rows = src[y0, :] + fy[:, None] * (src[y1, :] - src[y0, :])
    return rows[:, x0] + fx[None, :] * (rows[:, x1] - rows[:, x0])


def gaussian_center_map(size: int, sigma_b: float) -> np.ndarray:
    """Isotropic Gaussian weight map, peak 1 at the image center.

    Centered at ((size-1)/2, (size-1)/2) with std sigma_b * size; strictly
    positive and 4-fold symmetric. The peak normalization (max 1 instead of
    unit integral) keeps feature magnitudes independent of the map size.
    """
    if size < 2:
        raise ValueError(f"map size must be >= 2, got {size}")
    if not sigma_b > 0:
        raise ValueError(f"sigma_b must be > 0, got {sigma_b}")
    c = (size - 1) / 2.0
    sigma = sigma_b * size
    d = np.arange(size, dtype=np.float64) - c
    sq = d * d
    return np.exp(-(sq[:, None] + sq[None, :]) / (2.0 * sigma * sigma))


def weighted_stats(map2d: np.ndarray, weights: np.ndarray) -> tuple[float, float]:
    """(mean of the weighted map, weighted population std of the map).

    The std uses the weights as importance weights: deviations are taken
    about the weight-normalized mean and averaged with the same weights.
    Deviations are anchored at the map's first sample (a no-op for central
    moments) so constant maps produce an exact zero.
    """
    mean_value = float(np.mean(weights * map2d))
    anchored = map2d - map2d.flat[0]
    wsum = float(np.sum(weights))
    mu = float(np.sum(weights * anchored)) / wsum
    var = float(np.sum(weights * (anchored - mu) ** 2)) / wsum
    return mean_value, float(np.sqrt(var))


def build_hypercolumns(
    block_maps: Sequence[np.ndarray], config: EngineConfig | None = None
) -> HypercolumnFeatures:
    """Resize, center-weight and pool five block maps into the 10-dim feature."""
    cfg = config if config is not None else EngineConfig()
    if len(block_maps) != BLOCK_COUNT or any(m is None for m in block_maps):
        raise FeatureError(
            "incomplete-bundle", f"need exactly {BLOCK_COUNT} block maps, got {len(block_maps)}"
        )
    size = cfg.map_size
    gauss = gaussian_center_map(size, cfg.sigma_b)
    weighted_maps = []
    phi = np.empty(PHI_DIM, dtype=np.float64)
    for b, raw in enumerate(block_maps):
        resized = bilinear_resize(raw, size)
        weighted = gauss * resized
        mean_value, std_value = weighted_stats(resized, gauss)
        weighted_maps.append(weighted)
        phi[2 * b] = mean_value
        phi[2 * b + 1] = std_value
    return HypercolumnFeatures(maps=tuple(weighted_maps), phi=phi)


def phi_from_blocks(block_maps: Sequence[np.ndarray], config: EngineConfig | None = None) -> np.ndarray:
    return build_hypercolumns(block_maps, config).phi
