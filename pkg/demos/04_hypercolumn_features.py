#!/usr/bin/env python3
# From five block activation maps to the 10-dim aesthetic feature:
# bilinear resize, center-Gaussian weighting, mean/std pooling.

import numpy as np

from scenesearch import EngineConfig, bilinear_resize, build_hypercolumns, gaussian_center_map

rng = np.random.default_rng(1)
config = EngineConfig()

print("align-corners bilinear, 2x2 -> 3x3:")
print(bilinear_resize(np.array([[0.0, 1.0], [2.0, 3.0]]), 3))

g = gaussian_center_map(config.map_size, config.sigma_b)
print(f"\ncenter-Gaussian map at the default sigma_b={config.sigma_b}: "
      f"peak {g.max():.3f}, corner {g[0, 0]:.3f} (nearly uniform on purpose)")
narrow = gaussian_center_map(config.map_size, 0.15)
print(f"a narrow sigma_b=0.15 map: peak {narrow.max():.3f}, corner {narrow[0, 0]:.2e}")

# A bundle shaped like the five convolutional blocks of a 224-input network.
bundle = [rng.normal(loc=1.0, size=(s, s)) for s in (224, 112, 56, 28, 14)]
feats = build_hypercolumns(bundle, config)
print("\nphi =", np.round(feats.phi, 4))
print("      [mean_1, std_1, ..., mean_5, std_5]")

# Constant maps carry no variation: stds vanish exactly.
flat = build_hypercolumns([np.full((s, s), 2.0) for s in (8, 7, 6, 5, 4)], config)
print("\nconstant bundle phi =", np.round(flat.phi, 4), "(stds exactly zero)")
