#!/usr/bin/env python3
# Train one calibrated concept classifier on clustered features and watch
# visual confirmation decay as the transcript mention moves away in time.

import numpy as np

from scenesearch import EngineConfig, classifier_probability, temporal_weight, train_concept_classifier
from scenesearch.concepts import visual_confirmation
from scenesearch.dataset import Shot

rng = np.random.default_rng(0)
config = EngineConfig()

# Exemplars of one concept cluster around a direction; negatives elsewhere.
center = rng.normal(size=4096) * 2.0
positives = center + 0.4 * rng.normal(size=(8, 4096))
pool = rng.normal(size=(40, 4096))

clf = train_concept_classifier("demo-concept", positives, pool, config, seed=7)
print("trained:", clf.category_id, "| platt A,B =", round(clf.platt_a, 4), round(clf.platt_b, 4))

inside = center + 0.4 * rng.normal(size=4096)
outside = rng.normal(size=4096)
print("classifier probability on an in-cluster keyframe:  ", round(classifier_probability(clf, inside), 4))
print("classifier probability on an off-cluster keyframe: ", round(classifier_probability(clf, outside), 4))

# The Gaussian temporal discount at the published sigma_a = 5 s.
print("\ndelta_t ->", [round(temporal_weight(d, 0.0, config.sigma_a), 4) for d in (0, 2.5, 5, 10, 15)])

shot = Shot(0, "v", 18.0, 22.0)  # keyframe at t_mid = 20 s
print("\nconfirmation of the concept in that shot as a mention drifts away:")
for t_u in (20.0, 23.0, 28.0, 34.0):
    p = visual_confirmation(clf, shot, inside, t_u, config)
    print(f"  mention at t={t_u:5.1f}s -> P = {p:.4f}")
