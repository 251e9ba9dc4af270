#!/usr/bin/env python3
# Annotator votes -> preference pairs -> ranking SVM -> swapped-pairs metric.

import numpy as np

from scenesearch import pairs_from_votes, rank_score, swapped_pairs_pct, train_rank

rng = np.random.default_rng(2)

# Three scenes, four keyframes each. A hidden "quality" drives both the
# feature vector and the annotators' vote counts (0..3 per scene).
votes, phis, quality = {}, {}, {}
kf = 0
for scene in range(3):
    members = []
    for _ in range(4):
        q = float(rng.uniform(0, 1))
        quality[kf] = q
        phi = rng.normal(size=10) * 0.1
        phi[0] += 4.0 * q  # the signal the model should discover
        phis[kf] = phi
        members.append(kf)
        kf += 1
    ranked = sorted(members, key=lambda k: quality[k])
    votes[scene] = {k: r for r, k in enumerate(ranked)}

pairs = pairs_from_votes(votes)
print("scenes:", len(votes), "| preference pairs:", len(pairs))

model = train_rank(pairs, phis, c=3.0)
print("weights:", np.round(model.w, 3))
print("objective:", round(model.objective_value, 4))
print("training swapped pairs:", swapped_pairs_pct(model, pairs, phis), "%")

scene0 = sorted(votes[0])
print("\nscene 0 keyframes, scored (higher = better thumbnail):")
for k in sorted(scene0, key=lambda k: -rank_score(model, phis[k])):
    print(f"  keyframe {k}: votes={votes[0][k]} score={rank_score(model, phis[k]):+.3f}")
