#!/usr/bin/env python3
# The whole pipeline: synthetic dataset -> concept classifiers -> ranking
# model -> inverted index -> ranked (video, scene, thumbnail) triplets.

import tempfile
from pathlib import Path

from scenesearch import EngineConfig, generate_fixture, load_dataset, query, train_rank
from scenesearch.aesrank import load_votes, pairs_from_votes
from scenesearch.concepts import train_all_concepts
from scenesearch.engine import build_index, map_dataset_lemmas, save_index
from scenesearch.hypercolumn import phi_from_blocks

root = Path(tempfile.mkdtemp(prefix="scenesearch-demo-"))
manifest = generate_fixture(root, n_videos=3, shots_per_video=30, scenes_per_video=6, seed=5)
ds = load_dataset(manifest)
config = EngineConfig()

# Offline stage: map transcript lemmas to corpus categories, train one
# calibrated classifier per needed category, learn the aesthetic ranker.
lemma_to_category, _ = map_dataset_lemmas(ds)
classifiers = train_all_concepts(lemma_to_category, ds.categories, config, master_seed=5)
print("lemmas mapped:", len(lemma_to_category), "| classifiers trained:", len(classifiers))

votes = load_votes(root / "votes.jsonl")
pairs = pairs_from_votes(votes)
phis = {sid: phi_from_blocks(ds.blocks[sid], config) for sid in ds.blocks}
model = train_rank(pairs, phis, config.svm_c_rank)
print("ranking model trained on", len(pairs), "preference pairs")

index, report = build_index(ds, classifiers, model, config)
save_index(root / "index.bin", index)
print("indexed lemmas:", report.lemmas_indexed, "| skipped tokens:",
      report.tokens_unmapped_lemma + report.tokens_no_classifier)

# Online stage: a textual query embeds to the nearest indexed concept and
# scenes are ranked by the blended semantic/aesthetic score.
for text in ("term000", "term005 term006"):
    result = query(ds, index, text, alpha=config.alpha, k=3)
    print(f"\nquery {text!r} -> concept {result.concept!r}")
    for hit in result.hits:
        print(f"  #{hit.rank} video={hit.video_id} scene={hit.scene_id} "
              f"thumbnail=shot {hit.shot_id} R={hit.score:.4f}")
