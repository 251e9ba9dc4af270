"""Synthetic dataset generation.

Produces a complete, self-consistent dataset (tensor files, manifest, vote
sheets, transcripts, exemplar corpus, embedding table) shaped like a
scaled-down documentary collection, so the whole pipeline runs with zero
external data or models. Everything derives from one seed; two runs with
the same seed write byte-identical trees.

The data carries plantable structure: each corpus category has a feature
cluster, many shots depict one category (their keyframe features sit in
that cluster), transcript tokens mention synset words near the shots that
depict them, and per-shot block maps scale with a hidden quality score that
also drives the annotator votes. Classifiers, the ranking model and
retrieval therefore all have real signal to find.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .dataset import POS_TAGS
from .tensorio import write_jsonl, write_tensor_file

DEFAULT_BLOCK_SIZES = ((32, 32), (16, 16), (8, 8), (4, 4), (2, 2))


def generate_fixture(
    out_dir: str | Path,
    *,
    n_videos: int = 3,
    shots_per_video: int = 60,
    scenes_per_video: int = 10,
    vocab_size: int = 50,
    n_categories: int = 20,
    exemplars_per_category: int = 8,
    embed_dim: int = 16,
    shot_seconds: float = 4.0,
    block_sizes: tuple[tuple[int, int], ...] = DEFAULT_BLOCK_SIZES,
    fc6_dim: int = 4096,
    seed: int = 0,
) -> Path:
    """Write a full synthetic dataset under ``out_dir``; returns the manifest path."""
    if scenes_per_video > shots_per_video:
        raise ValueError("need at least one shot per scene")
    if n_categories * 2 > vocab_size:
        raise ValueError("vocabulary must cover two synset words per category")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    # Embedding table: one cluster direction per category so synset words of
    # the same category embed near each other.
    terms = [f"term{i:03d}" for i in range(vocab_size)]
    directions = rng.normal(size=(n_categories, embed_dim))
    vectors = np.empty((vocab_size, embed_dim))
    for i in range(vocab_size):
        if i < 2 * n_categories:
            vectors[i] = directions[i // 2] + 0.15 * rng.normal(size=embed_dim)
        else:
            vectors[i] = rng.normal(size=embed_dim)
    emb_path = out / "embeddings.tnsr"
    write_tensor_file(emb_path, vectors.astype(np.float32))
    write_jsonl(out / "embeddings.vocab.jsonl", [{"term": t} for t in terms])

    # Exemplar corpus: category k owns terms 2k and 2k+1; remaining terms
    # belong to no synset and exercise nearest-category mapping.
    corpus = out / "corpus"
    corpus.mkdir(exist_ok=True)
    centers = 2.0 * rng.normal(size=(n_categories, fc6_dim))
    category_ids = [f"cat{k:02d}" for k in range(n_categories)]
    synsets = {cid: [terms[2 * k], terms[2 * k + 1]] for k, cid in enumerate(category_ids)}
    for k, cid in enumerate(category_ids):
        cdir = corpus / cid
        cdir.mkdir(exist_ok=True)
        exemplars = centers[k] + 0.4 * rng.normal(size=(exemplars_per_category, fc6_dim))
        write_tensor_file(cdir / "exemplars.fc6.tnsr", exemplars.astype(np.float32))
        with open(cdir / "synset.json", "w", encoding="utf-8") as fh:
            json.dump({"words": synsets[cid]}, fh, sort_keys=True, separators=(",", ":"))
            fh.write("\n")

    pos_tags = sorted(POS_TAGS)
    manifest_videos = []
    votes_rows = []
    shot_id = 0
    scene_id = 0
    for v in range(n_videos):
        video_id = f"video{v:02d}"
        vdir = out / video_id
        feat_dir = vdir / "keyframes"
        feat_dir.mkdir(parents=True, exist_ok=True)

        shot_rows = []
        token_rows = []
        first_shot = shot_id
        duration = shots_per_video * shot_seconds
        qualities = {}
        for i in range(shots_per_video):
            t_start = i * shot_seconds
            t_end = t_start + shot_seconds
            t_mid = (t_start + t_end) / 2.0
            shot_rows.append(
                {"shot_id": shot_id, "video_id": video_id, "t_start": t_start, "t_end": t_end}
            )

            depicted = None
            if rng.random() < 0.65:
                depicted = int(rng.integers(n_categories))
                fc6 = centers[depicted] + 0.4 * rng.normal(size=fc6_dim)
            else:
                fc6 = rng.normal(size=fc6_dim)
            write_tensor_file(feat_dir / f"{shot_id}.fc6.tnsr", fc6.astype(np.float32))

            quality = float(rng.uniform(0.1, 1.0))
            qualities[shot_id] = quality
            for b, (h, w) in enumerate(block_sizes, start=1):
                block = quality * (1.0 + 0.5 * rng.normal(size=(h, w)))
                write_tensor_file(feat_dir / f"{shot_id}.block{b}.tnsr", block.astype(np.float32))

            if depicted is not None and rng.random() < 0.75:
                lemma = synsets[category_ids[depicted]][int(rng.integers(2))]
                t = float(np.clip(t_mid + 1.5 * rng.normal(), 0.0, duration))
                token_rows.append(
                    {
                        "video_id": video_id,
                        "t": t,
                        "surface": lemma,
                        "lemma": lemma,
                        "pos": pos_tags[int(rng.integers(len(pos_tags)))],
                    }
                )
            if rng.random() < 0.05:
                # Out-of-vocabulary mention; the index build must skip it.
                token_rows.append(
                    {
                        "video_id": video_id,
                        "t": float(rng.uniform(0.0, duration)),
                        "surface": "Unmentionable",
                        "lemma": "unmentionable",
                        "pos": "NN",
                    }
                )
            shot_id += 1

        # Contiguous scene spans of near-equal size partitioning the shots.
        scene_rows = []
        bounds = np.linspace(0, shots_per_video, scenes_per_video + 1).astype(int)
        for s in range(scenes_per_video):
            span = [first_shot + int(bounds[s]), first_shot + int(bounds[s + 1]) - 1]
            scene_rows.append({"scene_id": scene_id, "video_id": video_id, "shot_span": span})
            members = list(range(span[0], span[1] + 1))
            ranked = sorted(members, key=lambda sid: -qualities[sid])
            for rank_pos, sid in enumerate(ranked):
                votes_rows.append(
                    {"scene_id": scene_id, "shot_id": sid, "votes": max(0, 3 - rank_pos)}
                )
            scene_id += 1

        write_jsonl(vdir / "shots.jsonl", shot_rows)
        write_jsonl(vdir / "scenes.jsonl", scene_rows)
        write_jsonl(vdir / "transcript.jsonl", token_rows)
        manifest_videos.append(
            {
                "video_id": video_id,
                "transcript_file": f"{video_id}/transcript.jsonl",
                "shots_file": f"{video_id}/shots.jsonl",
                "scenes_file": f"{video_id}/scenes.jsonl",
                "keyframe_feature_dir": f"{video_id}/keyframes",
            }
        )

    votes_rows.sort(key=lambda r: (r["scene_id"], r["shot_id"]))
    write_jsonl(out / "votes.jsonl", votes_rows)

    # A handful of single-term queries over the synset vocabulary, useful
    # for evaluate runs and demos.
    n_queries = min(20, 2 * n_categories)
    with open(out / "queries.txt", "w", encoding="utf-8") as fh:
        for i in range(n_queries):
            fh.write(terms[i] + "\n")

    manifest = {
        "videos": manifest_videos,
        "embedding_file": "embeddings.tnsr",
        "corpus_dir": "corpus",
    }
    manifest_path = out / "manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return manifest_path
