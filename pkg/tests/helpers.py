"""Builders for hand-crafted datasets with fully controlled content."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from scenesearch.concepts import ConceptClassifier
from scenesearch.tensorio import write_jsonl, write_tensor_file

FC6_DIM = 4096
SMALL_BLOCKS = ((8, 8), (6, 6), (4, 4), (3, 3), (2, 2))


def unit_fc6(direction: int, scale: float = 1.0) -> np.ndarray:
    vec = np.zeros(FC6_DIM, dtype=np.float64)
    vec[direction] = scale
    return vec


def constant_blocks(value: float, sizes=SMALL_BLOCKS) -> list[np.ndarray]:
    return [np.full(s, value, dtype=np.float64) for s in sizes]


def planted_classifier(category_id: str, direction: int, gain: float = 1.0) -> ConceptClassifier:
    """Classifier whose probability on s*e_direction is 1/(1+exp(-gain*s))."""
    w = np.zeros(FC6_DIM, dtype=np.float32)
    w[direction] = gain
    return ConceptClassifier(category_id, w, 0.0, -1.0, 0.0, train_seed=0)


def write_dataset(
    root: Path,
    videos: list[dict],
    vocab: dict[str, np.ndarray],
    categories: list[tuple[str, list[str], np.ndarray]],
) -> Path:
    """Write a dataset tree from explicit per-video content.

    Each video dict: ``video_id``, ``shots`` [(shot_id, t_start, t_end)],
    ``scenes`` [(scene_id, first, last)], ``tokens`` [(t, lemma)], ``fc6``
    {shot_id: [4096] array}, ``blocks`` {shot_id: five 2-D arrays}. Missing
    fc6/blocks entries default to zeros / constant maps.
    """
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    manifest_videos = []
    for spec in videos:
        vid = spec["video_id"]
        vdir = root / vid
        feat = vdir / "keyframes"
        feat.mkdir(parents=True, exist_ok=True)
        write_jsonl(
            vdir / "shots.jsonl",
            [
                {"shot_id": sid, "video_id": vid, "t_start": t0, "t_end": t1}
                for sid, t0, t1 in spec["shots"]
            ],
        )
        write_jsonl(
            vdir / "scenes.jsonl",
            [
                {"scene_id": cid, "video_id": vid, "shot_span": [first, last]}
                for cid, first, last in spec["scenes"]
            ],
        )
        write_jsonl(
            vdir / "transcript.jsonl",
            [
                {"video_id": vid, "t": t, "surface": lemma, "lemma": lemma, "pos": "NN"}
                for t, lemma in spec.get("tokens", [])
            ],
        )
        fc6 = spec.get("fc6", {})
        blocks = spec.get("blocks", {})
        for sid, _, _ in spec["shots"]:
            write_tensor_file(
                feat / f"{sid}.fc6.tnsr",
                np.asarray(fc6.get(sid, unit_fc6(0, 0.001)), dtype=np.float32),
            )
            for b, m in enumerate(blocks.get(sid, constant_blocks(1.0)), start=1):
                write_tensor_file(feat / f"{sid}.block{b}.tnsr", np.asarray(m, dtype=np.float32))
        manifest_videos.append(
            {
                "video_id": vid,
                "transcript_file": f"{vid}/transcript.jsonl",
                "shots_file": f"{vid}/shots.jsonl",
                "scenes_file": f"{vid}/scenes.jsonl",
                "keyframe_feature_dir": f"{vid}/keyframes",
            }
        )

    terms = sorted(vocab)
    matrix = np.stack([np.asarray(vocab[t], dtype=np.float32) for t in terms])
    write_tensor_file(root / "embeddings.tnsr", matrix)
    write_jsonl(root / "embeddings.vocab.jsonl", [{"term": t} for t in terms])

    corpus = root / "corpus"
    corpus.mkdir(exist_ok=True)
    for cid, words, exemplars in categories:
        cdir = corpus / cid
        cdir.mkdir(exist_ok=True)
        with open(cdir / "synset.json", "w", encoding="utf-8") as fh:
            json.dump({"words": words}, fh)
            fh.write("\n")
        write_tensor_file(cdir / "exemplars.fc6.tnsr", np.asarray(exemplars, dtype=np.float32))

    manifest = {
        "videos": manifest_videos,
        "embedding_file": "embeddings.tnsr",
        "corpus_dir": "corpus",
    }
    path = root / "manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return path


def orthogonal_vocab(terms: list[str], dim: int | None = None) -> dict[str, np.ndarray]:
    """One axis-aligned embedding per term; cosine is exactly 0 or 1."""
    dim = dim or len(terms)
    assert dim >= len(terms)
    return {t: np.eye(dim)[i] for i, t in enumerate(terms)}


def two_exemplars(direction: int, scale: float = 1.0) -> np.ndarray:
    base = unit_fc6(direction, scale)
    return np.stack([base, base * 1.1])


def score_for_probability(p: float, gain: float = 1.0) -> float:
    """Feature magnitude making a planted classifier output exactly p."""
    return -math.log(1.0 / p - 1.0) / gain
