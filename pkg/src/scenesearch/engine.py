"""Offline index construction and online query answering.

Offline, every transcript token is visually confirmed against its
temporally-near shots and the best confirmation per (lemma, shot) is stored
in an inverted index; every keyframe's aesthetic score is precomputed from
its hypercolumn feature. Online, a query embeds to the most similar indexed
lemma u and each candidate scene receives

    R = max over shots s of ( alpha * P(s, u) + (1 - alpha) * aesthetic(s) )

with P = 0 for shots u was never confirmed in. Results are scenes sorted by
descending R (ties: ascending video then scene id), each presented with the
keyframe maximizing the aesthetic term. Scores cross the wire as float32,
so both postings and aesthetic values are float32-rounded at build time;
queries against a freshly built index and against a reloaded one are
bit-identical.

Index file layout (all little-endian):

    magic    8 bytes  b"SCNINDX1"
    hdr_len  u64
    header   hdr_len bytes of JSON: videos, lemmas (sorted), per-lemma
             embedding vectors (base64 tensors), aesthetic entry count
    postings per lemma in header order: count u32, then count records of
             (video u32, scene u32, shot u32, p f32)
    aesthetic count u32, then records of (shot u32, score f32)
"""

from __future__ import annotations

import json
import string
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .aesrank import RankModel, rank_score
from .concepts import ConceptClassifier, visual_confirmation
from .config import EngineConfig
from .dataset import Dataset, Scene
from .embedspace import build_category_vectors, embed_query, map_concept, match_query_to_concept
from .errors import EmbeddingError, IndexError_
from .hypercolumn import phi_from_blocks
from .tensorio import tensor_from_base64, tensor_to_base64, write_tensor_file
from . import concepts

INDEX_MAGIC = b"SCNINDX1"

_POSTING_DTYPE = np.dtype([("video", "<u4"), ("scene", "<u4"), ("shot", "<u4"), ("p", "<f4")])
_AES_DTYPE = np.dtype([("shot", "<u4"), ("score", "<f4")])
_COUNT = np.dtype("<u4")
_LEN = np.dtype("<u8")


@dataclass(frozen=True)
class Posting:
    video_idx: int
    scene_id: int
    shot_id: int
    p: float


@dataclass
class Index:
    videos: list[str]
    vocabulary: dict[str, np.ndarray]  # indexed lemma -> embedding vector
    postings: dict[str, list[Posting]]  # sorted by (video_idx, scene_id, shot_id)
    aesthetic: dict[int, float]  # shot_id -> precomputed ranking score


@dataclass
class BuildReport:
    tokens_total: int = 0
    tokens_unmapped_lemma: int = 0  # lemma absent from the embedding table
    tokens_no_classifier: int = 0  # mapped category has no trained classifier
    tokens_no_candidates: int = 0  # no shot inside the candidate window
    lemmas_indexed: int = 0
    categories_excluded: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "tokens_total": self.tokens_total,
            "tokens_unmapped_lemma": self.tokens_unmapped_lemma,
            "tokens_no_classifier": self.tokens_no_classifier,
            "tokens_no_candidates": self.tokens_no_candidates,
            "lemmas_indexed": self.lemmas_indexed,
            "categories_excluded": list(self.categories_excluded),
        }


@dataclass(frozen=True)
class QueryHit:
    rank: int
    video_id: str
    scene_id: int
    shot_id: int  # selected thumbnail keyframe
    score: float
    concept: str

    def as_dict(self) -> dict:
        return {
            "rank": self.rank,
            "video_id": self.video_id,
            "scene_id": self.scene_id,
            "shot_id": self.shot_id,
            "score": self.score,
            "concept": self.concept,
        }


@dataclass
class QueryResult:
    query: str
    concept: str
    hits: list[QueryHit]


def map_dataset_lemmas(
    dataset: Dataset, report: BuildReport | None = None
) -> tuple[dict[str, str], dict[str, np.ndarray]]:
    """Map every distinct transcript lemma to its nearest corpus category.

    Returns (lemma -> category_id, category synset vectors). Lemmas absent
    from the embedding table are left out.
    """
    category_vectors, excluded = build_category_vectors(dataset.categories, dataset.embedding)
    if report is not None:
        report.categories_excluded = excluded
    mapping: dict[str, str] = {}
    for lemma in sorted({t.lemma for t in dataset.all_tokens()}):
        if lemma in dataset.embedding:
            mapping[lemma] = map_concept(lemma, category_vectors, dataset.embedding)
    return mapping, category_vectors


def build_index(
    dataset: Dataset,
    classifiers: Mapping[str, ConceptClassifier],
    rank_model: RankModel,
    config: EngineConfig | None = None,
    threads: int = 1,
    phi_cache_dir: str | Path | None = None,
) -> tuple[Index, BuildReport]:
    """Precompute confirmations and aesthetic scores for the whole dataset.

    Work parallelizes over shots (aesthetic) and videos (postings) with a
    deterministic merge; any thread count produces the same index bytes.
    """
    cfg = config if config is not None else EngineConfig()
    report = BuildReport()
    videos = [v.video_id for v in dataset.videos]
    video_idx = {vid: i for i, vid in enumerate(videos)}

    all_shots = dataset.all_shots()

    def _aes(shot) -> tuple[int, float]:
        phi = phi_from_blocks(dataset.blocks[shot.shot_id], cfg)
        if phi_cache_dir is not None:
            write_tensor_file(Path(phi_cache_dir) / f"{shot.shot_id}.phi.tnsr", phi)
        return shot.shot_id, float(np.float32(rank_score(rank_model, phi)))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            aes_pairs = list(pool.map(_aes, all_shots))
    else:
        aes_pairs = [_aes(s) for s in all_shots]
    aesthetic = dict(sorted(aes_pairs))

    lemma_to_category, _ = map_dataset_lemmas(dataset, report)

    def _video_postings(video_id: str) -> tuple[dict[str, dict[int, float]], list[int]]:
        """lemma -> shot_id -> max confirmation, plus skip counters."""
        acc: dict[str, dict[int, float]] = {}
        counters = [0, 0, 0, 0]  # total, unmapped, no-classifier, no-candidates
        shots = dataset.shots[video_id]
        for token in dataset.tokens[video_id]:
            counters[0] += 1
            category = lemma_to_category.get(token.lemma)
            if category is None:
                counters[1] += 1
                continue
            clf = classifiers.get(category)
            if clf is None:
                counters[2] += 1
                continue
            near = concepts.candidate_shots(token.t, shots, cfg)
            if not near:
                counters[3] += 1
                continue
            per_shot = acc.setdefault(token.lemma, {})
            for shot in near:
                p = visual_confirmation(clf, shot, dataset.fc6.get(shot.shot_id), token.t, cfg)
                p32 = float(np.float32(p))
                prev = per_shot.get(shot.shot_id)
                if prev is None or p32 > prev:
                    per_shot[shot.shot_id] = p32
        return acc, counters

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_video = list(pool.map(_video_postings, videos))
    else:
        per_video = [_video_postings(vid) for vid in videos]

    postings: dict[str, list[Posting]] = {}
    for vid, (acc, counters) in zip(videos, per_video):
        report.tokens_total += counters[0]
        report.tokens_unmapped_lemma += counters[1]
        report.tokens_no_classifier += counters[2]
        report.tokens_no_candidates += counters[3]
        for lemma, per_shot in acc.items():
            lst = postings.setdefault(lemma, [])
            for shot_id, p in per_shot.items():
                lst.append(Posting(video_idx[vid], dataset.scene_id_of_shot[shot_id], shot_id, p))
    for lemma in postings:
        postings[lemma].sort(key=lambda po: (po.video_idx, po.scene_id, po.shot_id))
    postings = {lemma: postings[lemma] for lemma in sorted(postings)}

    vocabulary = {
        lemma: dataset.embedding[lemma].astype(np.float32) for lemma in postings
    }
    report.lemmas_indexed = len(postings)
    return Index(videos, vocabulary, postings, aesthetic), report


def save_index(path: str | Path, index: Index) -> None:
    header = {
        "videos": index.videos,
        "lemmas": list(index.postings),
        "vectors": {lemma: tensor_to_base64(vec) for lemma, vec in index.vocabulary.items()},
        "n_aesthetic": len(index.aesthetic),
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    parts = [INDEX_MAGIC, np.asarray([len(blob)], dtype=_LEN).tobytes(), blob]
    for lemma in index.postings:
        plist = index.postings[lemma]
        parts.append(np.asarray([len(plist)], dtype=_COUNT).tobytes())
        rec = np.zeros(len(plist), dtype=_POSTING_DTYPE)
        for i, po in enumerate(plist):
            rec[i] = (po.video_idx, po.scene_id, po.shot_id, po.p)
        parts.append(rec.tobytes())
    aes_items = sorted(index.aesthetic.items())
    parts.append(np.asarray([len(aes_items)], dtype=_COUNT).tobytes())
    rec = np.zeros(len(aes_items), dtype=_AES_DTYPE)
    for i, (shot_id, score) in enumerate(aes_items):
        rec[i] = (shot_id, score)
    parts.append(rec.tobytes())
    Path(path).write_bytes(b"".join(parts))


def load_index(path: str | Path) -> Index:
    path = Path(path)
    if not path.exists():
        raise IndexError_("index-missing", f"no index at {path}; run build-index first")
    data = path.read_bytes()
    if len(data) < 16 or data[:8] != INDEX_MAGIC:
        raise IndexError_("bad-index", f"{path}: not an index file")
    hdr_len = int(np.frombuffer(data, dtype=_LEN, count=1, offset=8)[0])
    off = 16 + hdr_len
    if len(data) < off:
        raise IndexError_("bad-index", f"{path}: truncated header")
    try:
        header = json.loads(data[16:off].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise IndexError_("bad-index", f"{path}: bad header: {exc}") from None

    videos = list(header["videos"])
    postings: dict[str, list[Posting]] = {}
    for lemma in header["lemmas"]:
        if len(data) < off + 4:
            raise IndexError_("bad-index", f"{path}: truncated postings")
        count = int(np.frombuffer(data, dtype=_COUNT, count=1, offset=off)[0])
        off += 4
        end = off + count * _POSTING_DTYPE.itemsize
        if len(data) < end:
            raise IndexError_("bad-index", f"{path}: truncated postings for {lemma!r}")
        rec = np.frombuffer(data, dtype=_POSTING_DTYPE, count=count, offset=off)
        postings[lemma] = [
            Posting(int(r["video"]), int(r["scene"]), int(r["shot"]), float(r["p"])) for r in rec
        ]
        off = end
    if len(data) < off + 4:
        raise IndexError_("bad-index", f"{path}: truncated aesthetic table")
    count = int(np.frombuffer(data, dtype=_COUNT, count=1, offset=off)[0])
    off += 4
    end = off + count * _AES_DTYPE.itemsize
    if len(data) != end:
        raise IndexError_("bad-index", f"{path}: expected {end} bytes, got {len(data)}")
    rec = np.frombuffer(data, dtype=_AES_DTYPE, count=count, offset=off)
    aesthetic = {int(r["shot"]): float(r["score"]) for r in rec}
    vocabulary = {
        lemma: tensor_from_base64(header["vectors"][lemma]) for lemma in header["lemmas"]
    }
    return Index(videos, vocabulary, postings, aesthetic)


def _blend_over_scene(
    scene: Scene, sem_by_shot: Mapping[int, float], aesthetic: Mapping[int, float], alpha: float
) -> tuple[float, int]:
    """Max over the scene's shots of the alpha blend; ties keep the first shot."""
    best = -np.inf
    best_shot = scene.shot_span[0]
    for shot_id in scene.shot_ids():
        sem = sem_by_shot.get(shot_id, 0.0)
        blend = alpha * sem + (1.0 - alpha) * aesthetic[shot_id]
        if blend > best:
            best = blend
            best_shot = shot_id
    return float(best), best_shot


def _aes_argmax(scene: Scene, aesthetic: Mapping[int, float]) -> int:
    best = -np.inf
    best_shot = scene.shot_span[0]
    for shot_id in scene.shot_ids():
        if aesthetic[shot_id] > best:
            best = aesthetic[shot_id]
            best_shot = shot_id
    return best_shot


def score_scene(dataset: Dataset, index: Index, scene_id: int, lemma: str, alpha: float) -> float:
    """Blended scene relevance for one already-matched concept."""
    scene = dataset.scene_by_id[scene_id]
    sem = {p.shot_id: p.p for p in index.postings.get(lemma, ()) if p.scene_id == scene_id}
    return _blend_over_scene(scene, sem, index.aesthetic, alpha)[0]


def tokenize_query(text: str) -> list[str]:
    return [w.strip(string.punctuation) for w in text.lower().split() if w.strip(string.punctuation)]


def query(
    dataset: Dataset,
    index: Index,
    text: str,
    alpha: float = 0.5,
    k: int = 10,
    include_unmatched: bool = False,
    thumbnail_mode: str = "aesthetic",
) -> QueryResult:
    """Answer a textual query with ranked (video, scene, thumbnail) triplets.

    The query embeds to the most similar indexed lemma; scenes containing at
    least one confirmation of that lemma are scored and sorted (descending
    score, then ascending video and scene id). ``include_unmatched`` scores
    every scene instead, letting purely aesthetic scenes surface.
    ``thumbnail_mode`` is "aesthetic" (keyframe with the best precomputed
    aesthetic score in the scene) or "blended" (keyframe of the shot that
    maximized the blend).
    """
    if thumbnail_mode not in ("aesthetic", "blended"):
        raise ValueError(f"unknown thumbnail_mode {thumbnail_mode!r}")
    words = tokenize_query(text)
    if not words:
        raise EmbeddingError("unknown-query", "query has no words")
    qvec = embed_query(words, dataset.embedding)
    concept = match_query_to_concept(qvec, index.vocabulary)

    by_scene: dict[int, dict[int, float]] = {}
    for p in index.postings.get(concept, ()):
        by_scene.setdefault(p.scene_id, {})[p.shot_id] = p.p
    if include_unmatched:
        candidates = [sc.scene_id for sc in dataset.all_scenes()]
    else:
        candidates = sorted(by_scene)

    scored = []
    for scene_id in candidates:
        scene = dataset.scene_by_id[scene_id]
        r, blend_shot = _blend_over_scene(scene, by_scene.get(scene_id, {}), index.aesthetic, alpha)
        thumb = blend_shot if thumbnail_mode == "blended" else _aes_argmax(scene, index.aesthetic)
        scored.append((r, scene.video_id, scene_id, thumb))
    scored.sort(key=lambda row: (-row[0], row[1], row[2]))

    hits = [
        QueryHit(rank=i + 1, video_id=vid, scene_id=scene_id, shot_id=thumb, score=r, concept=concept)
        for i, (r, vid, scene_id, thumb) in enumerate(scored[: max(k, 0)])
    ]
    return QueryResult(query=text, concept=concept, hits=hits)


def evaluate_retrieval(
    dataset: Dataset,
    index: Index,
    queries: Sequence[str],
    alpha: float = 0.5,
    k: int = 10,
    include_unmatched: bool = False,
    thumbnail_mode: str = "aesthetic",
) -> list[dict]:
    """Batch the query pipeline; one header row per query, then its hits."""
    feature_dir = {v.video_id: v.keyframe_feature_dir for v in dataset.videos}
    rows: list[dict] = []
    for q in queries:
        try:
            result = query(dataset, index, q, alpha, k, include_unmatched, thumbnail_mode)
        except EmbeddingError as exc:
            rows.append({"query": q, "error": exc.code, "results": 0})
            continue
        rows.append({"query": q, "concept": result.concept, "results": len(result.hits)})
        for hit in result.hits:
            row = hit.as_dict()
            row["query"] = q
            row["thumbnail"] = str(feature_dir[hit.video_id] / str(hit.shot_id))
            rows.append(row)
    return rows
