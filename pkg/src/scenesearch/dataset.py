"""Dataset manifest loading, cross-linking and eager validation.

A dataset is one JSON manifest tying videos to their metadata files plus a
shared embedding table and an exemplar-feature corpus:

    {
      "videos": [{"video_id", "transcript_file", "shots_file",
                  "scenes_file", "keyframe_feature_dir"}, ...],
      "embedding_file": "embeddings.tnsr",      # vocab x dim tensor
      "corpus_dir": "corpus"                    # one subdirectory per category
    }

Relative paths resolve against the manifest's directory. Shot/scene/token
files are JSON lines; unknown fields are ignored. Keyframe features live in
``keyframe_feature_dir`` as ``<shot_id>.fc6.tnsr`` (dim 4096) and
``<shot_id>.block<b>.tnsr`` for blocks 1..5. Each corpus category directory
holds ``synset.json`` (``{"words": [...]}``) and ``exemplars.fc6.tnsr``
(``[n, 4096]``).

Validation is eager and exhaustive: every violation found is reported, and
downstream modules may assume all invariants once loading succeeds. The
loaded ``Dataset`` is immutable by convention and safe to share across
threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .embedspace import EmbeddingTable, load_synset_words
from .errors import DatasetValidationError, EmbeddingError, SceneSearchError, TensorFormatError
from .tensorio import read_jsonl, read_tensor_file

FC6_DIM = 4096
BLOCK_COUNT = 5
POS_TAGS = frozenset({"NN", "NNS", "NNP", "NNPS", "FW"})
_U32_MAX = 2**32 - 1


@dataclass(frozen=True)
class Shot:
    shot_id: int
    video_id: str
    t_start: float
    t_end: float

    @property
    def t_mid(self) -> float:
        return (self.t_start + self.t_end) / 2.0


@dataclass(frozen=True)
class Scene:
    scene_id: int
    video_id: str
    shot_span: tuple[int, int]  # inclusive range of shot ids

    def shot_ids(self) -> range:
        return range(self.shot_span[0], self.shot_span[1] + 1)


@dataclass(frozen=True)
class TranscriptToken:
    video_id: str
    t: float
    surface: str
    lemma: str
    pos: str


@dataclass(frozen=True)
class VideoEntry:
    video_id: str
    transcript_file: Path
    shots_file: Path
    scenes_file: Path
    keyframe_feature_dir: Path


@dataclass(frozen=True)
class CorpusCategory:
    category_id: str
    synset_words: tuple[str, ...]
    exemplars: np.ndarray  # [n, 4096] float32


@dataclass
class Dataset:
    """Fully cross-linked, validated dataset. Treat as immutable."""

    manifest_path: Path
    videos: list[VideoEntry]
    shots: dict[str, list[Shot]]  # video_id -> shots sorted by id
    scenes: dict[str, list[Scene]]  # video_id -> scenes sorted by id
    tokens: dict[str, list[TranscriptToken]]  # video_id -> tokens sorted by time
    fc6: dict[int, np.ndarray]  # shot_id -> [4096]
    blocks: dict[int, list[np.ndarray]]  # shot_id -> 5 maps
    embedding: EmbeddingTable
    categories: list[CorpusCategory]
    shot_by_id: dict[int, Shot] = field(default_factory=dict)
    scene_by_id: dict[int, Scene] = field(default_factory=dict)
    scene_id_of_shot: dict[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for shots in self.shots.values():
            for s in shots:
                self.shot_by_id[s.shot_id] = s
        for scenes in self.scenes.values():
            for sc in scenes:
                self.scene_by_id[sc.scene_id] = sc
                for sid in sc.shot_ids():
                    self.scene_id_of_shot[sid] = sc.scene_id

    def all_shots(self) -> list[Shot]:
        return [s for v in self.videos for s in self.shots[v.video_id]]

    def all_scenes(self) -> list[Scene]:
        return [sc for v in self.videos for sc in self.scenes[v.video_id]]

    def all_tokens(self) -> list[TranscriptToken]:
        return [t for v in self.videos for t in self.tokens[v.video_id]]

    def duration(self, video_id: str) -> float:
        shots = self.shots[video_id]
        return shots[-1].t_end if shots else 0.0

    def stats(self) -> list[dict]:
        """Per-video shot/scene/distinct-unigram counts."""
        out = []
        for v in self.videos:
            out.append(
                {
                    "video_id": v.video_id,
                    "shots": len(self.shots[v.video_id]),
                    "scenes": len(self.scenes[v.video_id]),
                    "unigrams": len({t.lemma for t in self.tokens[v.video_id]}),
                }
            )
        return out

    def format_stats(self) -> list[str]:
        return [
            f"{row['video_id']}, {row['shots']}, {row['scenes']}, {row['unigrams']}"
            for row in self.stats()
        ]


def _check_id(value, what: str, errors: list[str]) -> int | None:
    if not isinstance(value, int) or isinstance(value, bool) or not 0 <= value <= _U32_MAX:
        errors.append(f"bad-id: {what} must be an integer in [0, 2^32), got {value!r}")
        return None
    return value


def _load_shots(entry: VideoEntry, errors: list[str]) -> list[Shot]:
    try:
        rows = read_jsonl(entry.shots_file)
    except (OSError, ValueError) as exc:
        errors.append(f"missing-file: shots of {entry.video_id}: {exc}")
        return []
    shots = []
    for i, row in enumerate(rows):
        sid = _check_id(row.get("shot_id"), f"{entry.shots_file}:{i} shot_id", errors)
        if sid is None:
            continue
        try:
            t_start = float(row["t_start"])
            t_end = float(row["t_end"])
        except (KeyError, TypeError, ValueError):
            errors.append(f"bad-shot: {entry.shots_file}:{i}: missing/invalid t_start or t_end")
            continue
        if not t_start < t_end:
            errors.append(
                f"bad-shot: shot {sid} of {entry.video_id}: t_start {t_start} >= t_end {t_end}"
            )
            continue
        shots.append(Shot(sid, entry.video_id, t_start, t_end))
    shots.sort(key=lambda s: s.shot_id)
    ids = [s.shot_id for s in shots]
    if ids and ids != list(range(ids[0], ids[0] + len(ids))):
        errors.append(
            f"bad-shot-ids: shot ids of {entry.video_id} must form a contiguous ascending range"
        )
    by_time = sorted(shots, key=lambda s: s.t_start)
    if by_time != shots:
        errors.append(f"bad-shot: shots of {entry.video_id} not sorted by time in id order")
    for a, b in zip(shots, shots[1:]):
        if a.t_end > b.t_start:
            errors.append(
                f"bad-shot: shots {a.shot_id} and {b.shot_id} of {entry.video_id} overlap"
            )
    return shots


def _load_scenes(entry: VideoEntry, shots: list[Shot], errors: list[str]) -> list[Scene]:
    try:
        rows = read_jsonl(entry.scenes_file)
    except (OSError, ValueError) as exc:
        errors.append(f"missing-file: scenes of {entry.video_id}: {exc}")
        return []
    scenes = []
    for i, row in enumerate(rows):
        cid = _check_id(row.get("scene_id"), f"{entry.scenes_file}:{i} scene_id", errors)
        if cid is None:
            continue
        span = row.get("shot_span")
        if (
            not isinstance(span, list)
            or len(span) != 2
            or not all(isinstance(x, int) and not isinstance(x, bool) for x in span)
        ):
            errors.append(f"bad-scene: scene {cid} of {entry.video_id}: shot_span must be [first, last]")
            continue
        first, last = span
        if first > last:
            errors.append(f"bad-scene: scene {cid} of {entry.video_id}: empty span {span}")
            continue
        scenes.append(Scene(cid, entry.video_id, (first, last)))
    scenes.sort(key=lambda sc: sc.scene_id)
    if shots:
        covered: dict[int, int] = {}
        for sc in scenes:
            for sid in sc.shot_ids():
                if sid in covered:
                    errors.append(
                        f"bad-partition: shot {sid} of {entry.video_id} in scenes "
                        f"{covered[sid]} and {sc.scene_id}"
                    )
                covered[sid] = sc.scene_id
        shot_ids = {s.shot_id for s in shots}
        missing = sorted(shot_ids - set(covered))
        extra = sorted(set(covered) - shot_ids)
        if missing:
            errors.append(f"bad-partition: shots {missing} of {entry.video_id} not in any scene")
        if extra:
            errors.append(f"bad-partition: scene spans of {entry.video_id} reference unknown shots {extra}")
    return scenes


def _load_tokens(entry: VideoEntry, duration: float, errors: list[str]) -> list[TranscriptToken]:
    try:
        rows = read_jsonl(entry.transcript_file)
    except (OSError, ValueError) as exc:
        errors.append(f"missing-file: transcript of {entry.video_id}: {exc}")
        return []
    tokens = []
    for i, row in enumerate(rows):
        where = f"{entry.transcript_file}:{i}"
        try:
            t = float(row["t"])
            surface = str(row["surface"])
            lemma = row["lemma"]
            pos = row["pos"]
        except (KeyError, TypeError, ValueError):
            errors.append(f"bad-token: {where}: missing/invalid fields")
            continue
        if not isinstance(lemma, str) or not lemma or lemma != lemma.lower():
            errors.append(f"bad-token: {where}: lemma must be non-empty lowercase, got {lemma!r}")
            continue
        if pos not in POS_TAGS:
            errors.append(f"bad-token: {where}: pos {pos!r} not in {sorted(POS_TAGS)}")
            continue
        if not 0.0 <= t <= duration:
            errors.append(f"bad-token: {where}: t={t} outside [0, {duration}]")
            continue
        tokens.append(TranscriptToken(entry.video_id, t, surface, lemma, pos))
    tokens.sort(key=lambda tok: (tok.t, tok.lemma, tok.surface))
    return tokens


def _load_keyframes(
    entry: VideoEntry, shots: list[Shot], errors: list[str]
) -> tuple[dict[int, np.ndarray], dict[int, list[np.ndarray]]]:
    fc6: dict[int, np.ndarray] = {}
    blocks: dict[int, list[np.ndarray]] = {}
    for shot in shots:
        fc6_path = entry.keyframe_feature_dir / f"{shot.shot_id}.fc6.tnsr"
        try:
            vec = read_tensor_file(fc6_path)
            if vec.shape != (FC6_DIM,):
                errors.append(
                    f"bad-features: {fc6_path}: expected dims [{FC6_DIM}], got {list(vec.shape)}"
                )
            else:
                fc6[shot.shot_id] = vec
        except TensorFormatError as exc:
            errors.append(f"{exc.code}: {exc.message}")
        maps = []
        for b in range(1, BLOCK_COUNT + 1):
            bpath = entry.keyframe_feature_dir / f"{shot.shot_id}.block{b}.tnsr"
            try:
                m = read_tensor_file(bpath)
                if m.ndim != 2:
                    errors.append(f"bad-features: {bpath}: block map must be rank 2")
                else:
                    maps.append(m)
            except TensorFormatError as exc:
                errors.append(f"{exc.code}: {exc.message}")
        if len(maps) == BLOCK_COUNT:
            blocks[shot.shot_id] = maps
    return fc6, blocks


def _load_corpus(corpus_dir: Path, errors: list[str]) -> list[CorpusCategory]:
    if not corpus_dir.is_dir():
        errors.append(f"missing-file: corpus_dir {corpus_dir} is not a directory")
        return []
    categories = []
    for sub in sorted(p for p in corpus_dir.iterdir() if p.is_dir()):
        synset_path = sub / "synset.json"
        exemplar_path = sub / "exemplars.fc6.tnsr"
        try:
            words = load_synset_words(synset_path)
        except (OSError, EmbeddingError, json.JSONDecodeError) as exc:
            errors.append(f"bad-synset: category {sub.name}: {exc}")
            continue
        try:
            feats = read_tensor_file(exemplar_path)
        except TensorFormatError as exc:
            errors.append(f"{exc.code}: {exc.message}")
            continue
        if feats.ndim != 2 or feats.shape[1] != FC6_DIM or feats.shape[0] < 1:
            errors.append(
                f"bad-features: {exemplar_path}: expected dims [n>=1, {FC6_DIM}], "
                f"got {list(feats.shape)}"
            )
            continue
        categories.append(CorpusCategory(sub.name, tuple(words), feats))
    if not categories:
        errors.append(f"bad-corpus: no usable categories under {corpus_dir}")
    return categories


def load_dataset(manifest_path: str | Path) -> Dataset:
    """Load and validate a dataset; raises listing every violation found."""
    manifest_path = Path(manifest_path)
    try:
        with open(manifest_path, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DatasetValidationError([f"missing-file: manifest {manifest_path}: {exc}"]) from None

    errors: list[str] = []
    base = manifest_path.parent
    entries: list[VideoEntry] = []
    raw_videos = manifest.get("videos")
    if not isinstance(raw_videos, list) or not raw_videos:
        errors.append("bad-manifest: manifest must list at least one video")
        raw_videos = []
    for i, raw in enumerate(raw_videos):
        try:
            entries.append(
                VideoEntry(
                    video_id=str(raw["video_id"]),
                    transcript_file=base / raw["transcript_file"],
                    shots_file=base / raw["shots_file"],
                    scenes_file=base / raw["scenes_file"],
                    keyframe_feature_dir=base / raw["keyframe_feature_dir"],
                )
            )
        except (KeyError, TypeError) as exc:
            errors.append(f"bad-manifest: videos[{i}]: missing field {exc}")
    entries.sort(key=lambda e: e.video_id)
    seen_videos: set[str] = set()
    for e in entries:
        if e.video_id in seen_videos:
            errors.append(f"duplicate-id: video_id {e.video_id!r} appears twice")
        seen_videos.add(e.video_id)

    shots: dict[str, list[Shot]] = {}
    scenes: dict[str, list[Scene]] = {}
    tokens: dict[str, list[TranscriptToken]] = {}
    fc6: dict[int, np.ndarray] = {}
    blocks: dict[int, list[np.ndarray]] = {}
    seen_shot_ids: dict[int, str] = {}
    seen_scene_ids: dict[int, str] = {}
    for entry in entries:
        v_shots = _load_shots(entry, errors)
        v_scenes = _load_scenes(entry, v_shots, errors)
        duration = v_shots[-1].t_end if v_shots else 0.0
        v_tokens = _load_tokens(entry, duration, errors)
        for s in v_shots:
            if s.shot_id in seen_shot_ids:
                errors.append(
                    f"duplicate-id: shot {s.shot_id} in both "
                    f"{seen_shot_ids[s.shot_id]!r} and {entry.video_id!r}"
                )
            seen_shot_ids[s.shot_id] = entry.video_id
        for sc in v_scenes:
            if sc.scene_id in seen_scene_ids:
                errors.append(
                    f"duplicate-id: scene {sc.scene_id} in both "
                    f"{seen_scene_ids[sc.scene_id]!r} and {entry.video_id!r}"
                )
            seen_scene_ids[sc.scene_id] = entry.video_id
        v_fc6, v_blocks = _load_keyframes(entry, v_shots, errors)
        shots[entry.video_id] = v_shots
        scenes[entry.video_id] = v_scenes
        tokens[entry.video_id] = v_tokens
        fc6.update(v_fc6)
        blocks.update(v_blocks)

    embedding = None
    emb_rel = manifest.get("embedding_file")
    if not isinstance(emb_rel, str):
        errors.append("bad-manifest: manifest must name an embedding_file")
    else:
        emb_path = base / emb_rel
        try:
            embedding = EmbeddingTable.load(emb_path, EmbeddingTable.vocab_path_for(emb_path))
        except (SceneSearchError, OSError, ValueError) as exc:
            errors.append(f"bad-embedding: {exc}")

    categories: list[CorpusCategory] = []
    corpus_rel = manifest.get("corpus_dir")
    if not isinstance(corpus_rel, str):
        errors.append("bad-manifest: manifest must name a corpus_dir")
    else:
        categories = _load_corpus(base / corpus_rel, errors)

    if errors:
        raise DatasetValidationError(errors)
    assert embedding is not None
    return Dataset(
        manifest_path=manifest_path,
        videos=entries,
        shots=shots,
        scenes=scenes,
        tokens=tokens,
        fc6=fc6,
        blocks=blocks,
        embedding=embedding,
        categories=categories,
    )
