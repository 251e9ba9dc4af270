"""Pairwise ranking of keyframes by aesthetic quality.

Annotator vote counts become strict preference pairs within each scene; a
linear model w is fit on standardized feature differences by minimizing

    1/2 ||w||^2 + C * sum max(0, 1 - w.(phi_hat(better) - phi_hat(worse)))

which is the linear-SVM hinge problem on pairwise difference vectors, so it
shares the deterministic solver in :mod:`scenesearch.svm`. Features are
standardized because block means and stds differ by orders of magnitude;
the standardization stats live inside the model so scoring is
self-contained. The evaluation metric is the percentage of ground-truth
pairs the model orders incorrectly, ties counting as incorrect.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import FeatureError, TrainingError
from .svm import hinge_objective, train_linear_svm
from .tensorio import read_jsonl, tensor_from_base64, tensor_to_base64


@dataclass(frozen=True)
class PreferencePair:
    scene_id: int
    better: int  # keyframe (shot) id annotated as more representative
    worse: int

    def __post_init__(self) -> None:
        if self.better == self.worse:
            raise TrainingError("bad-pair", f"scene {self.scene_id}: pair of a keyframe with itself")


@dataclass(frozen=True)
class RankModel:
    """Ranking weights plus the feature standardization that produced them.

    Array parameters are float32-rounded at construction to match the
    on-disk representation bit for bit.
    """

    w: np.ndarray
    feature_mean: np.ndarray
    feature_std: np.ndarray
    c: float
    objective_value: float

    def __post_init__(self) -> None:
        for name in ("w", "feature_mean", "feature_std"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float32))
        if not (
            np.isfinite(self.w).all()
            and np.isfinite(self.feature_mean).all()
            and np.isfinite(self.feature_std).all()
            and math.isfinite(self.objective_value)
        ):
            raise TrainingError("bad-model", "non-finite ranking model parameters")
        if not (self.feature_std > 0).all():
            raise TrainingError("bad-model", "feature_std must be strictly positive")

    def standardize(self, phi: np.ndarray) -> np.ndarray:
        phi = np.asarray(phi, dtype=np.float64)
        return (phi - self.feature_mean.astype(np.float64)) / self.feature_std.astype(np.float64)


def pairs_from_votes(votes: Mapping[int, Mapping[int, int]]) -> list[PreferencePair]:
    """One (better, worse) pair per strict within-scene vote difference.

    ``votes`` maps scene_id -> {keyframe_id: vote count}. Equal counts
    produce no pair; a scene may contribute none at all.
    """
    pairs: list[PreferencePair] = []
    for scene_id in sorted(votes):
        sheet = votes[scene_id]
        for d_i in sorted(sheet):
            for d_j in sorted(sheet):
                if d_i == d_j:
                    continue
                v_i, v_j = sheet[d_i], sheet[d_j]
                if v_i < 0 or v_j < 0:
                    raise TrainingError("bad-votes", f"scene {scene_id}: negative vote count")
                if v_i > v_j:
                    pairs.append(PreferencePair(scene_id, d_i, d_j))
    return pairs


def load_votes(path: str | Path) -> dict[int, dict[int, int]]:
    """Vote sheet rows {scene_id, shot_id, votes} grouped by scene."""
    votes: dict[int, dict[int, int]] = {}
    for row in read_jsonl(path):
        scene_id = int(row["scene_id"])
        shot_id = int(row["shot_id"])
        count = int(row["votes"])
        if count < 0:
            raise TrainingError("bad-votes", f"scene {scene_id} shot {shot_id}: negative votes")
        votes.setdefault(scene_id, {})[shot_id] = count
    return votes


def _referenced_phis(
    pairs: Sequence[PreferencePair], phi_lookup: Mapping[int, np.ndarray]
) -> tuple[list[int], np.ndarray]:
    keyframes = sorted({k for p in pairs for k in (p.better, p.worse)})
    missing = [k for k in keyframes if k not in phi_lookup]
    if missing:
        raise FeatureError("missing-features", f"no phi for keyframes {missing}")
    return keyframes, np.asarray([phi_lookup[k] for k in keyframes], dtype=np.float64)


def fit_preference_weights(diffs: np.ndarray, c: float) -> tuple[np.ndarray, float]:
    """Core ranking optimization on (better - worse) difference vectors.

    Minimizes 1/2 ||w||^2 + c * sum max(0, 1 - w.diff) and returns (w,
    achieved objective). This is the whole learning problem once features
    are standardized and differenced; :func:`train_rank` wraps it.
    """
    diffs = np.atleast_2d(np.asarray(diffs, dtype=np.float64))
    if diffs.shape[0] == 0:
        raise TrainingError("no-pairs", "no difference vectors to fit")
    labels = np.ones(diffs.shape[0])
    w = train_linear_svm(diffs, labels, c)
    return w, hinge_objective(w, diffs, labels, c)


def train_rank(
    pairs: Sequence[PreferencePair], phi_lookup: Mapping[int, np.ndarray], c: float
) -> RankModel:
    """Fit the ranking weights on standardized pairwise differences."""
    if not pairs:
        raise TrainingError("no-pairs", "cannot train a ranking model without preference pairs")
    keyframes, phis = _referenced_phis(pairs, phi_lookup)
    mean = phis.mean(axis=0)
    # Population std; exactly-constant components are detected by value
    # range (not by the rounded variance) and standardize to 0 via std=1.
    std = phis.std(axis=0)
    constant = np.ptp(phis, axis=0) == 0.0
    std[constant] = 1.0
    if (std <= 0.0).any():
        std[std <= 0.0] = 1.0
    standardized = (phis - mean) / std
    row_of = {k: i for i, k in enumerate(keyframes)}
    diffs = np.stack(
        [standardized[row_of[p.better]] - standardized[row_of[p.worse]] for p in pairs]
    )
    w, _ = fit_preference_weights(diffs, c)
    w32 = w.astype(np.float32).astype(np.float64)
    objective = hinge_objective(w32, diffs, np.ones(len(pairs)), c)
    return RankModel(w=w32, feature_mean=mean, feature_std=std, c=float(c), objective_value=objective)


def rank_score(model: RankModel, phi: np.ndarray) -> float:
    """w . standardized(phi); higher means a more representative thumbnail."""
    return float(model.w.astype(np.float64) @ model.standardize(phi))


def swapped_pairs_pct(
    model: RankModel, pairs: Sequence[PreferencePair], phi_lookup: Mapping[int, np.ndarray]
) -> float:
    """Percentage of ground-truth pairs ordered incorrectly; ties count."""
    if not pairs:
        raise TrainingError("no-pairs", "swapped-pairs metric needs at least one pair")
    keyframes, phis = _referenced_phis(pairs, phi_lookup)
    scores = {k: rank_score(model, phis[i]) for i, k in enumerate(keyframes)}
    swapped = sum(1 for p in pairs if scores[p.better] <= scores[p.worse])
    return 100.0 * swapped / len(pairs)


def save_rank_model(path: str | Path, model: RankModel) -> None:
    doc = {
        "w": tensor_to_base64(model.w),
        "feature_mean": tensor_to_base64(model.feature_mean),
        "feature_std": tensor_to_base64(model.feature_std),
        "c": model.c,
        "objective_value": model.objective_value,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_rank_model(path: str | Path) -> RankModel:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return RankModel(
        w=tensor_from_base64(doc["w"]),
        feature_mean=tensor_from_base64(doc["feature_mean"]),
        feature_std=tensor_from_base64(doc["feature_std"]),
        c=float(doc["c"]),
        objective_value=float(doc["objective_value"]),
    )
