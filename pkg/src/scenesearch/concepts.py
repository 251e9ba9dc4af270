"""Per-concept probabilistic linear classifiers and visual confirmation.

For every corpus category that some transcript unigram maps to, a linear
SVM is trained on the category's exemplar features against negatives
sampled from the other categories, then calibrated with a Platt sigmoid so
its output is a probability. A unigram u spoken at time t_u is *visually
confirmed* in a shot s with middle time t_s with probability

    P(s, u) = f(s) * exp(-(t_u - t_s)^2 / (2 sigma_a^2))

where f(s) is the calibrated classifier probability on the shot's keyframe.
Shots farther than the candidate window (default 3 sigma_a, where the
weight is below 0.012) are never classified.
"""

from __future__ import annotations

import hashlib
import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .config import EngineConfig
from .dataset import Shot
from .errors import FeatureError, TrainingError
from .svm import hinge_objective, train_linear_svm
from .tensorio import read_jsonl, tensor_from_base64, tensor_to_base64, write_jsonl

# Platt probabilities are clamped inside the open interval (0, 1).
_P_MIN = 1e-300
_P_MAX = 1.0 - 1e-16


@dataclass(frozen=True)
class ConceptClassifier:
    """Linear weights over keyframe features plus Platt calibration.

    Parameters are float32-rounded at construction so an instance is
    bit-identical to its serialized form.
    """

    category_id: str
    w: np.ndarray
    b: float
    platt_a: float
    platt_b: float
    train_seed: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "w", np.asarray(self.w, dtype=np.float32))
        object.__setattr__(self, "b", float(np.float32(self.b)))
        if not np.isfinite(self.w).all() or not math.isfinite(self.b):
            raise TrainingError("bad-classifier", f"{self.category_id}: non-finite parameters")
        if not (math.isfinite(self.platt_a) and math.isfinite(self.platt_b)):
            raise TrainingError("bad-classifier", f"{self.category_id}: non-finite calibration")

    def decision(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.w.shape[0],):
            raise FeatureError(
                "bad-features",
                f"expected feature dims [{self.w.shape[0]}], got {list(x.shape)}",
            )
        return float(x @ self.w.astype(np.float64) + self.b)


def platt_probability(score, a: float, b: float):
    """1 / (1 + exp(a*score + b)), computed stably, strictly inside (0, 1)."""
    z = a * np.asarray(score, dtype=np.float64) + b
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = np.exp(-z[pos]) / (1.0 + np.exp(-z[pos]))
    out[~pos] = 1.0 / (1.0 + np.exp(z[~pos]))
    return np.clip(out, _P_MIN, _P_MAX)


def fit_platt(scores: Sequence[float], labels: Sequence[int]) -> tuple[float, float]:
    """Fit sigmoid parameters (A, B) mapping scores to probabilities.

    Newton iterations with backtracking on the cross-entropy against the
    smoothed targets (n+ + 1)/(n+ + 2) and 1/(n- + 2); capped at 100
    iterations, gradient tolerance 1e-10. A comes out negative whenever
    higher scores indicate the positive class.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    pos = y > 0
    n_pos = int(pos.sum())
    n_neg = int(len(y) - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise TrainingError("single-class", "calibration needs both classes present")

    hi = (n_pos + 1.0) / (n_pos + 2.0)
    lo = 1.0 / (n_neg + 2.0)
    t = np.where(pos, hi, lo)

    def objective(a: float, b: float) -> float:
        z = a * s + b
        # t*z + log(1 + exp(-z)), rewritten per sign so exp never overflows.
        return float(
            np.sum(np.where(z >= 0, t * z + np.log1p(np.exp(-np.abs(z))),
                            (t - 1.0) * z + np.log1p(np.exp(-np.abs(z)))))
        )

    a, b = 0.0, math.log((n_neg + 1.0) / (n_pos + 1.0))
    fval = objective(a, b)
    sigma = 1e-12  # Hessian ridge
    for _ in range(100):
        z = a * s + b
        p = platt_probability(s, a, b)
        d2 = p * (1.0 - p)
        h11 = float(np.sum(s * s * d2)) + sigma
        h22 = float(np.sum(d2)) + sigma
        h21 = float(np.sum(s * d2))
        d1 = t - p
        g1 = float(np.sum(s * d1))
        g2 = float(np.sum(d1))
        if abs(g1) < 1e-10 and abs(g2) < 1e-10:
            break
        det = h11 * h22 - h21 * h21
        da = -(h22 * g1 - h21 * g2) / det
        db = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * da + g2 * db
        step = 1.0
        while step >= 1e-10:
            na, nb = a + step * da, b + step * db
            nf = objective(na, nb)
            if nf < fval + 1e-4 * step * gd:
                a, b, fval = na, nb, nf
                break
            step /= 2.0
        else:
            break  # line search exhausted; current point is the answer
    return a, b


def derive_seed(master_seed: int, category_id: str) -> int:
    """Stable per-category seed so categories can train in any order."""
    digest = hashlib.sha256(f"{master_seed}:{category_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def train_concept_classifier(
    category_id: str,
    positives: np.ndarray,
    negative_pool: np.ndarray,
    config: EngineConfig,
    seed: int,
) -> ConceptClassifier:
    """Train one calibrated concept classifier.

    Negatives are drawn from the pool without replacement by a PRNG seeded
    with ``seed``; given the same inputs and seed the result is
    bit-identical. The achieved SVM objective is checked against the w=0
    bound C*N as a solver sanity guarantee.
    """
    positives = np.asarray(positives, dtype=np.float64)
    negative_pool = np.asarray(negative_pool, dtype=np.float64)
    if positives.ndim != 2 or positives.shape[0] < 2:
        raise TrainingError("too-few-positives", f"{category_id}: need >= 2 positives")
    n_neg = math.ceil(config.neg_ratio * positives.shape[0])
    if negative_pool.ndim != 2 or negative_pool.shape[0] < n_neg:
        raise TrainingError(
            "insufficient-pool",
            f"{category_id}: need {n_neg} negatives, pool has {len(negative_pool)}",
        )
    rng = np.random.default_rng(seed)
    chosen = rng.choice(negative_pool.shape[0], size=n_neg, replace=False)
    negatives = negative_pool[np.sort(chosen)]

    X = np.vstack([positives, negatives])
    if np.ptp(X, axis=0).max() == 0.0:
        raise TrainingError("degenerate-training-set", f"{category_id}: all features identical")
    y = np.concatenate([np.ones(positives.shape[0]), -np.ones(n_neg)])
    # Bias handled by a constant feature; the bias is regularized with w.
    X_aug = np.hstack([X, np.ones((X.shape[0], 1))])
    w_aug = train_linear_svm(X_aug, y, config.svm_c_concept)

    achieved = hinge_objective(w_aug, X_aug, y, config.svm_c_concept)
    bound = config.svm_c_concept * len(y)
    if achieved > bound * (1.0 + 1e-9) + 1e-9:
        raise TrainingError(
            "solver-regression", f"{category_id}: objective {achieved} exceeds w=0 bound {bound}"
        )

    w32 = w_aug.astype(np.float32)
    w, b = w32[:-1], float(w32[-1])
    scores = X @ w.astype(np.float64) + b
    a_platt, b_platt = fit_platt(scores, y)
    return ConceptClassifier(category_id, w, b, a_platt, b_platt, int(seed))


def classifier_probability(clf: ConceptClassifier, x: np.ndarray) -> float:
    """Calibrated probability that the classifier's concept is present in x."""
    return float(platt_probability(clf.decision(x), clf.platt_a, clf.platt_b))


def temporal_weight(t_u: float, t_s: float, sigma_a: float) -> float:
    """Gaussian discount exp(-(t_u - t_s)^2 / (2 sigma_a^2)); symmetric."""
    if not sigma_a > 0:
        raise ValueError(f"sigma_a must be > 0, got {sigma_a}")
    d = t_u - t_s
    return math.exp(-(d * d) / (2.0 * sigma_a * sigma_a))


def candidate_shots(t_u: float, shots: Sequence[Shot], config: EngineConfig) -> list[Shot]:
    """Shots whose middle time lies within the candidate window of t_u.

    Binary search over the (sorted) middle times; boundaries inclusive.
    """
    mids = [s.t_mid for s in shots]
    lo = bisect_left(mids, t_u - config.window)
    hi = bisect_right(mids, t_u + config.window)
    return list(shots[lo:hi])


def visual_confirmation(
    clf: ConceptClassifier,
    shot: Shot,
    keyframe_fc6: np.ndarray | None,
    t_u: float,
    config: EngineConfig,
) -> float:
    """Probability that the concept is visually confirmed in the shot."""
    if keyframe_fc6 is None:
        raise FeatureError("missing-features", f"shot {shot.shot_id} has no keyframe features")
    p = classifier_probability(clf, keyframe_fc6)
    return p * temporal_weight(t_u, shot.t_mid, config.sigma_a)


def save_classifiers(path: str | Path, classifiers: Iterable[ConceptClassifier]) -> None:
    """One classifier per JSON line, sorted by category, weights as base64."""
    rows = []
    for clf in sorted(classifiers, key=lambda c: c.category_id):
        rows.append(
            {
                "category_id": clf.category_id,
                "w": tensor_to_base64(clf.w),
                "b": clf.b,
                "platt_a": clf.platt_a,
                "platt_b": clf.platt_b,
                "train_seed": clf.train_seed,
            }
        )
    write_jsonl(path, rows)


def load_classifiers(path: str | Path) -> dict[str, ConceptClassifier]:
    out: dict[str, ConceptClassifier] = {}
    for row in read_jsonl(path):
        clf = ConceptClassifier(
            category_id=str(row["category_id"]),
            w=tensor_from_base64(row["w"]),
            b=float(row["b"]),
            platt_a=float(row["platt_a"]),
            platt_b=float(row["platt_b"]),
            train_seed=int(row["train_seed"]),
        )
        out[clf.category_id] = clf
    return out


def train_all_concepts(
    lemma_to_category: Mapping[str, str],
    categories: Sequence,
    config: EngineConfig,
    master_seed: int,
    threads: int = 1,
) -> dict[str, ConceptClassifier]:
    """Train classifiers for every category targeted by some lemma.

    Training of distinct concepts is independent; with ``threads`` > 1 they
    run on a thread pool, and per-category seeding keeps any schedule
    bit-identical to the sequential one.
    """
    needed = sorted(set(lemma_to_category.values()))
    by_id = {c.category_id: c for c in categories}

    def _train(category_id: str) -> ConceptClassifier:
        cat = by_id[category_id]
        pool = [c.exemplars for c in categories if c.category_id != category_id]
        negative_pool = np.vstack(pool) if pool else np.empty((0, cat.exemplars.shape[1]))
        return train_concept_classifier(
            category_id,
            cat.exemplars,
            negative_pool,
            config,
            derive_seed(master_seed, category_id),
        )

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            trained = list(pool.map(_train, needed))
    else:
        trained = [_train(cid) for cid in needed]
    return {clf.category_id: clf for clf in trained}
