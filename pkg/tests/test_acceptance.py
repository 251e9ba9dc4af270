"""Acceptance suite: one test per release criterion, at pinned tolerances.

Runs entirely on generated or hand-crafted fixtures; no external data or
models. Each test prints a PASS line (visible with ``pytest -s``) after its
assertions hold. Criteria with runtime budgets assert wall-clock time too.
"""

from __future__ import annotations

import math
import struct
import time

import numpy as np
import pytest

from helpers import constant_blocks, planted_classifier, unit_fc6, write_dataset
from oracles import (
    brute_swapped_pct,
    grid_min_objective,
    naive_bilinear,
    scan_aesthetic,
    scan_confirmations,
    scan_ranking,
    svm_objective,
)
from scenesearch import cli
from scenesearch.aesrank import (
    RankModel,
    fit_preference_weights,
    pairs_from_votes,
    rank_score,
    swapped_pairs_pct,
    train_rank,
)
from scenesearch.concepts import (
    classifier_probability,
    fit_platt,
    temporal_weight,
    train_concept_classifier,
    visual_confirmation,
)
from scenesearch.config import EngineConfig
from scenesearch.dataset import Shot, load_dataset
from scenesearch.engine import Index, Posting, build_index, load_index, query, score_scene
from scenesearch.errors import TensorFormatError
from scenesearch.fixture import generate_fixture
from scenesearch.hypercolumn import bilinear_resize, gaussian_center_map, phi_from_blocks
from scenesearch.svm import hinge_objective
from scenesearch.tensorio import read_tensor, write_tensor


def report(n: int, text: str) -> None:
    print(f"PASS criterion {n}: {text}")


def test_criterion_01_tensor_round_trip():
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    for _ in range(1000):
        rank = int(rng.integers(1, 5))
        shape = tuple(int(d) for d in rng.integers(1, 7, size=rank))
        t = rng.normal(scale=10.0 ** rng.integers(-3, 4), size=shape).astype(np.float32)
        out = read_tensor(write_tensor(t))
        assert out.shape == t.shape and out.dtype == np.float32
        assert np.array_equal(out, t)

    good = write_tensor(np.array([1.0, 2.0], dtype=np.float32))
    with pytest.raises(TensorFormatError) as err:
        read_tensor(b"BADMAGIC" + good[8:])
    assert err.value.code == "bad-magic"
    with pytest.raises(TensorFormatError) as err:
        read_tensor(good[:-1])
    assert err.value.code == "truncated"
    with pytest.raises(TensorFormatError) as err:
        write_tensor(np.array([np.nan], dtype=np.float32))
    assert err.value.code == "non-finite"
    nan_payload = b"SCNTNSR1" + struct.pack("<IQ", 1, 1) + struct.pack("<f", float("nan"))
    with pytest.raises(TensorFormatError) as err:
        read_tensor(nan_payload)
    assert err.value.code == "non-finite"

    elapsed = time.perf_counter() - start
    assert elapsed < 5.0, f"criterion 1 took {elapsed:.2f}s, budget 5s"
    report(1, f"1000 tensors round-tripped bit-exact, malformed inputs rejected ({elapsed:.2f}s)")


def test_criterion_02_ranksvm_analytic_and_separable():
    w, objective = fit_preference_weights(np.array([[1.0]]), c=3.0)
    assert abs(w[0] - 1.0) < 1e-6
    assert abs(objective - 0.5) < 1e-6

    # Separable vote sheets: 5 scenes x 6 keyframes ordered by a planted
    # linear signal; training must reach 0.0% swapped pairs.
    rng = np.random.default_rng(202)
    votes, phis = {}, {}
    kf = 0
    for scene in range(5):
        sheet = {}
        for j in range(6):
            phi = rng.normal(size=10)
            phi[0] = 12.0 * j
            phis[kf] = phi
            sheet[kf] = min(3, j)
            kf += 1
        votes[scene] = sheet
    pairs = pairs_from_votes(votes)
    model = train_rank(pairs, phis, c=3.0)
    assert swapped_pairs_pct(model, pairs, phis) == 0.0
    report(2, "analytic single-pair case w=1, J=0.5; separable vote sheets at 0.0% swapped")


def test_criterion_03_ranksvm_grid_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(303)
    for _ in range(20):
        n = int(rng.integers(1, 11))
        diffs = rng.normal(size=(n, 2))
        c = float(rng.uniform(0.5, 4.0))
        w, achieved = fit_preference_weights(diffs, c)
        assert achieved == pytest.approx(svm_objective(w, diffs, np.ones(n), c), rel=1e-12)
        _, grid_best = grid_min_objective(diffs, np.ones(n), c)
        assert abs(achieved - grid_best) / grid_best < 1e-3
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0, f"criterion 3 took {elapsed:.2f}s, budget 30s"
    report(3, f"20 random instances within 1e-3 of the dense grid oracle ({elapsed:.2f}s)")


def test_criterion_04_swapped_pairs_brute_force():
    rng = np.random.default_rng(404)
    checked = 0
    for _ in range(100):
        n_kf = int(rng.integers(3, 10))
        phis = {k: rng.normal(size=10) for k in range(n_kf)}
        votes = {0: {k: int(rng.integers(0, 4)) for k in range(n_kf)}}
        pairs = pairs_from_votes(votes)
        if not pairs:
            continue
        model = RankModel(
            w=rng.normal(size=10),
            feature_mean=rng.normal(size=10),
            feature_std=np.abs(rng.normal(size=10)) + 0.3,
            c=3.0,
            objective_value=0.0,
        )
        scores = {k: rank_score(model, phis[k]) for k in phis}
        expected = brute_swapped_pct([(p.better, p.worse) for p in pairs], scores)
        assert swapped_pairs_pct(model, pairs, phis) == expected
        checked += 1
    assert checked >= 90
    report(4, f"swapped-pairs metric equals O(n^2) brute force on {checked} random fixtures")


def test_criterion_05_confirmation_closed_forms():
    assert temporal_weight(15.0, 10.0, 5.0) == pytest.approx(math.exp(-0.5), abs=1e-12)
    assert abs(temporal_weight(15.0, 10.0, 5.0) - 0.60653066) < 1e-8

    clf = planted_classifier("c", direction=3, gain=1.0)
    x = unit_fc6(3, -math.log(1.0 / 0.8 - 1.0))  # probability exactly 0.8
    shot = Shot(0, "v", 0.0, 20.0)  # t_mid 10
    p = visual_confirmation(clf, shot, x, t_u=15.0, config=EngineConfig())
    assert abs(p - 0.48522453) < 1e-8

    rng = np.random.default_rng(505)
    for _ in range(1000):
        sigma = float(rng.uniform(0.05, 50.0))
        t_u = float(rng.uniform(0, 1e4))
        t_s = t_u + float(rng.uniform(-20, 20)) * sigma
        w = temporal_weight(t_u, t_s, sigma)
        assert w == temporal_weight(t_s, t_u, sigma)
        assert 0.0 < w <= 1.0
        farther = t_s + math.copysign(sigma, t_s - t_u) if t_s != t_u else t_s + sigma
        assert temporal_weight(t_u, farther, sigma) < w
    report(5, "temporal weighting closed forms, symmetry and monotonicity over 1000 samples")


def test_criterion_06_concept_svm_and_platt():
    config = EngineConfig()
    pos = np.zeros((4, 16))
    pos[:, 0] = 1.0
    neg = np.zeros((4, 16))
    neg[:, 0] = -1.0
    clf = train_concept_classifier("c", pos, neg, config, seed=0)
    assert clf.w[0] > 0
    assert classifier_probability(clf, pos[0]) > 0.5 > classifier_probability(clf, neg[0])

    a, b = fit_platt([-1.0, -1.0, 1.0, 1.0], [-1, -1, 1, 1])
    assert a < 0
    assert abs(b) < 1e-6

    # Objective never exceeds the w=0 bound C*N, over random training runs.
    rng = np.random.default_rng(606)
    for seed in range(10):
        n_pos = int(rng.integers(2, 6))
        pos = rng.normal(0.6, 1.0, size=(n_pos, 12))
        pool = rng.normal(-0.6, 1.0, size=(24, 12))
        clf = train_concept_classifier("c", pos, pool, config, seed=seed)
        n_neg = n_pos  # neg_ratio 1.0
        chosen = np.sort(np.random.default_rng(seed).choice(24, size=n_neg, replace=False))
        X = np.hstack([np.vstack([pos, pool[chosen]]), np.ones((n_pos + n_neg, 1))])
        y = np.concatenate([np.ones(n_pos), -np.ones(n_neg)])
        w_full = np.concatenate([clf.w.astype(np.float64), [clf.b]])
        bound = config.svm_c_concept * len(y)
        assert svm_objective(w_full, X, y, config.svm_c_concept) <= bound + 1e-6
    report(6, "separable concept SVM signs and calibration; objective always under C*N")


def test_criterion_07_hypercolumn_properties():
    cfg = EngineConfig()
    for k in (1.0, 3.5, -2.25):
        bundle = [np.full((6, 6), k), np.full((5, 5), k), np.full((4, 4), k),
                  np.full((3, 3), k), np.full((2, 2), k)]
        phi = phi_from_blocks(bundle, cfg)
        assert np.all(phi[1::2] == 0.0), "constant bundle must give exactly zero stds"
        gmean = gaussian_center_map(cfg.map_size, cfg.sigma_b).mean()
        np.testing.assert_allclose(phi[0::2], k * gmean, rtol=1e-12)

    rng = np.random.default_rng(707)
    bundle = [rng.normal(size=(12, 12)), rng.normal(size=(9, 9)), rng.normal(size=(6, 6)),
              rng.normal(size=(4, 4)), rng.normal(size=(2, 2))]
    base = phi_from_blocks(bundle, cfg)
    for lam in (0.5, 2.0, 10.0):
        scaled = phi_from_blocks([lam * m for m in bundle], cfg)
        assert np.all(np.abs(scaled - lam * base) <= 1e-6 * np.abs(lam * base) + 1e-15)

    src = rng.normal(size=(14, 14))
    assert np.array_equal(bilinear_resize(src, 14, 14), src), "identity resize must be bit-exact"

    out = bilinear_resize(np.array([[0.0, 1.0], [2.0, 3.0]]), 3)
    assert np.array_equal(out, [[0.0, 0.5, 1.0], [1.0, 1.5, 2.0], [2.0, 2.5, 3.0]])
    np.testing.assert_allclose(out, naive_bilinear(np.array([[0.0, 1.0], [2.0, 3.0]]), 3, 3))

    g = gaussian_center_map(9, 0.8)
    assert g[4, 4] == 1.0 and g.max() == 1.0
    assert np.array_equal(g, g.T) and np.array_equal(g, g[::-1, :]) and np.all(g > 0)
    report(7, "constant/zero/scaling pooling laws, exact bilinear cases, Gaussian invariants")


def test_criterion_08_blend_degenerate_cases(tmp_path):
    vocab = {"u": np.array([1.0, 0.0])}
    videos = [
        {
            "video_id": "v0",
            "shots": [(0, 0.0, 4.0), (1, 4.0, 8.0), (2, 40.0, 44.0), (3, 44.0, 48.0)],
            "scenes": [(0, 0, 1), (1, 2, 3)],
            "tokens": [],
        }
    ]
    cats = [("c", ["u"], np.stack([unit_fc6(0, 1.0), unit_fc6(0, 1.1)]))]
    ds = load_dataset(write_dataset(tmp_path, videos, vocab, cats))
    index = Index(
        videos=["v0"],
        vocabulary={"u": np.array([1.0, 0.0], dtype=np.float32)},
        postings={"u": [Posting(0, 0, 0, 0.4), Posting(0, 0, 1, 0.7),
                        Posting(0, 1, 2, 0.9), Posting(0, 1, 3, 0.1)]},
        aesthetic={0: 0.2, 1: 0.5, 2: 0.05, 3: 0.3},
    )
    # alpha=1: pure max-P oracle per scene; alpha=0: pure max-aesthetic.
    max_p = {0: 0.7, 1: 0.9}
    max_aes = {0: 0.5, 1: 0.3}
    for scene_id in (0, 1):
        assert score_scene(ds, index, scene_id, "u", alpha=1.0) == max_p[scene_id]
        assert score_scene(ds, index, scene_id, "u", alpha=0.0) == max_aes[scene_id]
    sem_rank = [h.scene_id for h in query(ds, index, "u", alpha=1.0, k=10).hits]
    assert sem_rank == sorted(max_p, key=lambda s: -max_p[s])
    aes_rank = [h.scene_id for h in query(ds, index, "u", alpha=0.0, k=10).hits]
    assert aes_rank == sorted(max_aes, key=lambda s: -max_aes[s])

    # Hand-computed two-shot blend: max(0.5*0.4+0.5*0.2, 0.5*0.7+0.5*0.5).
    assert score_scene(ds, index, 0, "u", alpha=0.5) == 0.6
    report(8, "alpha=1 and alpha=0 match the degenerate oracles; two-shot case R=0.6 exactly")


@pytest.fixture(scope="module")
def retrieval_world(tmp_path_factory):
    """3 videos x 60 shots x 10 scenes, 50-term vocabulary, full pipeline."""
    root = tmp_path_factory.mktemp("acceptance")
    manifest = generate_fixture(
        root, n_videos=3, shots_per_video=60, scenes_per_video=10,
        vocab_size=50, n_categories=20, exemplars_per_category=8, seed=909,
    )
    ds = load_dataset(manifest)
    cfg = EngineConfig()
    from scenesearch.aesrank import load_votes
    from scenesearch.concepts import train_all_concepts
    from scenesearch.engine import map_dataset_lemmas

    lemma_to_category, _ = map_dataset_lemmas(ds)
    classifiers = train_all_concepts(lemma_to_category, ds.categories, cfg, master_seed=909)
    votes = load_votes(root / "votes.jsonl")
    pairs = pairs_from_votes(votes)
    phis = {sid: phi_from_blocks(ds.blocks[sid], cfg) for sid in ds.blocks}
    model = train_rank(pairs, phis, cfg.svm_c_rank)
    index, _ = build_index(ds, classifiers, model, cfg)
    return ds, cfg, lemma_to_category, classifiers, model, index


def test_criterion_09_index_scan_equivalence(retrieval_world):
    start = time.perf_counter()
    ds, cfg, lemma_to_category, classifiers, model, index = retrieval_world
    confirmations = scan_confirmations(ds, classifiers, lemma_to_category, cfg)
    aesthetic = scan_aesthetic(ds, model, cfg)

    def match_concept_oracle(words: list[str]) -> str | None:
        vecs = [ds.embedding[w] for w in words if w in ds.embedding]
        if not vecs:
            return None
        q = np.mean(vecs, axis=0)
        best, best_sim = None, -math.inf
        for lemma in sorted(index.vocabulary):
            v = index.vocabulary[lemma].astype(np.float64)
            sim = float(q @ v) / (np.linalg.norm(q) * np.linalg.norm(v))
            if sim > best_sim:
                best, best_sim = lemma, sim
        return best

    rng = np.random.default_rng(910)
    terms = sorted(ds.embedding.terms())
    ran = 0
    for _ in range(50):
        n_words = int(rng.integers(1, 3))
        words = [terms[int(i)] for i in rng.integers(0, len(terms), size=n_words)]
        text = " ".join(words)
        concept = match_concept_oracle(words)
        assert concept is not None
        got = query(ds, index, text, alpha=0.5, k=10**9)
        assert got.concept == concept, "index and oracle matched different concepts"
        expected = scan_ranking(ds, confirmations, aesthetic, concept, alpha=0.5)
        assert [(h.video_id, h.scene_id) for h in got.hits] == [
            (vid, sc) for _, vid, sc in expected
        ]
        ran += 1
    elapsed = time.perf_counter() - start
    assert ran == 50
    assert elapsed < 60.0, f"criterion 9 took {elapsed:.2f}s, budget 60s"
    report(9, f"50 random queries: inverted-index rankings equal full-scan rankings ({elapsed:.2f}s)")


def test_criterion_10_end_to_end_determinism(tmp_path, capsys):
    def pipeline(base, threads: int) -> tuple[bytes, str]:
        data = base / "data"
        assert cli.main(["gen-fixture", "--out", str(data), "--seed", "77", "--videos", "2",
                         "--shots-per-video", "16", "--scenes-per-video", "4",
                         "--vocab", "20", "--categories", "8", "--exemplars", "5"]) == 0
        manifest = str(data / "manifest.json")
        clfs = str(base / "classifiers.jsonl")
        model = str(base / "rankmodel.json")
        index = base / "index.bin"
        assert cli.main(["train-concepts", "--manifest", manifest, "--out", clfs,
                         "--seed", "77", "--threads", str(threads)]) == 0
        assert cli.main(["train-ranker", "--manifest", manifest,
                         "--votes", str(data / "votes.jsonl"), "--out", model]) == 0
        assert cli.main(["build-index", "--manifest", manifest, "--classifiers", clfs,
                         "--rank-model", model, "--out", str(index),
                         "--threads", str(threads)]) == 0
        capsys.readouterr()
        assert cli.main(["query", "--manifest", manifest, "--index", str(index),
                         "--q", "term004", "--k", "5"]) == 0
        out = capsys.readouterr().out
        return index.read_bytes(), out

    i1, q1 = pipeline(tmp_path / "run1", threads=1)
    i2, q2 = pipeline(tmp_path / "run2", threads=1)
    i4, q4 = pipeline(tmp_path / "run4", threads=4)
    assert i1 == i2, "same seed must produce byte-identical indexes"
    assert q1 == q2, "same seed must produce identical query output"
    assert i1 == i4 and q1 == q4, "thread count must not change results"
    report(10, "full pipeline twice with one seed: byte-identical index, queries; threads=4 == threads=1")


def test_criterion_11_two_concepts_two_scenes(tmp_path):
    vocab = {"penguin": np.array([1.0, 0.0, 0.0]), "calf": np.array([0.0, 1.0, 0.0])}
    videos = [
        {
            "video_id": "episode",
            "shots": [(0, 0.0, 4.0), (1, 4.0, 8.0), (2, 60.0, 64.0), (3, 64.0, 68.0)],
            "scenes": [(0, 0, 1), (1, 2, 3)],
            "tokens": [(2.0, "penguin"), (62.0, "calf")],
            "fc6": {0: unit_fc6(10, 3.0), 2: unit_fc6(20, 3.0)},
            "blocks": {i: constant_blocks(1.0) for i in range(4)},
        }
    ]
    cats = [
        ("penguincat", ["penguin"], np.stack([unit_fc6(10, 1.0), unit_fc6(10, 1.2)])),
        ("calfcat", ["calf"], np.stack([unit_fc6(20, 1.0), unit_fc6(20, 1.2)])),
    ]
    ds = load_dataset(write_dataset(tmp_path, videos, vocab, cats))
    classifiers = {
        "penguincat": planted_classifier("penguincat", 10, gain=2.0),
        "calfcat": planted_classifier("calfcat", 20, gain=2.0),
    }
    model = RankModel(w=np.ones(10), feature_mean=np.zeros(10), feature_std=np.ones(10),
                      c=3.0, objective_value=0.0)
    index, _ = build_index(ds, classifiers, model, EngineConfig())
    first = query(ds, index, "penguin", alpha=0.5, k=1).hits[0]
    second = query(ds, index, "calf", alpha=0.5, k=1).hits[0]
    assert first.video_id == second.video_id == "episode"
    assert first.scene_id != second.scene_id
    report(11, "two concepts in one video retrieve the same video with different scenes")
