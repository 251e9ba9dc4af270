"""Command-line workflow tying the modules together.

    scenesearch gen-fixture     --out data --seed 7
    scenesearch validate        --manifest data/manifest.json
    scenesearch train-concepts  --manifest ... --out classifiers.jsonl --seed 7
    scenesearch train-ranker    --manifest ... --votes ... --out rankmodel.json
    scenesearch build-index     --manifest ... --classifiers ... --rank-model ... --out index.bin
    scenesearch query           --manifest ... --index ... --q "term003" --alpha 0.5 --k 3
    scenesearch evaluate        --manifest ... --index ... --queries queries.txt --out report.jsonl

Output is line-delimited JSON by default (``--pretty`` for humans); errors
go to stderr and map to stable exit codes (see ``errors.py``). All
randomness flows from ``--seed``; rerunning any command with identical
inputs and seed reproduces identical bytes.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import aesrank, concepts, engine, fixture
from .config import EngineConfig
from .dataset import load_dataset
from .errors import SceneSearchError
from .hypercolumn import phi_from_blocks
from .tensorio import write_jsonl


def _config_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("engine configuration")
    g.add_argument("--config", type=Path, help="JSON config file; flags override its values")
    g.add_argument("--sigma-a", type=float, help="temporal Gaussian std, seconds (default 5)")
    g.add_argument("--sigma-b", type=float, help="center Gaussian std factor (default 4.5)")
    g.add_argument("--c-rank", type=float, help="ranking SVM C (default 3)")
    g.add_argument("--c-concept", type=float, help="concept SVM C (default 1)")
    g.add_argument("--alpha", type=float, help="semantic/aesthetic blend in [0,1] (default 0.5)")
    g.add_argument("--window", type=float, help="candidate window, seconds (default 3*sigma_a)")
    g.add_argument("--map-size", type=int, help="hypercolumn grid side (default 56)")
    g.add_argument("--neg-ratio", type=float, help="negatives per positive (default 1)")
    return p


def _common_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--pretty", action="store_true", help="human-readable output")
    return p


def _config_from_args(args: argparse.Namespace) -> EngineConfig:
    overrides = {
        "sigma_a": args.sigma_a,
        "sigma_b": args.sigma_b,
        "svm_c_rank": args.c_rank,
        "svm_c_concept": args.c_concept,
        "alpha": args.alpha,
        "candidate_window": args.window,
        "map_size": args.map_size,
        "neg_ratio": args.neg_ratio,
    }
    if args.config is not None:
        return EngineConfig.from_file(args.config, **overrides)
    return EngineConfig(**{k: v for k, v in overrides.items() if v is not None})


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scenesearch",
        description="Scene-level retrieval over edited-video collections.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    cfg = _config_parent()
    common = _common_parent()

    p = sub.add_parser("validate", parents=[common], help="load and validate a dataset")
    p.add_argument("--manifest", type=Path, required=True)

    p = sub.add_parser(
        "train-concepts", parents=[cfg, common], help="train calibrated concept classifiers"
    )
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="classifier store (JSON lines)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser(
        "train-ranker", parents=[cfg, common], help="train the aesthetic ranking model"
    )
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--votes", type=Path, required=True, help="vote sheet (JSON lines)")
    p.add_argument("--out", type=Path, required=True, help="model file (JSON)")

    p = sub.add_parser("build-index", parents=[cfg, common], help="precompute the query index")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--classifiers", type=Path, required=True)
    p.add_argument("--rank-model", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="index file")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--phi-cache", type=Path, help="directory for per-keyframe phi tensors")

    p = sub.add_parser("query", parents=[cfg, common], help="run one textual query")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--index", type=Path, help="index file (default: index.bin next to the manifest)")
    p.add_argument("--q", required=True, help="query text")
    p.add_argument("--k", type=int, default=10)
    p.add_argument(
        "--include-unmatched",
        action="store_true",
        help="also score scenes without a confirmation of the matched concept",
    )
    p.add_argument("--thumbnail-mode", choices=["aesthetic", "blended"], default="aesthetic")

    p = sub.add_parser("evaluate", parents=[cfg, common], help="batch queries into a report")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--index", type=Path, help="index file (default: index.bin next to the manifest)")
    p.add_argument("--queries", type=Path, required=True, help="one query per line")
    p.add_argument("--out", type=Path, required=True, help="report file (JSON lines)")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--include-unmatched", action="store_true")
    p.add_argument("--thumbnail-mode", choices=["aesthetic", "blended"], default="aesthetic")

    p = sub.add_parser("gen-fixture", parents=[common], help="write a synthetic dataset")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--videos", type=int, default=3)
    p.add_argument("--shots-per-video", type=int, default=60)
    p.add_argument("--scenes-per-video", type=int, default=10)
    p.add_argument("--vocab", type=int, default=50)
    p.add_argument("--categories", type=int, default=20)
    p.add_argument("--exemplars", type=int, default=8)
    p.add_argument("--embed-dim", type=int, default=16)

    return parser


def _emit(rows: list[dict], pretty: bool) -> None:
    if pretty:
        for row in rows:
            print("  ".join(f"{k}={v}" for k, v in row.items()))
    else:
        for row in rows:
            print(json.dumps(row, sort_keys=True, separators=(",", ":")))


def _cmd_validate(args) -> int:
    ds = load_dataset(args.manifest)
    if args.pretty:
        for line in ds.format_stats():
            print(line)
    else:
        _emit(ds.stats(), pretty=False)
    return 0


def _cmd_train_concepts(args) -> int:
    cfg = _config_from_args(args)
    ds = load_dataset(args.manifest)
    lemma_to_category, _ = engine.map_dataset_lemmas(ds)
    trained = concepts.train_all_concepts(
        lemma_to_category, ds.categories, cfg, args.seed, threads=args.threads
    )
    concepts.save_classifiers(args.out, trained.values())
    _emit(
        [{"classifiers": len(trained), "lemmas_mapped": len(lemma_to_category), "out": str(args.out)}],
        args.pretty,
    )
    return 0


def _cmd_train_ranker(args) -> int:
    cfg = _config_from_args(args)
    ds = load_dataset(args.manifest)
    votes = aesrank.load_votes(args.votes)
    pairs = aesrank.pairs_from_votes(votes)
    referenced = sorted({k for p in pairs for k in (p.better, p.worse)})
    phi_lookup = {sid: phi_from_blocks(ds.blocks[sid], cfg) for sid in referenced if sid in ds.blocks}
    model = aesrank.train_rank(pairs, phi_lookup, cfg.svm_c_rank)
    aesrank.save_rank_model(args.out, model)
    swapped = aesrank.swapped_pairs_pct(model, pairs, phi_lookup)
    _emit(
        [
            {
                "pairs": len(pairs),
                "objective": model.objective_value,
                "train_swapped_pct": swapped,
                "out": str(args.out),
            }
        ],
        args.pretty,
    )
    return 0


def _cmd_build_index(args) -> int:
    cfg = _config_from_args(args)
    ds = load_dataset(args.manifest)
    classifiers = concepts.load_classifiers(args.classifiers)
    model = aesrank.load_rank_model(args.rank_model)
    if args.phi_cache is not None:
        args.phi_cache.mkdir(parents=True, exist_ok=True)
    index, report = engine.build_index(
        ds, classifiers, model, cfg, threads=args.threads, phi_cache_dir=args.phi_cache
    )
    engine.save_index(args.out, index)
    summary = report.as_dict()
    summary["out"] = str(args.out)
    _emit([summary], args.pretty)
    return 0


def _default_index_path(args) -> Path:
    return args.index if args.index is not None else args.manifest.parent / "index.bin"


def _cmd_query(args) -> int:
    cfg = _config_from_args(args)
    ds = load_dataset(args.manifest)
    index = engine.load_index(_default_index_path(args))
    result = engine.query(
        ds,
        index,
        args.q,
        alpha=cfg.alpha,
        k=args.k,
        include_unmatched=args.include_unmatched,
        thumbnail_mode=args.thumbnail_mode,
    )
    if args.pretty and not result.hits:
        print(f"no scene matched concept {result.concept!r}", file=sys.stderr)
    _emit([hit.as_dict() for hit in result.hits], args.pretty)
    return 0


def _cmd_evaluate(args) -> int:
    cfg = _config_from_args(args)
    ds = load_dataset(args.manifest)
    index = engine.load_index(_default_index_path(args))
    with open(args.queries, "r", encoding="utf-8") as fh:
        queries = [line.strip() for line in fh if line.strip()]
    rows = engine.evaluate_retrieval(
        ds,
        index,
        queries,
        alpha=cfg.alpha,
        k=args.k,
        include_unmatched=args.include_unmatched,
        thumbnail_mode=args.thumbnail_mode,
    )
    write_jsonl(args.out, rows)
    _emit([{"queries": len(queries), "rows": len(rows), "out": str(args.out)}], args.pretty)
    return 0


def _cmd_gen_fixture(args) -> int:
    manifest = fixture.generate_fixture(
        args.out,
        n_videos=args.videos,
        shots_per_video=args.shots_per_video,
        scenes_per_video=args.scenes_per_video,
        vocab_size=args.vocab,
        n_categories=args.categories,
        exemplars_per_category=args.exemplars,
        embed_dim=args.embed_dim,
        seed=args.seed,
    )
    _emit([{"manifest": str(manifest)}], args.pretty)
    return 0


_COMMANDS = {
    "validate": _cmd_validate,
    "train-concepts": _cmd_train_concepts,
    "train-ranker": _cmd_train_ranker,
    "build-index": _cmd_build_index,
    "query": _cmd_query,
    "evaluate": _cmd_evaluate,
    "gen-fixture": _cmd_gen_fixture,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except SceneSearchError as exc:
        print(
            json.dumps({"error": exc.code, "message": exc.message}, sort_keys=True),
            file=sys.stderr,
        )
        return exc.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
