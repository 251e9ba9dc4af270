"""Word-embedding geometry: similarity, synset vectors, concept mapping.

A transcript unigram is mapped onto the exemplar corpus by embedding it and
taking the category whose synset vector has maximal cosine similarity. A
synset vector is the L2-normalized mean of the embeddings of the words in
the synset; queries embed the same way so query-to-concept similarities are
comparable across query lengths. Ties break to the lexicographically
smallest identifier so results are reproducible.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import EmbeddingError
from .tensorio import read_jsonl, read_tensor_file

_NORM_EPS = 1e-12


class EmbeddingTable:
    """Immutable term -> vector table; all vectors share one dimension."""

    def __init__(self, vectors: Mapping[str, np.ndarray]):
        if not vectors:
            raise EmbeddingError("empty-table", "embedding table has no entries")
        dims = {v.shape for v in vectors.values()}
        if len(dims) != 1 or len(next(iter(dims))) != 1:
            raise EmbeddingError("bad-table", f"inconsistent vector shapes: {sorted(dims)}")
        self.dim = next(iter(dims))[0]
        self._vectors = {t: np.asarray(v, dtype=np.float64) for t, v in vectors.items()}
        for term, vec in self._vectors.items():
            if float(np.linalg.norm(vec)) <= _NORM_EPS:
                raise EmbeddingError("degenerate-vector", f"zero vector for term {term!r}")

    def __contains__(self, term: str) -> bool:
        return term in self._vectors

    def __len__(self) -> int:
        return len(self._vectors)

    def __getitem__(self, term: str) -> np.ndarray:
        try:
            return self._vectors[term]
        except KeyError:
            raise EmbeddingError("unmapped-term", f"term {term!r} not in embedding table") from None

    def terms(self) -> list[str]:
        return list(self._vectors)

    @classmethod
    def load(cls, tensor_path: str | Path, vocab_path: str | Path) -> "EmbeddingTable":
        """Load a [vocab x dim] tensor plus its JSON-lines vocabulary file.

        Vocabulary rows are ``{"term": ...}`` in tensor row order. The vocab
        file sits next to the tensor: ``<name>.tnsr`` -> ``<name>.vocab.jsonl``.
        """
        matrix = read_tensor_file(tensor_path)
        if matrix.ndim != 2:
            raise EmbeddingError("bad-table", f"{tensor_path}: expected rank-2 tensor")
        rows = read_jsonl(vocab_path)
        terms = []
        for i, row in enumerate(rows):
            term = row.get("term")
            if not isinstance(term, str) or not term:
                raise EmbeddingError("bad-table", f"{vocab_path}: row {i} has no term")
            terms.append(term)
        if len(terms) != matrix.shape[0]:
            raise EmbeddingError(
                "bad-table",
                f"{vocab_path}: {len(terms)} terms but tensor has {matrix.shape[0]} rows",
            )
        if len(set(terms)) != len(terms):
            raise EmbeddingError("bad-table", f"{vocab_path}: duplicate terms")
        return cls({t: matrix[i] for i, t in enumerate(terms)})

    @staticmethod
    def vocab_path_for(tensor_path: str | Path) -> Path:
        p = Path(tensor_path)
        return p.with_name(p.name.removesuffix(".tnsr") + ".vocab.jsonl")


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity a.b / (|a||b|), in [-1, 1]; symmetric."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise EmbeddingError("bad-table", f"dimension mismatch: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na <= _NORM_EPS or nb <= _NORM_EPS:
        raise EmbeddingError("degenerate-vector", "cosine of zero vector is undefined")
    return float(np.dot(a, b) / (na * nb))


def _normalized_mean(words: Iterable[str], table: EmbeddingTable, missing_code: str) -> np.ndarray:
    found = [table[w] for w in words if w in table]
    if not found:
        raise EmbeddingError(missing_code, "no word present in embedding table")
    mean = np.mean(np.stack(found), axis=0)
    norm = float(np.linalg.norm(mean))
    if norm <= _NORM_EPS:
        raise EmbeddingError("degenerate-vector", "word vectors cancel to the zero vector")
    return mean / norm


def synset_vector(words: Sequence[str], table: EmbeddingTable) -> np.ndarray:
    """Unit-norm mean of the synset words found in the table; absent words skip."""
    return _normalized_mean(words, table, "unmapped-synset")


def embed_query(words: Sequence[str], table: EmbeddingTable) -> np.ndarray:
    """Unit-norm mean of the known query words; errors if none is known."""
    return _normalized_mean(words, table, "unknown-query")


def build_category_vectors(
    categories: Iterable, table: EmbeddingTable
) -> tuple[dict[str, np.ndarray], list[str]]:
    """Synset vector per corpus category.

    Categories whose synset has no word in the table are excluded and
    reported in the second return value.
    """
    vectors: dict[str, np.ndarray] = {}
    excluded: list[str] = []
    for cat in categories:
        try:
            vectors[cat.category_id] = synset_vector(cat.synset_words, table)
        except EmbeddingError:
            excluded.append(cat.category_id)
    return vectors, excluded


def _argmax_cosine(target: np.ndarray, candidates: Sequence[tuple[str, np.ndarray]]) -> str:
    best_id = None
    best_sim = -math.inf
    # Sort once so equal similarities resolve to the smallest identifier.
    for cand_id, vec in sorted(candidates, key=lambda kv: kv[0]):
        sim = cosine(target, vec)
        if sim > best_sim:
            best_sim = sim
            best_id = cand_id
    assert best_id is not None
    return best_id


def map_concept(lemma: str, category_vectors: Mapping[str, np.ndarray], table: EmbeddingTable) -> str:
    """Nearest corpus category for a transcript unigram, by cosine."""
    if lemma not in table:
        raise EmbeddingError("unmapped-term", f"lemma {lemma!r} not in embedding table")
    if not category_vectors:
        raise EmbeddingError("empty-index", "no mappable corpus categories")
    return _argmax_cosine(table[lemma], list(category_vectors.items()))


def match_query_to_concept(
    query_vector: np.ndarray, vocabulary: Mapping[str, np.ndarray] | Sequence[tuple[str, np.ndarray]]
) -> str:
    """Most similar indexed lemma to an embedded query."""
    items = list(vocabulary.items()) if isinstance(vocabulary, Mapping) else list(vocabulary)
    if not items:
        raise EmbeddingError("empty-index", "detected-concept vocabulary is empty")
    return _argmax_cosine(np.asarray(query_vector, dtype=np.float64), items)


def load_synset_words(path: str | Path) -> list[str]:
    """Read a category's synset word list from its metadata JSON."""
    with open(path, "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    words = meta.get("words") if isinstance(meta, dict) else None
    if not isinstance(words, list) or not all(isinstance(w, str) for w in words) or not words:
        raise EmbeddingError("bad-synset", f"{path}: expected {{\"words\": [...]}} with >= 1 word")
    return words
