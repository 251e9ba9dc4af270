"""Scene-level retrieval for edited-video collections.

Given a textual query, returns ranked (video, scene, thumbnail) triplets.
Scenes are scored by transcript concepts that were visually confirmed by
per-concept classifiers with a Gaussian temporal discount, blended with a
learned aesthetic score of each keyframe's hypercolumn features.
"""

from .config import EngineConfig
from .dataset import Dataset, Scene, Shot, TranscriptToken, load_dataset
from .embedspace import (
    EmbeddingTable,
    cosine,
    embed_query,
    map_concept,
    match_query_to_concept,
    synset_vector,
)
from .concepts import (
    ConceptClassifier,
    candidate_shots,
    classifier_probability,
    fit_platt,
    temporal_weight,
    train_concept_classifier,
    visual_confirmation,
)
from .hypercolumn import (
    HypercolumnFeatures,
    bilinear_resize,
    build_hypercolumns,
    gaussian_center_map,
    phi_from_blocks,
)
from .aesrank import (
    PreferencePair,
    RankModel,
    fit_preference_weights,
    pairs_from_votes,
    rank_score,
    swapped_pairs_pct,
    train_rank,
)
from .engine import Index, QueryHit, QueryResult, build_index, load_index, query, save_index, score_scene
from .fixture import generate_fixture
from .tensorio import read_tensor, read_tensor_file, write_tensor, write_tensor_file

__version__ = "0.1.0"

__all__ = [
    "EngineConfig",
    "Dataset",
    "Scene",
    "Shot",
    "TranscriptToken",
    "load_dataset",
    "EmbeddingTable",
    "cosine",
    "embed_query",
    "map_concept",
    "match_query_to_concept",
    "synset_vector",
    "ConceptClassifier",
    "candidate_shots",
    "classifier_probability",
    "fit_platt",
    "temporal_weight",
    "train_concept_classifier",
    "visual_confirmation",
    "HypercolumnFeatures",
    "bilinear_resize",
    "build_hypercolumns",
    "gaussian_center_map",
    "phi_from_blocks",
    "PreferencePair",
    "RankModel",
    "fit_preference_weights",
    "pairs_from_votes",
    "rank_score",
    "swapped_pairs_pct",
    "train_rank",
    "Index",
    "QueryHit",
    "QueryResult",
    "build_index",
    "load_index",
    "query",
    "save_index",
    "score_scene",
    "generate_fixture",
    "read_tensor",
    "read_tensor_file",
    "write_tensor",
    "write_tensor_file",
    "__version__",
]
