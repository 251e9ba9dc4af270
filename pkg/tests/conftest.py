from __future__ import annotations

import pytest

from scenesearch.config import EngineConfig
from scenesearch.dataset import load_dataset
from scenesearch.fixture import generate_fixture


@pytest.fixture(scope="session")
def small_fixture(tmp_path_factory):
    """A modest generated dataset shared (read-only) across test modules."""
    root = tmp_path_factory.mktemp("fixture")
    manifest = generate_fixture(
        root,
        n_videos=2,
        shots_per_video=24,
        scenes_per_video=4,
        vocab_size=24,
        n_categories=10,
        exemplars_per_category=6,
        seed=11,
    )
    return manifest


@pytest.fixture(scope="session")
def small_dataset(small_fixture):
    return load_dataset(small_fixture)


@pytest.fixture()
def config():
    return EngineConfig()
