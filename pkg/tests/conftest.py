"""Shared fixtures: bundled corpus access and deterministic RNGs."""

from importlib import resources
from pathlib import Path

import pytest


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return Path(resources.files("tsopom") / "corpus")


@pytest.fixture(scope="session")
def schema_dir() -> Path:
    return Path(resources.files("tsopom") / "schemas")
