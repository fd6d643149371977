from __future__ import annotations

from pathlib import Path

import pytest

from specplan import load_profiles

FIXTURE_DIR = Path(__file__).resolve().parents[1] / "fixtures" / "paper"


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURE_DIR


@pytest.fixture(scope="session")
def store():
    return load_profiles(FIXTURE_DIR)
