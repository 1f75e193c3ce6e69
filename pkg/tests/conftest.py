from __future__ import annotations

import json
from pathlib import Path

import pytest

from hypermon.kripke import KripkeStructure

DATA = Path(__file__).parent / "data"


def sample_structure() -> KripkeStructure:
    """Four states; s1 reaches both b-leaves, so s_init -> s1 -> s3 duplicates a trace."""
    return KripkeStructure.make(
        {"s_init": {"a"}, "s1": {"a"}, "s2": {"b"}, "s3": {"b"}},
        "s_init",
        [("s_init", "s1"), ("s_init", "s3"), ("s1", "s2"), ("s1", "s3"), ("s2", "s2"), ("s3", "s3")],
        ap={"a", "b"},
    )


@pytest.fixture
def sample() -> KripkeStructure:
    return sample_structure()


@pytest.fixture
def sample_path() -> Path:
    return DATA / "sample.json"


@pytest.fixture
def data_dir() -> Path:
    return DATA


def load_json(path: Path):
    return json.loads(Path(path).read_text(encoding="utf-8"))
