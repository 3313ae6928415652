import json
from pathlib import Path

import pytest

DATA = Path(__file__).resolve().parent / "data"


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def entries():
    return json.loads((DATA / "example_entries.json").read_text())


@pytest.fixture(scope="session")
def corpus():
    return (DATA / "smiles_corpus.smi").read_text().split()


@pytest.fixture(scope="session")
def fixture_molecules():
    return json.loads((DATA / "fixture_molecules.json").read_text())


@pytest.fixture
def element_registry(monkeypatch):
    """Scratch copy of the process-global element tables."""
    from biomolkit.molgraph import elements

    for name in ("_NEUTRAL", "_CHARGED", "ATOMIC_NUMBER"):
        monkeypatch.setattr(elements, name, dict(getattr(elements, name)))
    return elements
