import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

from seedmine import synth

CORPUS_COUNT = 100
CORPUS_MIX = 0.5
CORPUS_SEED = 7


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    """The 100-image oracle corpus (seed 7, 50% complex) used across tests."""
    path = tmp_path_factory.mktemp("corpus")
    synth.make_corpus(path, CORPUS_COUNT, CORPUS_MIX, CORPUS_SEED)
    return path


@pytest.fixture(scope="session")
def corpus_records(corpus_dir):
    from seedmine import formats

    return formats.read_manifest(corpus_dir / "corpus.manifest")
