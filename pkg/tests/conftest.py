from functools import lru_cache

import pytest

from daggerlc import examples_path
from daggerlc.corpus import CorpusConfig, generate_corpus


@lru_cache(maxsize=None)
def corpus(size: int = 500, seed: int = 0):
    return generate_corpus(CorpusConfig(size=size, seed=seed))


@pytest.fixture(scope="session")
def examples():
    return examples_path()


@pytest.fixture(scope="session")
def small_corpus():
    return corpus(120, 7)
