from pathlib import Path

import numpy as np
import pytest

from cipher_icl import corpus

REPO_ROOT = Path(__file__).resolve().parent.parent
ASSET_CORPUS = REPO_ROOT / "assets" / "corpus.txt"


@pytest.fixture(scope="session")
def english_stream() -> corpus.LetterStream:
    """The bundled English text, preprocessed once per session."""
    text = ASSET_CORPUS.read_bytes()
    return corpus.build_stream([text], source=str(ASSET_CORPUS))


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(0)
