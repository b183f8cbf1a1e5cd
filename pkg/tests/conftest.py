import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from snacstag import default_inventory, read_corpus  # noqa: E402
from synth import make_corpus  # noqa: E402

DATA = Path(__file__).parent / "data"
RELEASE_ENV = "SNACSTAG_CORPUS"
RELEASE_DEFAULT = DATA / "hi-lp.conllulex"


@pytest.fixture(scope="session")
def inventory():
    return default_inventory()


@pytest.fixture(scope="session")
def mini_path():
    return DATA / "mini.conllulex"


@pytest.fixture(scope="session")
def mini(mini_path, inventory):
    return read_corpus(mini_path, inventory)


@pytest.fixture(scope="session")
def synth():
    return make_corpus(200, seed=1)


def release_path():
    """Location of the released Hindi corpus, if present."""
    p = os.environ.get(RELEASE_ENV)
    path = Path(p) if p else RELEASE_DEFAULT
    return path if path.exists() else None
