import sys
from pathlib import Path

import pytest

# Get the absolute path to the project root
project_root = str(Path(__file__).parent.parent.absolute())

# Add the project root to Python path
if project_root not in sys.path:
    sys.path.insert(0, project_root)

import config as conf  # noqa: E402


@pytest.fixture(autouse=True)
def quiet():
    """Experiments print progress lines; keep test output clean."""
    previous = conf.update_config({})["verbose"]
    conf.update_config({"verbose": False})
    yield
    conf.update_config({"verbose": previous})
