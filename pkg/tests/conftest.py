import json
import sys
from pathlib import Path

import numpy as np
import pytest

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE))  # for the oracles package

ROOT = HERE.parent


@pytest.fixture(scope="session")
def ml_reference():
    d = json.loads((HERE / "data" / "ml_reference.json").read_text())
    return np.array(d["rows"], dtype=float)


@pytest.fixture(scope="session")
def configs_dir():
    return ROOT / "configs"
