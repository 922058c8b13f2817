from pathlib import Path

import numpy as np
import pytest

from curv4 import CurvatureOperator, HODGE_MATRIX

REPO_ROOT = Path(__file__).resolve().parents[1]
SAMPLE_DIR = REPO_ROOT / "sample_inputs"


def random_symmetric6(rng, scale=1.0):
    m = rng.standard_normal((6, 6)) * scale
    return CurvatureOperator(0.5 * (m + m.T))


def random_bianchi(rng, scale=1.0):
    op = random_symmetric6(rng, scale)
    beta = float(np.sum(op.matrix * HODGE_MATRIX)) / 6.0
    return CurvatureOperator(op.matrix - beta * HODGE_MATRIX)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
