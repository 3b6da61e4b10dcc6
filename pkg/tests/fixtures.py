import pytest

import numpy as np

from pydqc.io import write_points
from pydqc.schemas import DataMatrix
from pydqc.synthetic import blobs, circle_centers

# ===========================
# Shared data sets
# ===========================

EXAMPLE_MATRIX = [
    [8.3, 5.8],
    [-4.5, -4.3],
    [6.8, -8.5],
]

# Exact singular values of EXAMPLE_MATRIX.
EXAMPLE_SINGULAR_VALUES = [11.8753, 10.8967]

@pytest.fixture
def rng():
    return np.random.default_rng(20260214)

@pytest.fixture
def example_matrix():
    return DataMatrix(np.array(EXAMPLE_MATRIX), ("u", "v"))

@pytest.fixture
def example_csv(tmp_path):
    path = tmp_path / "example.csv"
    path.write_text("u,v\n" + "\n".join(f"{a},{b}" for a, b in EXAMPLE_MATRIX) + "\n")
    return path

@pytest.fixture
def three_blobs():
    return blobs([(0.0, 0.0), (2.0, 0.0), (1.0, 1.7)], 30, 0.03, seed = 7)

@pytest.fixture
def circle_blobs():
    return blobs(circle_centers(3), 30, 0.05, seed = 11)

@pytest.fixture
def blobs_csv(tmp_path, circle_blobs):
    return write_points(tmp_path / "blobs.csv", circle_blobs)

@pytest.fixture
def signal_and_noise(rng):
    """Two duplicated orthogonal signal features and one faint orthogonal noise feature."""
    q, _ = np.linalg.qr(rng.standard_normal((20, 3)))
    a, b, noise = q.T
    return DataMatrix(np.column_stack([a, a, b, b, 1e-3 * noise]), ("a1", "a2", "b1", "b2", "noise"))
