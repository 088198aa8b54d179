import numpy as np
import pytest

from krylovlp.sparse import SparseMatrix


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_sparse(rng, nrows, ncols, density=0.4):
    """Random CSR matrix with at least one entry per row."""
    mask = rng.random((nrows, ncols)) < density
    for i in range(nrows):
        if not mask[i].any():
            mask[i, rng.integers(ncols)] = True
    dense = np.where(mask, rng.standard_normal((nrows, ncols)), 0.0)
    return SparseMatrix.from_dense(dense), dense


def random_dense_as_sparse(rng, nrows, ncols):
    dense = rng.standard_normal((nrows, ncols))
    return SparseMatrix.from_dense(dense), dense
