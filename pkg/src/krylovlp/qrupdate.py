"""QR factors of small dense basic matrices, maintained under updates.

A QrFactors object tracks the matrix B it currently represents alongside Q
and R.  Rank-one changes, row replacements and bordered expansions cost
O(s^2) via Givens sweeps; the tracked copy enables periodic full
refactorization and old-row retrieval.  One solver owns each instance and
may mutate it in place.
"""

import numpy as np
from scipy.linalg import solve_triangular

from . import _accel
from .errors import SingularMatrixError

# Full refactorization after this many updates, or sooner when the
# orthogonality probe drifts past DRIFT_LIMIT.
REFACTOR_EVERY = 64
DRIFT_LIMIT = 1e-11

_SINGULAR_REL = 1e-13


class QrFactors:
    """Orthogonal Q and upper-triangular R with Q @ R == tracked matrix."""

    def __init__(self, q, r, tracked, update_count=0, drift_estimate=0.0):
        self.q = q
        self.r = r
        self.tracked = tracked
        self.update_count = update_count
        self.drift_estimate = drift_estimate

    @classmethod
    def from_matrix(cls, b):
        """Factor a square matrix.  Always succeeds; singularity surfaces
        at solve time through a tiny R diagonal."""
        b = np.array(b, dtype=np.float64, order="C")
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise ValueError("QrFactors requires a square matrix")
        q, r = np.linalg.qr(b)
        return cls(np.ascontiguousarray(q), np.ascontiguousarray(r), b.copy())

    @property
    def size(self):
        return self.q.shape[0]

    def copy(self):
        return QrFactors(
            self.q.copy(), self.r.copy(), self.tracked.copy(),
            self.update_count, self.drift_estimate,
        )

    def rank_one_update(self, u, v):
        """Apply B <- B + u v^T to the factors and the tracked matrix."""
        s = self.size
        u = np.ascontiguousarray(u, dtype=np.float64)
        v = np.ascontiguousarray(v, dtype=np.float64)
        if u.shape[0] != s or v.shape[0] != s:
            raise ValueError("update vectors must have length s")
        w = np.empty(s)
        _accel.qr_rank1_update(self.q, self.r, u, v, w)
        self.tracked += np.outer(u, v)
        self.update_count += 1
        self._monitor()
        return self

    def replace_row(self, j, new_row):
        """Replace row j of the tracked matrix."""
        if not 0 <= j < self.size:
            raise IndexError(f"row index {j} out of range for size {self.size}")
        u = np.zeros(self.size)
        u[j] = 1.0
        return self.rank_one_update(u, np.asarray(new_row, dtype=np.float64) - self.tracked[j])

    def expand(self, new_col_top, new_row):
        """Grow to the bordered matrix [[B, new_col_top], [new_row]].

        The factors are embedded with a unit last diagonal, then the new
        row and the new column are applied as two rank-one updates.
        """
        s = self.size
        new_col_top = np.asarray(new_col_top, dtype=np.float64)
        new_row = np.asarray(new_row, dtype=np.float64)
        if new_col_top.shape[0] != s or new_row.shape[0] != s + 1:
            raise ValueError("expand: new_col_top needs length s, new_row length s+1")
        q = np.zeros((s + 1, s + 1))
        r = np.zeros((s + 1, s + 1))
        tracked = np.zeros((s + 1, s + 1))
        q[:s, :s] = self.q
        r[:s, :s] = self.r
        tracked[:s, :s] = self.tracked
        q[s, s] = 1.0
        r[s, s] = 1.0
        tracked[s, s] = 1.0
        self.q, self.r, self.tracked = q, r, tracked

        u = np.zeros(s + 1)
        u[s] = 1.0
        row_delta = new_row.copy()
        row_delta[s] -= 1.0
        self.rank_one_update(u, row_delta)
        col = np.concatenate([new_col_top, [0.0]])
        e_last = np.zeros(s + 1)
        e_last[s] = 1.0
        self.rank_one_update(col, e_last)
        return self

    def solve(self, rhs):
        """x with B x = rhs via x = R^-1 (Q^T rhs)."""
        self._check_diagonal()
        x = solve_triangular(self.r, self.q.T @ np.asarray(rhs, dtype=np.float64), lower=False)
        return x

    def solve_transpose(self, rhs):
        """x with B^T x = rhs: forward substitution on R^T, then Q."""
        self._check_diagonal()
        w = solve_triangular(
            self.r, np.asarray(rhs, dtype=np.float64), lower=False, trans="T"
        )
        return self.q @ w

    def diagonal_ok(self):
        """True when no R diagonal entry is negligible (solves will work)."""
        d = np.abs(np.diag(self.r))
        return bool(d.min() > _SINGULAR_REL * max(d.max(), np.finfo(float).tiny))

    def refactor(self):
        q, r = np.linalg.qr(self.tracked)
        self.q = np.ascontiguousarray(q)
        self.r = np.ascontiguousarray(r)
        self.update_count = 0
        self.drift_estimate = 0.0
        return self

    def _check_diagonal(self):
        d = np.abs(np.diag(self.r))
        cutoff = _SINGULAR_REL * max(d.max(), np.finfo(float).tiny)
        bad = np.nonzero(d <= cutoff)[0]
        if bad.size:
            raise SingularMatrixError(int(bad[0]), f"basic matrix singular at position {bad[0]}")

    def _monitor(self):
        # Cheap orthogonality probe: one column of Q^T Q against the unit
        # vector.  Rotates through columns so repeated updates cover all.
        j = self.update_count % self.size
        col = self.q.T @ self.q[:, j]
        col[j] -= 1.0
        self.drift_estimate = float(np.linalg.norm(col))
        if self.update_count >= REFACTOR_EVERY or self.drift_estimate > DRIFT_LIMIT:
            self.refactor()


def qr_factor(b):
    """Factor a square dense matrix into maintained QR factors."""
    return QrFactors.from_matrix(b)
