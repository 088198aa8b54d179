"""Orthonormal Krylov bases with cached operator products.

Square operators use the Arnoldi recurrence A V_k = V_{k+1} H_{k+1,k};
rectangular ones use Golub-Kahan bidiagonalization A V_k = U_{k+1} B_{k+1,k}
with B lower bidiagonal (diagonal alphas, subdiagonal betas).  Classical
Gram-Schmidt with one full re-orthogonalization pass keeps the bases
orthonormal well below the downstream sign-test tolerances; the columns of
A V_k are stored explicitly as computed.
"""

import numpy as np

from .sparse import LinearOperator, triangular_solve

# New directions whose norm falls below BREAKDOWN_REL times the running
# operator scale are treated as a happy breakdown.
BREAKDOWN_REL = 1e-12


class KrylovBasis:
    """Growing orthonormal basis, one instance per solver run."""

    def __init__(self, op, r0):
        r0 = np.asarray(r0, dtype=np.float64)
        if r0.shape[0] != op.nrows:
            raise ValueError("seed residual length must equal operator rows")
        nrm = np.linalg.norm(r0)
        if nrm == 0.0:
            raise ValueError("zero residual seed: system already solved")
        self.op = op
        self.mode = "arnoldi" if op.is_square else "golub_kahan"
        self.k = 0
        self.breakdown = False
        self._scale = 0.0
        n, m = op.ncols, op.nrows
        self._v = _GrowingColumns(n)
        self._av = _GrowingColumns(m)
        if self.mode == "arnoldi":
            self._v.append(r0 / nrm)
            self._hess_cols = []
        else:
            self._u = _GrowingColumns(m)
            self._u.append(r0 / nrm)
            self.alphas = []
            self.betas = []

    @property
    def v(self):
        """Basis columns produced so far (n x (k or k+1) depending on mode)."""
        return self._v.view()

    @property
    def av(self):
        """Cached products A v_j, one column per reached dimension (m x k)."""
        return self._av.view()

    @property
    def u(self):
        return self._u.view()

    @property
    def hess(self):
        """Arnoldi coefficients as a (k+1) x k Hessenberg matrix."""
        h = np.zeros((self.k + 1, self.k))
        for j, col in enumerate(self._hess_cols):
            h[: col.shape[0], j] = col
        return h

    def bidiagonal(self):
        """Golub-Kahan coefficients as a (k+1) x k lower-bidiagonal matrix."""
        b = np.zeros((self.k + 1, self.k))
        for j in range(self.k):
            b[j, j] = self.alphas[j]
            b[j + 1, j] = self.betas[j]
        return b

    def expand(self):
        """Advance the subspace one dimension.

        Returns (new_v, new_av) where new_av is the freshly cached product
        column and new_v the newly appended orthonormal column (None once
        a happy breakdown prevents further growth).  On breakdown the flag
        is set and the subspace contains the exact minimizer.
        """
        if self.breakdown:
            raise RuntimeError("cannot expand after breakdown")
        if self.mode == "arnoldi":
            return self._expand_arnoldi()
        return self._expand_golub_kahan()

    def _expand_arnoldi(self):
        j = self.k
        vj = self._v.column(j)
        w = self.op.matvec(vj)
        self._av.append(w.copy())
        self._scale = max(self._scale, np.linalg.norm(w))
        coeffs = np.zeros(j + 2)
        vmat = self._v.view()
        for _ in range(2):
            proj = vmat.T @ w
            w = w - vmat @ proj
            coeffs[: j + 1] += proj
        nrm = np.linalg.norm(w)
        self.k += 1
        if nrm <= BREAKDOWN_REL * self._scale:
            self.breakdown = True
            self._hess_cols.append(coeffs[: j + 1])
            return None, self._av.column(j)
        coeffs[j + 1] = nrm
        self._hess_cols.append(coeffs)
        new_v = w / nrm
        self._v.append(new_v)
        return new_v, self._av.column(j)

    def _expand_golub_kahan(self):
        j = self.k
        uj = self._u.column(j)
        vnew = self.op.rmatvec(uj)
        self._scale = max(self._scale, np.linalg.norm(vnew))
        if j > 0:
            vnew = vnew - self.betas[j - 1] * self._v.column(j - 1)
        vmat = self._v.view()
        if j > 0:
            vnew = vnew - vmat @ (vmat.T @ vnew)
        alpha = np.linalg.norm(vnew)
        if alpha <= BREAKDOWN_REL * max(self._scale, 1e-300):
            self.breakdown = True
            return None, None
        vnew = vnew / alpha
        av = self.op.matvec(vnew)
        self._av.append(av)
        self._scale = max(self._scale, np.linalg.norm(av))
        self._v.append(vnew)
        self.alphas.append(alpha)
        self.k += 1

        unew = av - alpha * uj
        umat = self._u.view()
        unew = unew - umat @ (umat.T @ unew)
        beta = np.linalg.norm(unew)
        self.betas.append(beta)
        if beta <= BREAKDOWN_REL * self._scale:
            self.breakdown = True
            return vnew, av
        self._u.append(unew / beta)
        return vnew, av


class _GrowingColumns:
    """Column buffer doubling its capacity on demand."""

    def __init__(self, nrows):
        self._nrows = nrows
        self._cap = 8
        self._n = 0
        self._buf = np.zeros((nrows, self._cap), order="F")

    def append(self, col):
        if self._n == self._cap:
            self._cap *= 2
            buf = np.zeros((self._nrows, self._cap), order="F")
            buf[:, : self._n] = self._buf[:, : self._n]
            self._buf = buf
        self._buf[:, self._n] = col
        self._n += 1

    def view(self):
        return self._buf[:, : self._n]

    def column(self, j):
        return self._buf[:, j]


class PreconditionedOperator(LinearOperator):
    """Right-preconditioned composition with a triangular factor.

    apply(x) = A (L^-1 x) by default; with ``transpose_factor`` the solve
    uses L^T instead, which is the orientation wanted when L L^T
    approximates A^T A.  ``recover`` maps subspace coefficients back to the
    original variables with one more triangular solve.
    """

    def __init__(self, a, l, transpose_factor=False):
        if l.nrows != l.ncols or l.nrows != a.ncols:
            raise ValueError("factor must be square with size ncols(A)")
        self.a = a
        self.l = l
        self.transpose_factor = transpose_factor
        self.nrows = a.nrows
        self.ncols = a.ncols

    def matvec(self, x):
        return self.a.matvec(triangular_solve(self.l, x, transposed=self.transpose_factor))

    def rmatvec(self, y):
        return triangular_solve(
            self.l, self.a.rmatvec(y), transposed=not self.transpose_factor
        )

    def recover(self, x):
        return triangular_solve(self.l, x, transposed=self.transpose_factor)


def preconditioned_operator(a, l):
    """Compose A with a lower-triangular right preconditioner: x -> A (L^-1 x)."""
    return PreconditionedOperator(a, l)
