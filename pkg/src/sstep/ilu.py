"""Zero-fill incomplete LU factorization and its triangular solves.

The factorization runs row by row (IKJ ordering) on the exact sparsity
pattern of the input, so L + U has the same structure as A plus the unit
diagonal of L.  Application is two sparse triangular solves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as _sp
from scipy.sparse.linalg import spsolve_triangular

from .sparse import SparseMatrix


class ZeroPivotError(RuntimeError):
    """Raised when the factorization hits a zero pivot."""


@dataclass
class ILU0:
    """Factored preconditioner M = L U with unit lower triangular L."""

    l_factor: _sp.csr_matrix
    u_factor: _sp.csr_matrix

    def solve(self, r: np.ndarray) -> np.ndarray:
        """Return M^{-1} r."""
        y = spsolve_triangular(self.l_factor, r, lower=True, unit_diagonal=True)
        return spsolve_triangular(self.u_factor, y, lower=False)


def ilu0(a: SparseMatrix) -> ILU0:
    """Compute the ILU(0) factorization of a square sparse matrix.

    Every row must contain a structural diagonal entry.  A zero pivot
    raises ZeroPivotError naming the row.
    """
    n = a.n
    indptr, indices = a.indptr, a.indices
    luval = a.data.copy()

    diag_pos = np.empty(n, dtype=np.int64)
    for i in range(n):
        s, e = indptr[i], indptr[i + 1]
        p = s + np.searchsorted(indices[s:e], i)
        if p == e or indices[p] != i:
            raise ZeroPivotError(f"row {i}: diagonal entry missing from sparsity pattern")
        diag_pos[i] = p

    for i in range(n):
        s, e = indptr[i], indptr[i + 1]
        cols_i = indices[s:e]
        dpos = diag_pos[i]
        for pos in range(s, dpos):
            k = cols_i[pos - s]
            ukk = luval[diag_pos[k]]
            if ukk == 0.0:
                raise ZeroPivotError(f"row {k}: zero pivot")
            lik = luval[pos] / ukk
            luval[pos] = lik
            ks, ke = diag_pos[k] + 1, indptr[k + 1]
            if ks < ke:
                ucols = indices[ks:ke]
                # positions of row k's upper columns inside row i's pattern
                idx = np.searchsorted(cols_i, ucols)
                idx_c = np.minimum(idx, len(cols_i) - 1)
                match = (idx < len(cols_i)) & (cols_i[idx_c] == ucols)
                if match.any():
                    luval[s + idx[match]] -= lik * luval[ks:ke][match]

    zero_diag = np.nonzero(luval[diag_pos] == 0.0)[0]
    if len(zero_diag):
        raise ZeroPivotError(f"row {zero_diag[0]}: zero pivot")

    rowidx = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    low = indices < rowidx
    upp = ~low
    eye = np.arange(n, dtype=np.int64)
    l_factor = _sp.csr_matrix(
        (np.concatenate([luval[low], np.ones(n)]),
         (np.concatenate([rowidx[low], eye]), np.concatenate([indices[low], eye]))),
        shape=(n, n),
    )
    u_factor = _sp.csr_matrix(
        (luval[upp], (rowidx[upp], indices[upp])), shape=(n, n)
    )
    l_factor.sort_indices()
    u_factor.sort_indices()
    return ILU0(l_factor, u_factor)
