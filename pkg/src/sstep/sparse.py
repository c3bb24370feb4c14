"""Sparse CSR storage, Matrix Market parsing, test-problem generators, equilibration.

All matrices are square with float64 values.  Within each row the column
indices are sorted strictly increasing, so the accumulation order of every
product is fixed left to right and repeated runs are bitwise reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as _sp


@dataclass
class SparseMatrix:
    """Square sparse matrix in CSR form.

    Parameters
    ----------
    n : int
        Matrix dimension.
    indptr : ndarray of int64, shape (n + 1,)
        Row pointer array.
    indices : ndarray of int64
        Column indices, sorted strictly increasing within each row.
    data : ndarray of float64
        Nonzero values, row-major.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    _handle: _sp.csr_matrix | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.indptr = np.ascontiguousarray(self.indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(self.indices, dtype=np.int64)
        self.data = np.ascontiguousarray(self.data, dtype=np.float64)
        if self.indptr.shape != (self.n + 1,):
            raise ValueError("indptr must have length n + 1")
        if self.indptr[0] != 0 or self.indptr[-1] != len(self.data):
            raise ValueError("indptr endpoints inconsistent with data length")
        if len(self.indices) != len(self.data):
            raise ValueError("indices and data length mismatch")
        if len(self.indices) and (self.indices.min() < 0 or self.indices.max() >= self.n):
            raise ValueError("column index out of range")
        # strictly increasing columns per row also rules out duplicates
        for i in range(self.n):
            cols = self.indices[self.indptr[i] : self.indptr[i + 1]]
            if len(cols) > 1 and np.any(np.diff(cols) <= 0):
                raise ValueError(f"row {i}: column indices not strictly increasing")

    @classmethod
    def from_coo(cls, n: int, rows, cols, vals) -> "SparseMatrix":
        """Build from triplets; duplicate entries are summed."""
        m = _sp.coo_matrix(
            (np.asarray(vals, dtype=np.float64), (rows, cols)), shape=(n, n)
        ).tocsr()
        m.sum_duplicates()
        m.sort_indices()
        return cls(n, m.indptr, m.indices, m.data)

    @classmethod
    def from_dense(cls, a) -> "SparseMatrix":
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("dense input must be square")
        rows, cols = np.nonzero(a)
        return cls.from_coo(a.shape[0], rows, cols, a[rows, cols])

    @property
    def nnz(self) -> int:
        return len(self.data)

    def _scipy(self) -> _sp.csr_matrix:
        if self._handle is None:
            self._handle = _sp.csr_matrix(
                (self.data, self.indices, self.indptr), shape=(self.n, self.n)
            )
        return self._handle

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """y = A x with fixed left-to-right accumulation within each row."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n,):
            raise ValueError(f"operand length {x.shape} incompatible with n={self.n}")
        return self._scipy().dot(x)

    def diagonal(self) -> np.ndarray:
        return self._scipy().diagonal()

    def column_norms(self) -> np.ndarray:
        """Euclidean norm of each column."""
        return np.sqrt(np.bincount(self.indices, weights=self.data**2, minlength=self.n))

    def scale_columns(self, c: np.ndarray) -> "SparseMatrix":
        """Return A diag(c)."""
        c = np.asarray(c, dtype=np.float64)
        return SparseMatrix(self.n, self.indptr.copy(), self.indices.copy(), self.data * c[self.indices])

    def scale_values(self, a: float) -> "SparseMatrix":
        """Return a A."""
        return SparseMatrix(self.n, self.indptr.copy(), self.indices.copy(), self.data * a)

    def to_dense(self) -> np.ndarray:
        return self._scipy().toarray()


def _fail(lineno: int, msg: str):
    raise ValueError(f"line {lineno}: {msg}")


def parse_matrix_market(path) -> SparseMatrix:
    """Read a square real Matrix Market coordinate file.

    Supports the ``general`` and ``symmetric`` qualifiers.  Symmetric files
    must store the lower triangle and are expanded eagerly.  Duplicate
    entries are summed.  Malformed input raises ValueError naming the
    offending line number.
    """
    with open(path, "r", encoding="ascii", errors="replace") as f:
        lines = f.read().splitlines()
    if not lines:
        raise ValueError("line 1: empty file")
    header = lines[0].split()
    if len(header) != 5 or header[0] != "%%MatrixMarket":
        _fail(1, "expected header '%%MatrixMarket matrix coordinate <field> <symmetry>'")
    _, obj, fmt, fieldkind, sym = (w.lower() for w in header)
    if obj != "matrix":
        _fail(1, f"unsupported object '{obj}'")
    if fmt != "coordinate":
        _fail(1, f"unsupported format '{fmt}' (only coordinate)")
    if fieldkind != "real":
        _fail(1, f"unsupported field '{fieldkind}' (only real)")
    if sym not in ("general", "symmetric"):
        _fail(1, f"unsupported symmetry '{sym}' (only general or symmetric)")

    k = 1
    while k < len(lines) and (lines[k].startswith("%") or not lines[k].strip()):
        k += 1
    if k == len(lines):
        _fail(len(lines), "missing size line")
    size = lines[k].split()
    if len(size) != 3:
        _fail(k + 1, "size line must be 'rows cols nnz'")
    try:
        nrows, ncols, nnz = (int(w) for w in size)
    except ValueError:
        _fail(k + 1, "size line entries must be integers")
    if nrows != ncols:
        _fail(k + 1, f"matrix must be square, got {nrows} x {ncols}")
    if nrows <= 0 or nnz < 0:
        _fail(k + 1, "dimensions must be positive")

    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz, dtype=np.float64)
    got = 0
    for lineno in range(k + 1, len(lines)):
        text = lines[lineno].strip()
        if not text:
            continue
        if got >= nnz:
            _fail(lineno + 1, f"more than {nnz} entries")
        parts = text.split()
        if len(parts) != 3:
            _fail(lineno + 1, "entry must be 'row col value'")
        try:
            i, j = int(parts[0]), int(parts[1])
            v = float(parts[2])
        except ValueError:
            _fail(lineno + 1, f"cannot parse entry '{text}'")
        if not (1 <= i <= nrows and 1 <= j <= ncols):
            _fail(lineno + 1, f"index ({i}, {j}) outside 1..{nrows}")
        if sym == "symmetric" and j > i:
            _fail(lineno + 1, "symmetric file must store the lower triangle")
        rows[got], cols[got], vals[got] = i - 1, j - 1, v
        got += 1
    if got != nnz:
        _fail(len(lines), f"expected {nnz} entries, found {got}")

    if sym == "symmetric":
        off = rows != cols
        mirror_r, mirror_c, mirror_v = cols[off], rows[off], vals[off]
        rows = np.concatenate([rows, mirror_r])
        cols = np.concatenate([cols, mirror_c])
        vals = np.concatenate([vals, mirror_v])
    return SparseMatrix.from_coo(nrows, rows, cols, vals)


def gen_diagonal(n: int, lo: float, hi: float) -> SparseMatrix:
    """Diagonal matrix with n evenly spaced entries from lo to hi inclusive."""
    if n < 1:
        raise ValueError("n must be positive")
    d = np.linspace(lo, hi, n) if n > 1 else np.array([float(lo)])
    indptr = np.arange(n + 1, dtype=np.int64)
    return SparseMatrix(n, indptr, np.arange(n, dtype=np.int64), d)


def gen_laplace2d(n: int) -> SparseMatrix:
    """5-point Laplacian on an n x n grid with Dirichlet boundaries.

    Nodes are ordered lexicographically: node (i, j) -> i n + j.
    Diagonal entries are 4, neighbor entries are -1.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if n == 1:
        return gen_diagonal(1, 4.0, 4.0)
    N = n * n
    main = np.full(N, 4.0)
    ew = -np.ones(N - 1)
    ew[np.arange(1, N) % n == 0] = 0.0  # no coupling across grid row boundaries
    ns = -np.ones(N - n) if N > n else np.zeros(0)
    m = _sp.diags([main, ew, ew, ns, ns], [0, 1, -1, n, -n], format="csr")
    m.eliminate_zeros()
    m.sort_indices()
    return SparseMatrix(N, m.indptr, m.indices, m.data)


def gen_laplace3d(n: int) -> SparseMatrix:
    """7-point Laplacian on an n x n x n grid with Dirichlet boundaries.

    Nodes are ordered lexicographically: node (i, j, k) -> (i n + j) n + k.
    Diagonal entries are 6, neighbor entries are -1.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if n == 1:
        return gen_diagonal(1, 6.0, 6.0)
    N = n * n * n
    main = np.full(N, 6.0)
    ez = -np.ones(N - 1)
    ez[np.arange(1, N) % n == 0] = 0.0
    ey = -np.ones(N - n) if N > n else np.zeros(0)
    if N > n:
        ey[np.arange(n, N) % (n * n) < n] = 0.0
    ex = -np.ones(N - n * n) if N > n * n else np.zeros(0)
    m = _sp.diags(
        [main, ez, ez, ey, ey, ex, ex], [0, 1, -1, n, -n, n * n, -(n * n)], format="csr"
    )
    m.eliminate_zeros()
    m.sort_indices()
    return SparseMatrix(N, m.indptr, m.indices, m.data)


@dataclass
class Equilibration:
    """Diagonal scaling record for A' = D_r A D_c.

    The transformed system is A' x' = D_r b with x = D_c x'.
    ``row_scale`` and ``col_scale`` are scalars, arrays, or None (identity).
    """

    mode: str
    row_scale: object = None
    col_scale: object = None

    def apply_rhs(self, b: np.ndarray) -> np.ndarray:
        if self.row_scale is None:
            return b
        return b * self.row_scale

    def recover_solution(self, x: np.ndarray) -> np.ndarray:
        if self.col_scale is None:
            return x
        return x * self.col_scale


def equilibrate(a: SparseMatrix, mode: str, spectral_radius: float | None = None):
    """Scale a matrix for solving, returning (scaled matrix, Equilibration).

    mode 'none'   : identity.
    mode 'scalar' : D_r = D_c = I / sqrt(alpha) with alpha = spectral_radius,
                    so A' = A / alpha.
    mode 'column' : D_r = I, D_c = diag(1 / column 2-norm), unit-norm columns.
    """
    if mode == "none":
        return a, Equilibration("none")
    if mode == "scalar":
        if spectral_radius is None:
            raise ValueError("scalar equilibration needs a spectral radius estimate")
        alpha = float(spectral_radius)
        if not np.isfinite(alpha) or alpha <= 0.0:
            raise ValueError(f"spectral radius must be positive, got {alpha}")
        s = 1.0 / np.sqrt(alpha)
        return a.scale_values(1.0 / alpha), Equilibration("scalar", row_scale=s, col_scale=s)
    if mode == "column":
        norms = a.column_norms()
        zero = np.nonzero(norms == 0.0)[0]
        if len(zero):
            raise ValueError(f"column {zero[0]} has zero norm, cannot equilibrate")
        c = 1.0 / norms
        return a.scale_columns(c), Equilibration("column", row_scale=None, col_scale=c)
    raise ValueError(f"unknown equilibration mode '{mode}'")
