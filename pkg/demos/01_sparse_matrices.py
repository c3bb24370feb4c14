"""Build sparse matrices four ways and scale one of them.

Shows the CSR container, the structured generators, Matrix Market
parsing, and two-sided equilibration with exact solution recovery.
"""

import os
import tempfile

import numpy as np

from sstep import SparseMatrix, equilibrate, gen_diagonal, gen_laplace2d, parse_matrix_market

# from triplets, duplicates summed
a = SparseMatrix.from_coo(3, [0, 1, 2, 0, 0], [0, 1, 2, 2, 2], [2.0, 3.0, 4.0, 1.0, 1.0])
print("triplet build:\n", a.to_dense())

# structured generators
d = gen_diagonal(5, 0.1, 10.0)
print("\ndiagonal spectrum:", np.diag(d.to_dense()))
lap = gen_laplace2d(3)
print("2d laplacian: n =", lap.n, " nnz =", lap.nnz)

# matrix market round trip
text = """%%MatrixMarket matrix coordinate real symmetric
% 2d example, lower triangle stored
3 3 4
1 1 2.0
2 2 2.0
3 3 2.0
2 1 -1.0
"""
with tempfile.NamedTemporaryFile("w", suffix=".mtx", delete=False) as f:
    f.write(text)
    path = f.name
m = parse_matrix_market(path)
os.unlink(path)
print("\nparsed symmetric file:\n", m.to_dense())

# column equilibration: unit column norms, then recover x for the original system
a2 = SparseMatrix.from_coo(3, [0, 1, 2], [0, 1, 2], [100.0, 1.0, 0.01])
b = np.array([1.0, 1.0, 1.0])
a_eq, eq = equilibrate(a2, "column")
print("\nequilibrated column norms:", a_eq.column_norms())
x_eq = np.linalg.solve(a_eq.to_dense(), eq.apply_rhs(b))
x = eq.recover_solution(x_eq)
print("recovered solution solves the original system:",
      np.allclose(a2.to_dense() @ x, b))
