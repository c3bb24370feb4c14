"""Track the condition number of a growing triangular factor in O(j) per column.

The incremental estimator sees one new column at a time and never
overestimates; the SVD recomputes from scratch each step and is the truth.
"""

import numpy as np

from sstep import ConditionEstimator, svd_condition

rng = np.random.default_rng(7)
j = 12
# a triangular factor with singular values spread over 6 decades
sig = np.geomspace(1.0, 1e-6, j)
m = np.linalg.qr(rng.standard_normal((j, j)))[0] @ np.diag(sig)
m = m @ np.linalg.qr(rng.standard_normal((j, j)))[0].T
r = np.linalg.qr(m)[1]

est = ConditionEstimator()
print(f"{'col':>3} {'incremental':>12} {'svd truth':>12} {'ratio':>7}")
for c in range(j):
    est.update(r[:c, c], float(r[c, c]))
    truth = svd_condition(r[: c + 1, : c + 1])
    print(f"{c + 1:>3} {est.estimate:>12.4e} {truth:>12.4e} {truth / est.estimate:>7.2f}")

print("\nthe estimate tracks the truth from below, within a small factor,")
print("at a per-column cost linear in the column height")
