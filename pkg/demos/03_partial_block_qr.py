"""Orthogonalize a block of candidate directions, keeping only what is safe.

The block is projected against the existing basis twice, then factored by
Cholesky QR with a per-column condition watchdog.  When the next column
would push the triangular factor past the limit, the factorization stops
and the well-conditioned prefix survives.
"""

import numpy as np

from sstep import bcgs2_partial_cholqr

rng = np.random.default_rng(3)
n = 200
q0 = np.linalg.qr(rng.standard_normal((n, 4)))[0]  # existing orthonormal basis

# six candidates whose later columns are nearly dependent on the earlier ones
cand = rng.standard_normal((n, 6))
cand[:, 4] = cand[:, 0] + 1e-9 * rng.standard_normal(n)
cand[:, 5] = cand[:, 1] - 1e-10 * rng.standard_normal(n)

out = bcgs2_partial_cholqr(q0, cand, cond_limit=1e7)
print("candidates offered:", cand.shape[1])
print("columns accepted:  ", out.p, f"(stopped by {out.stopped_by!r})")
print("condition trace:   ", [f"{v:.2e}" for v in out.cond_trace])

q = np.hstack([q0, out.q_new])
print("\northogonality of the extended basis:",
      f"{np.max(np.abs(q.T @ q - np.eye(q.shape[1]))):.2e}")

# the coefficient block reproduces the accepted candidates
recon = np.hstack([q0, out.q_new]) @ out.r_hat[:, 1 : out.p + 1]
print("accepted candidates reconstructed:",
      np.allclose(recon, cand[:, : out.p], atol=1e-12))
