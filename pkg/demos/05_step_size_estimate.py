"""Predict how many basis columns are safe before generating any.

The growth model evaluates the basis polynomials at the probe spectrum.
The prediction depends on the shape of the spectrum, not its scale: one
stray large value makes early columns dominate and caps the safe step.
"""

import numpy as np

from sstep import DEFAULT_GROWTH_LIMIT, RitzSet, estimate_initial_step

print(f"growth limit: {DEFAULT_GROWTH_LIMIT:.3e}\n")

uniform = RitzSet.from_values(np.arange(1.0, 201.0))
est = estimate_initial_step(uniform, 1e7)
print(f"uniform 1..200            -> safe step {est.s0_star}")

scaled = RitzSet.from_values(np.arange(1.0, 201.0) * 1000.0)
est = estimate_initial_step(scaled, 1e7)
print(f"same shape, 1000x scale   -> safe step {est.s0_star}  (scale free)")

outlier = RitzSet.from_values(np.concatenate([np.arange(1.0, 200.0), [2000.0]]))
est = estimate_initial_step(outlier, 1e7)
print(f"one outlier at 2000       -> safe step {est.s0_star}")

# the per-column growth curve behind the uniform prediction
est = estimate_initial_step(uniform, 1e7)
g = est.col_norms
print("\nmodeled error-column norm (uniform case):")
for k in range(0, len(g), 25):
    print(f"  column {k + 1:>3}: {g[k]:.3e}")
