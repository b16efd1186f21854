"""The Lipschitz surrogate of the power-method map and its leave-one-out
counterpart.

Replacing the entrywise normalization x -> x/|x| by the floor map
x -> x/max(|x|, t) makes the iteration a contraction once t >= 2 sigma ||W||:
gaps halve every step, the fixed point is unique, and zeroing one row and
column of the noise moves the whole iterate sequence by at most 3 in
Euclidean norm.  That uniform stability is what decouples the noise row
from the estimate in the analysis.
"""

import numpy as np

from phasesync import (SurrogateParams, apply_g, fixed_point_g,
                       fixed_point_g_loo, make_instance, operator_norm)

n, sigma = 200, 3.0
obs = make_instance(n, sigma, seed=11)
opnorm_w = operator_norm(obs.noise.entries, tol=1e-8).value
params = SurrogateParams(s=float(n), t=2.02 * sigma * opnorm_w)

z = obs.truth.entries
print("gap per iteration (halves under the contraction):")
gap_prev = None
for step in range(8):
    w = apply_g(z, params, obs).entries
    gap = np.linalg.norm(w - z)
    note = f"  ratio {gap / gap_prev:.3f}" if gap_prev else ""
    print(f"  T={step + 1}: {gap:.3e}{note}")
    z, gap_prev = w, gap

run = fixed_point_g(params, obs, opnorm_w=opnorm_w)
print(f"\nfixed point reached in {run.iterations} iterations, "
      f"residual {run.residual:.2e}")

print("\nleave-one-out gaps (uniformly below 3):")
for j in (0, 50, 150):
    bundle = fixed_point_g_loo(params, obs, j, record_trace=True,
                               opnorm_w=opnorm_w)
    final = np.linalg.norm(run.iterate.entries - bundle.fixed_point.entries)
    print(f"  j={j:3d}: peak {np.max(bundle.iterate_trace_norm_gaps):.3f}, "
          f"final {final:.3f}")
