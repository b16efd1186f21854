"""Generate a synthetic instance and run all three estimators on it.

The observation is Y = z z^H + sigma W with hidden unit phases z and
Hermitian complex Gaussian noise W.  The rank-1 estimator iterates the
entrywise-normalized multiplication map; rank-m factorizations iterate the
column-normalized analogue, and m = n realizes the full semidefinite
relaxation.
"""

import numpy as np

from phasesync import (crude_loss_bound, frob_discrepancy, loss_ell1,
                       loss_ellm, make_instance, operator_norm, solve_bm,
                       solve_mle)

n, sigma, seed = 150, 1.2, 7
obs = make_instance(n, sigma, seed)
opnorm_w = operator_norm(obs.noise.entries, tol=1e-8).value
print(f"instance: n={n} sigma={sigma} ||W||/sqrt(n)={opnorm_w/np.sqrt(n):.3f}")

mle = solve_mle(obs)
print(f"\nrank-1 power method: {mle.iterations} iterations, "
      f"residual {mle.residual:.2e}, converged={mle.converged}")
print(f"  loss to truth     : {loss_ell1(mle.iterate, obs.truth):.3e}")
print(f"  crude bound       : {crude_loss_bound(sigma, opnorm_w, n):.3e}")

for m in (2, n):
    bm = solve_bm(obs, m)
    label = "SDP (m = n)" if m == n else f"rank-{m} factorization"
    print(f"\n{label}: {bm.iterations} iterations, converged={bm.converged}")
    print(f"  loss to truth          : {loss_ellm(bm.iterate, obs.truth):.3e}")
    print(f"  loss to rank-1 estimate: {loss_ellm(bm.iterate, mle.iterate):.3e}")
    print(f"  squared Frobenius gap  : {frob_discrepancy(bm.iterate, mle.iterate):.3e}")

print("\nBoth factorizations collapse onto the rank-1 estimate here: the "
      "noise level is inside the tightness region.")
