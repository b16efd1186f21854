"""Phase synchronization laboratory: estimators built on normalized-power
iterations, the Lipschitz-surrogate and leave-one-out machinery that
controls their discrepancy, and a Monte Carlo harness that measures it."""

__version__ = "0.1.0"

from .model import (PhaseVector, SoftPhaseVector, UnitColumnMatrix, NoiseMatrix,
                    Observation, generate_truth, sample_noise,
                    assemble_observation, make_instance, derive_rng, derive_seed)
from .linops import SpectralEstimate, hermitian_matvec, operator_norm, leading_eigenvector
from .losses import (LossReport, make_loss_report, loss_ell1, loss_ellm,
                     frob_discrepancy, DEFAULT_TIGHTNESS_TOL)
from .estimators import (FixedPointResult, BruteForceResult, apply_f1, apply_fm,
                         solve_mle, solve_bm, brute_force_mle,
                         spectral_init_vector, spectral_init_columns)
from .surrogate import (SurrogateParams, LeaveOneOutBundle, ContractViolation,
                        g_floor, apply_f1_prime, apply_g, fixed_point_g,
                        fixed_point_g_loo, mask_noise, count_small_coordinates,
                        grid_scalars)
from .bounds import (BoundInputs, make_bound_inputs, chain_parameters, exp_bound,
                     tightness_threshold, crude_loss_bound, gaussian_upper_tail,
                     gaussian_tail_envelope, corollary1_rhs,
                     corollary1_precondition_ok)
from .harness import (SweepConfig, TrialRecord, run_trial, run_sweep, summarize,
                      read_csv, validate_csv, CSV_COLUMNS, decay_preset,
                      tightness_preset)
from .verifier import VerifierConfig, CheckResult, run_suite, CLAIMS, REGISTRY

__all__ = [name for name in dir() if not name.startswith("_")]
