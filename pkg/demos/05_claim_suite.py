"""Run the quantitative-claim verification suite at demo scale.

Every registered check samples inputs satisfying its claim's
preconditions, evaluates both sides of the inequality, and reports the
worst slack seen.  The acceptance configuration is
``phasesync verify-lemmas --trials 50 --seed 42``.
"""

from phasesync import VerifierConfig, run_suite
from phasesync.verifier import format_report, total_violations

config = VerifierConfig(trials=6, sizes=(20, 80), loo_samples=4)
results = run_suite(config, master_seed=42)
print(format_report(results))
print(f"\nviolations: {total_violations(results)}")
