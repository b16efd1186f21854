"""Acceptance suite.

One test per criterion, each printing a single pass/fail line (run with
``pytest -s tests/test_acceptance.py`` to see them).  Tolerances are pinned
here and nowhere else.  The figure-rendering criterion lives with the
separate plotting package under plots/.
"""

import math

import numpy as np
import pytest

from phasesync.cli import main as cli_main
from phasesync.estimators import brute_force_mle, solve_mle
from phasesync.harness import decay_preset, run_sweep, run_trial, summarize
from phasesync.linops import operator_norm
from phasesync.losses import loss_ell1
from phasesync.model import derive_rng, derive_seed, make_instance, sample_noise
from phasesync.surrogate import SurrogateParams, fixed_point_g, fixed_point_g_loo

pytestmark = pytest.mark.acceptance

_ACC_SEED = 20240042


def _report(num: int, ok: bool, detail: str):
    print(f"[criterion {num}] {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num}: {detail}"


@pytest.fixture(scope="module")
def tightness_records():
    """Criterion-2 trial records, shared with the crude-bound criterion."""
    records = {}
    for m in (2, 300):
        rows = []
        for k in range(40):
            seed = derive_seed(_ACC_SEED, 2, m, k)
            rows.append(run_trial(300, 2.4, m, seed=seed, trial_id=k))
        records[m] = rows
    return records


@pytest.fixture(scope="module")
def decay_csv(tmp_path_factory):
    out = tmp_path_factory.mktemp("decay") / "decay.csv"
    cfg = decay_preset(str(out), trials=50, master_seed=_ACC_SEED)
    return run_sweep(cfg)


def test_criterion_1_lemma_suite_green():
    code = cli_main(["verify-lemmas", "--trials", "50", "--seed", "42"])
    _report(1, code == 0, f"verify-lemmas exit code {code}")


def test_criterion_2_tightness_reproduction(tightness_records):
    ok = True
    details = []
    for m, rows in tightness_records.items():
        tight = sum(r.tight for r in rows)
        details.append(f"m={m}: {tight}/40 tight")
        ok &= tight >= 38
        ok &= all(r.ellm_bm_mle <= 1e-9 for r in rows if r.tight)
    _report(2, ok, "; ".join(details))


def test_criterion_3_exponential_decay_shape(decay_csv):
    summary = summarize(decay_csv)
    cells = sorted(summary, key=lambda c: c["noise_ratio"])
    ratios = [round(c["noise_ratio"]) for c in cells]
    assert ratios == [10, 15, 20, 25, 30, 40, 50, 60]
    frob = [c["mean_frob_sq"] for c in cells]
    inversions = sum(1 for a, b in zip(frob, frob[1:]) if b > a + 1e-12)
    mean = {r: c["mean_ellm_bm_mle"] for r, c in zip(ratios, cells)}
    tight60 = next(c["tight_fraction"] for r, c in zip(ratios, cells) if r == 60)
    ok = (inversions <= 1 and tight60 == 1.0
          and mean[10] > 0 and mean[10] >= 5 * mean[30])
    _report(3, ok, f"inversions={inversions} tight@60={tight60} "
                   f"mean@10={mean[10]:.3e} mean@30={mean[30]:.3e}")


def test_criterion_4_oracle_equivalence():
    n, k = 4, 72
    slack = 2 * n**2 * (2 * math.pi / k)
    ok = True
    worst = math.inf
    for sigma in (0.3, 0.8):
        for trial in range(20):
            obs = make_instance(n, sigma, derive_seed(_ACC_SEED, 4, trial))
            run = solve_mle(obs)
            grid = brute_force_mle(obs, k, refine=False)
            refined = brute_force_mle(obs, k, refine=True)
            ok &= run.objective >= grid.objective - slack
            gap = abs(refined.objective - run.objective)
            worst = min(worst, 1e-8 - gap)
            ok &= gap < 1e-8
    _report(4, ok, f"worst refined-objective slack {worst:.2e}")


def test_criterion_5_crude_bound(tightness_records):
    ok = True
    worst = math.inf
    for rows in tightness_records.values():
        for r in rows:
            if not (r.mle_converged and r.bm_converged):
                continue
            cap = 8 * r.sigma * r.opnorm_w / r.n + 1e-6
            worst = min(worst, cap - r.ell1_mle_truth, cap - r.ellm_bm_truth)
            ok &= r.ell1_mle_truth <= cap and r.ellm_bm_truth <= cap
    _report(5, ok, f"worst slack {worst:.3e}")


def test_criterion_6_error_scaling():
    n = 500
    sigmas = (0.25, 0.5, 1.0, 2.0)
    means = []
    for sigma in sigmas:
        vals = []
        for trial in range(50):
            obs = make_instance(n, sigma, derive_seed(_ACC_SEED, 6, trial))
            run = solve_mle(obs)
            vals.append(loss_ell1(run.iterate, obs.truth))
        means.append(np.mean(vals))
    slope = np.polyfit(np.log(sigmas), np.log(means), 1)[0]
    _report(6, 1.7 <= slope <= 2.3, f"log-log slope {slope:.3f}")


def test_criterion_7_wigner_edge():
    hits = 0
    for seed in range(100):
        w = sample_noise(1000, derive_seed(_ACC_SEED, 7, seed)).entries
        ratio = operator_norm(w, tol=1e-6).value / math.sqrt(1000)
        hits += 1.9 <= ratio <= 2.1
    _report(7, hits >= 95, f"{hits}/100 seeds inside [1.9, 2.1]")


def test_criterion_8_leave_one_out_gaps():
    n, sigma = 200, 3.0
    ok = True
    worst = -math.inf
    for inst in range(10):
        obs = make_instance(n, sigma, derive_seed(_ACC_SEED, 8, inst))
        opn = operator_norm(obs.noise.entries, tol=1e-10).value
        params = SurrogateParams(s=float(n), t=2.02 * sigma * opn)
        plain = fixed_point_g(params, obs, opnorm_w=opn).iterate.entries
        rng = derive_rng(_ACC_SEED, 8, inst)
        for j in rng.choice(n, size=10, replace=False):
            bundle = fixed_point_g_loo(params, obs, int(j), record_trace=True,
                                       opnorm_w=opn)
            peak = float(np.max(bundle.iterate_trace_norm_gaps))
            final = float(np.linalg.norm(plain - bundle.fixed_point.entries))
            worst = max(worst, peak, final)
            ok &= peak <= 3 + 1e-9 and final <= 3 + 1e-9
    _report(8, ok, f"largest gap {worst:.6f} (cap 3)")
