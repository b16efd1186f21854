import json
import math

import pytest

from phasesync.verifier import (CLAIMS, REGISTRY, CheckResult, VerifierConfig,
                                format_report, run_suite, total_violations)

SMALL = VerifierConfig(trials=4, sizes=(20, 60), loo_samples=3, max_workers=2)


@pytest.fixture(scope="module")
def small_results():
    return run_suite(SMALL, master_seed=1)


def test_registry_covers_every_claim():
    covered = set()
    for check in REGISTRY:
        assert check.claims, f"{check.check_id} declares no claim"
        for claim in check.claims:
            assert claim in CLAIMS, f"{check.check_id} uses unknown claim {claim}"
            covered.add(claim)
    missing = set(CLAIMS) - covered
    assert not missing, f"claims without a registered check: {sorted(missing)}"


def test_registry_ids_unique_and_stated():
    ids = [c.check_id for c in REGISTRY]
    assert len(ids) == len(set(ids))
    assert all(c.statement for c in REGISTRY)


def test_small_suite_clean(small_results):
    assert len(small_results) == len(REGISTRY)
    for res in small_results:
        assert res.status == "ok", f"{res.check_id}: {res.status}"
        assert res.failures == 0, f"{res.check_id} failed {res.failures} trials"
    assert total_violations(small_results) == 0


def test_suite_deterministic(small_results):
    again = run_suite(SMALL, master_seed=1)
    for a, b in zip(small_results, again):
        assert a.check_id == b.check_id
        assert a.trials == b.trials
        assert a.worst_slack == b.worst_slack
        assert a.params_digest == b.params_digest


def test_report_formats(small_results):
    text = format_report(small_results)
    assert small_results[0].check_id in text
    line = small_results[0].to_json()
    parsed = json.loads(line)
    assert parsed["check_id"] == small_results[0].check_id
    nonfinite = CheckResult("x", 0, 0, -math.inf, "d")
    assert json.loads(nonfinite.to_json())["worst_slack"] is None


def test_adversarial_mode_skips_contraction_checks():
    cfg = VerifierConfig(trials=2, sizes=(20,), loo_samples=2,
                         adversarial=True, max_workers=2)
    results = run_suite(cfg, master_seed=3)
    by_id = {r.check_id: r for r in results}
    for check in REGISTRY:
        res = by_id[check.check_id]
        if check.uses_contraction:
            assert res.status == "precondition-unmet"
            assert res.trials == 0 and res.failures == 0
        else:
            assert res.status == "ok"
    assert total_violations(results) == 0


def test_config_validation():
    with pytest.raises(ValueError):
        VerifierConfig(trials=0)
    with pytest.raises(ValueError):
        VerifierConfig(sizes=(2,))
    with pytest.raises(ValueError):
        VerifierConfig(tolerance=0.0)
