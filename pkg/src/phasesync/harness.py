"""Monte Carlo experiment engine: parameter sweeps over (n, sigma, m),
per-trial estimation and loss measurement, CSV persistence, and summary
tables.

Trials are the unit of parallelism.  Every trial owns its RNG stream,
derived as seed_trial = hash(master_seed, trial_id), so any thread count
produces the same rows; results are gathered and written sorted by
(n, sigma, m, trial_id).  The wall-clock column is the only
nondeterministic field in a row.
"""

from __future__ import annotations

import csv
import json
import math
import os
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import chain_parameters
from .estimators import random_phase_init, solve_bm, solve_mle
from .linops import operator_norm
from .losses import DEFAULT_TIGHTNESS_TOL, frob_discrepancy, loss_ell1, loss_ellm
from .model import derive_seed, make_instance
from .surrogate import count_small_coordinates

CSV_COLUMNS = (
    "trial_id", "n", "sigma", "m", "seed", "noise_ratio",
    "ell1_mle_truth", "ellm_bm_truth", "ellm_bm_mle", "frob_sq_normalized",
    "tight", "small_coord_count", "delta_used", "epsilon_used", "opnorm_w",
    "mle_iters", "mle_residual", "mle_converged",
    "bm_iters", "bm_residual", "bm_converged", "runtime_ms",
)

_INT_COLUMNS = {"trial_id", "n", "m", "seed", "tight", "small_coord_count",
                "mle_iters", "mle_converged", "bm_iters", "bm_converged"}


class SchemaError(ValueError):
    """A CSV file does not carry the expected trial-record columns."""


def worker_count() -> int:
    env = os.environ.get("PHASESYNC_THREADS")
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


@dataclass(frozen=True)
class SweepConfig:
    n_values: tuple[int, ...]
    m_values: tuple[int | str, ...]
    trials: int
    master_seed: int
    output_path: str
    sigma_values: tuple[float, ...] = ()
    ratio_values: tuple[float, ...] = ()
    tol: float = 0.0            # 0 means the per-size default
    max_iter: int = 10000
    record_traces: bool = False
    restarts: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.n_values or any(n < 2 for n in self.n_values):
            raise ValueError("all n values must be at least 2")
        if bool(self.sigma_values) == bool(self.ratio_values):
            raise ValueError("provide exactly one of sigma_values / ratio_values")
        if any(s <= 0 for s in self.sigma_values) or any(r <= 0 for r in self.ratio_values):
            raise ValueError("sigma and ratio values must be positive")
        for m in self.m_values:
            if m != "n" and (not isinstance(m, int) or m < 1):
                raise ValueError("m values must be positive integers or 'n'")


@dataclass(frozen=True)
class TrialRecord:
    trial_id: int
    n: int
    sigma: float
    m: int
    seed: int
    noise_ratio: float
    ell1_mle_truth: float
    ellm_bm_truth: float
    ellm_bm_mle: float
    frob_sq_normalized: float
    tight: int
    small_coord_count: int
    delta_used: float
    epsilon_used: float
    opnorm_w: float
    mle_iters: int
    mle_residual: float
    mle_converged: int
    bm_iters: int
    bm_residual: float
    bm_converged: int
    runtime_ms: float

    def __post_init__(self):
        if self.tight != int(self.ellm_bm_mle <= DEFAULT_TIGHTNESS_TOL):
            raise ValueError("tight flag inconsistent with the discrepancy")
        if self.frob_sq_normalized > 2.0 * self.ellm_bm_mle + 1e-9:
            raise ValueError("frobenius discrepancy exceeds twice the loss")

    def row(self) -> list[str]:
        out = []
        for name in CSV_COLUMNS:
            val = getattr(self, name)
            out.append(str(val) if name in _INT_COLUMNS else repr(float(val)))
        return out


def run_trial(n: int, sigma: float, m: int, seed: int,
              tol: float | None = None, max_iter: int = 10000,
              restarts: int = 0, trial_id: int = 0) -> TrialRecord:
    """One full trial: instance generation, both estimators, all losses."""
    t0 = time.perf_counter()
    obs = make_instance(n, sigma, seed)
    opn = operator_norm(obs.noise.entries, tol=1e-10).value

    mle = solve_mle(obs, tol=tol, max_iter=max_iter)
    for attempt in range(restarts):
        if mle.converged:
            break
        retry = solve_mle(obs, init=random_phase_init(n, derive_seed(seed, attempt)),
                          tol=tol, max_iter=max_iter)
        if retry.converged or retry.objective > mle.objective:
            mle = retry
    bm = solve_bm(obs, m, tol=tol, max_iter=max_iter)

    zhat = mle.iterate
    vhat = bm.iterate
    ell1_truth = loss_ell1(zhat, obs.truth)
    ellm_truth = loss_ellm(vhat, obs.truth)
    ellm_mle = loss_ellm(vhat, zhat)
    frob = frob_discrepancy(vhat, zhat)

    epsilon, delta, _ = chain_parameters(n, sigma, opn)
    small = count_small_coordinates(obs.y @ zhat.entries, delta * n)

    runtime_ms = (time.perf_counter() - t0) * 1e3
    return TrialRecord(
        trial_id=trial_id, n=n, sigma=float(sigma), m=m, seed=int(seed),
        noise_ratio=(n / sigma**2 if sigma > 0 else math.inf),
        ell1_mle_truth=ell1_truth, ellm_bm_truth=ellm_truth,
        ellm_bm_mle=ellm_mle, frob_sq_normalized=frob,
        tight=int(ellm_mle <= DEFAULT_TIGHTNESS_TOL), small_coord_count=small,
        delta_used=delta, epsilon_used=epsilon, opnorm_w=opn,
        mle_iters=mle.iterations, mle_residual=mle.residual,
        mle_converged=int(mle.converged),
        bm_iters=bm.iterations, bm_residual=bm.residual,
        bm_converged=int(bm.converged),
        runtime_ms=runtime_ms,
    )


def _cells(config: SweepConfig):
    for n in sorted(config.n_values):
        if config.sigma_values:
            sigmas = sorted(config.sigma_values)
        else:
            sigmas = sorted(math.sqrt(n / r) for r in config.ratio_values)
        for sigma in sigmas:
            ms = sorted(n if m == "n" else m for m in config.m_values)
            for m in ms:
                yield n, sigma, m


def run_sweep(config: SweepConfig) -> Path:
    """Execute the full grid and write the CSV plus a .meta.json sidecar."""
    tasks = []
    trial_id = 0
    for n, sigma, m in _cells(config):
        for _ in range(config.trials):
            seed = derive_seed(config.master_seed, trial_id)
            tasks.append((trial_id, n, sigma, m, seed))
            trial_id += 1

    tol = config.tol if config.tol > 0 else None

    def work(task):
        tid, n, sigma, m, seed = task
        return run_trial(n, sigma, m, seed, tol=tol, max_iter=config.max_iter,
                         restarts=config.restarts, trial_id=tid)

    workers = worker_count()
    if workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(work, tasks))
    else:
        records = [work(t) for t in tasks]
    records.sort(key=lambda r: (r.n, r.sigma, r.m, r.trial_id))

    out = Path(config.output_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow(rec.row())

    meta = {
        "config": asdict(config),
        "version": __version__,
        "platform": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "machine": platform.machine(),
            "system": platform.system(),
        },
    }
    meta_path = out.with_suffix(out.suffix + ".meta.json")
    meta_path.write_text(json.dumps(meta, indent=2, default=list) + "\n")

    validate_csv(out)
    return out


def read_csv(path) -> list[dict]:
    """Rows as dicts with numeric fields parsed; validates the schema."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("empty file, expected a header row") from None
        missing = [c for c in CSV_COLUMNS if c not in header]
        if missing:
            raise SchemaError("missing columns: " + ",".join(missing))
        idx = {c: header.index(c) for c in CSV_COLUMNS}
        rows = []
        for raw in reader:
            row = {}
            for c in CSV_COLUMNS:
                text = raw[idx[c]]
                row[c] = int(text) if c in _INT_COLUMNS else float(text)
            rows.append(row)
    return rows


def validate_csv(path) -> int:
    """Re-read a sweep file and re-check the per-row invariants."""
    rows = read_csv(path)
    for row in rows:
        if row["tight"] != int(row["ellm_bm_mle"] <= DEFAULT_TIGHTNESS_TOL):
            raise ValueError(f"row {row['trial_id']}: tight flag inconsistent")
        if row["frob_sq_normalized"] > 2.0 * row["ellm_bm_mle"] + 1e-9:
            raise ValueError(f"row {row['trial_id']}: loss connection violated")
    return len(rows)


def summarize(csv_path, overlay_c: float | None = None) -> list[dict]:
    """Per-(n, sigma, m) cell statistics of the discrepancy columns."""
    from .bounds import exp_bound

    rows = read_csv(csv_path)
    cells: dict[tuple, list[dict]] = {}
    for row in rows:
        cells.setdefault((row["n"], row["sigma"], row["m"]), []).append(row)
    summary = []
    for (n, sigma, m), group in sorted(cells.items()):
        ellm = np.array([g["ellm_bm_mle"] for g in group])
        frob = np.array([g["frob_sq_normalized"] for g in group])
        entry = {
            "n": n, "sigma": sigma, "m": m,
            "noise_ratio": n / sigma**2 if sigma > 0 else math.inf,
            "trials": len(group),
            "mean_ellm_bm_mle": float(ellm.mean()),
            "median_ellm_bm_mle": float(np.median(ellm)),
            "max_ellm_bm_mle": float(ellm.max()),
            "mean_frob_sq": float(frob.mean()),
            "tight_fraction": float(np.mean([g["tight"] for g in group])),
            "converged_fraction": float(np.mean(
                [g["mle_converged"] and g["bm_converged"] for g in group])),
        }
        if overlay_c is not None:
            entry["exp_bound"] = exp_bound(int(n), sigma, overlay_c)
        summary.append(entry)
    return summary


def format_summary(summary: list[dict]) -> str:
    if not summary:
        return "(no rows)"
    cols = list(summary[0].keys())
    lines = ["  ".join(f"{c:>18}" for c in cols)]
    for entry in summary:
        cells = []
        for c in cols:
            v = entry[c]
            cells.append(f"{v:>18}" if isinstance(v, int) else f"{v:>18.6g}")
        lines.append("  ".join(cells))
    return "\n".join(lines)


# Canned grids for the two headline experiments.

def decay_preset(output_path: str, trials: int = 50, master_seed: int = 2024,
                 n: int = 600, m_values: tuple = (2,)) -> SweepConfig:
    """Discrepancy-decay experiment: fixed n, sliding signal-to-noise ratio."""
    return SweepConfig(
        n_values=(n,), ratio_values=(10, 15, 20, 25, 30, 40, 50, 60),
        m_values=m_values, trials=trials, master_seed=master_seed,
        output_path=output_path)


def tightness_preset(output_path: str, trials: int = 40, master_seed: int = 2024,
                     n: int = 300, sigma: float = 2.4,
                     m_values: tuple = (2, "n")) -> SweepConfig:
    """Near-threshold tightness experiment."""
    return SweepConfig(
        n_values=(n,), sigma_values=(sigma,), m_values=m_values,
        trials=trials, master_seed=master_seed, output_path=output_path)
