"""Render figures from phasesync sweep CSVs.

Consumes only the documented CSV schema (no dependency on the phasesync
package).  Three figures:

  decay          mean discrepancy vs the signal-to-noise ratio n/sigma^2 on
                 a log y axis, with a c*exp(-ratio/8) overlay; exact zeros
                 are drawn at a configurable floor with an open marker and
                 a caption note so tight cells stay visible
  tightness-map  heatmap of the tight fraction over the (n, sigma) grid
  scaling        log-log estimation error vs sigma, one line per n

Usage: render --in sweep.csv --figure decay --overlay-c 1.0 --out decay.png
Exit codes: 0 success, 1 runtime/schema failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# schema contract with the sweep harness
REQUIRED_COLUMNS = (
    "trial_id", "n", "sigma", "m", "seed", "noise_ratio",
    "ell1_mle_truth", "ellm_bm_truth", "ellm_bm_mle", "frob_sq_normalized",
    "tight", "small_coord_count", "delta_used", "epsilon_used", "opnorm_w",
    "mle_iters", "mle_residual", "mle_converged",
    "bm_iters", "bm_residual", "bm_converged", "runtime_ms",
)

FIGURES = ("decay", "tightness-map", "scaling")

DEFAULT_ZERO_FLOOR = 1e-12

# strip the writer's software tag so identical inputs give identical bytes
_PNG_METADATA = {"Software": None}


class SchemaMismatch(ValueError):
    def __init__(self, missing):
        super().__init__("missing columns: " + ",".join(missing))
        self.missing = tuple(missing)


@dataclass(frozen=True)
class PlotSpec:
    input_csv: str
    figure: str
    output_image: str
    overlay_c: float = 1.0
    zero_floor: float = DEFAULT_ZERO_FLOOR

    def __post_init__(self):
        if self.figure not in FIGURES:
            raise ValueError(f"unknown figure {self.figure!r}")
        if self.zero_floor <= 0:
            raise ValueError("zero floor must be positive")


def load_rows(path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise SchemaMismatch(missing)
        rows = []
        for raw in reader:
            rows.append({k: float(raw[k]) for k in REQUIRED_COLUMNS})
        return rows


def _group_mean(rows, key_fn, value_fn):
    acc: dict = {}
    for row in rows:
        acc.setdefault(key_fn(row), []).append(value_fn(row))
    return {k: float(np.mean(v)) for k, v in sorted(acc.items())}


def tightness_grid(rows):
    """(n values, sigma values, tight-fraction matrix) for the heatmap."""
    frac = _group_mean(rows, lambda r: (r["n"], r["sigma"]), lambda r: r["tight"])
    ns = sorted({k[0] for k in frac})
    sigmas = sorted({k[1] for k in frac})
    grid = np.full((len(sigmas), len(ns)), np.nan)
    for (n, sigma), val in frac.items():
        grid[sigmas.index(sigma), ns.index(n)] = val
    return ns, sigmas, grid


def _render_decay(rows, spec: PlotSpec, ax):
    means = _group_mean(rows, lambda r: r["noise_ratio"],
                        lambda r: r["frob_sq_normalized"])
    ratios = np.array(list(means))
    vals = np.array([means[r] for r in ratios])
    floor = spec.zero_floor
    pos = vals > floor
    ax.semilogy(ratios[pos], vals[pos], "o-", label="mean squared discrepancy")
    if np.any(~pos):
        ax.semilogy(ratios[~pos], np.full((~pos).sum(), floor), "o",
                    mfc="none", label=f"exact zero (drawn at {floor:g})")
    if ratios.size:
        grid = np.linspace(ratios.min(), ratios.max(), 200)
        ax.semilogy(grid, spec.overlay_c * np.exp(-grid / 8.0), "--",
                    label=f"{spec.overlay_c:g} * exp(-ratio/8)")
    ax.set_xlabel("n / sigma^2")
    ax.set_ylabel("normalized squared Frobenius discrepancy")
    ax.set_title("Factorization-to-estimate discrepancy vs signal-to-noise")
    if ratios.size:
        ax.legend()


def _render_tightness(rows, spec: PlotSpec, ax, fig):
    ns, sigmas, grid = tightness_grid(rows)
    if ns:
        mesh = ax.pcolormesh(np.arange(len(ns) + 1), np.arange(len(sigmas) + 1),
                             grid, vmin=0.0, vmax=1.0, cmap="viridis")
        ax.set_xticks(np.arange(len(ns)) + 0.5, [f"{int(n)}" for n in ns])
        ax.set_yticks(np.arange(len(sigmas)) + 0.5, [f"{s:g}" for s in sigmas])
        fig.colorbar(mesh, ax=ax, label="tight fraction")
    ax.set_xlabel("n")
    ax.set_ylabel("sigma")
    ax.set_title("Fraction of trials with zero discrepancy")


def _render_scaling(rows, spec: PlotSpec, ax):
    by_n: dict = {}
    for row in rows:
        by_n.setdefault(row["n"], []).append(row)
    for n, group in sorted(by_n.items()):
        means = _group_mean(group, lambda r: r["sigma"],
                            lambda r: r["ell1_mle_truth"])
        sigmas = np.array(list(means))
        vals = np.maximum([means[s] for s in sigmas], spec.zero_floor)
        ax.loglog(sigmas, vals, "o-", label=f"n = {int(n)}")
    ax.set_xlabel("sigma")
    ax.set_ylabel("mean estimation loss vs truth")
    ax.set_title("Estimation error scaling")
    if by_n:
        ax.legend()


def render(spec: PlotSpec) -> Path:
    rows = load_rows(spec.input_csv)
    fig, ax = plt.subplots(figsize=(7.0, 4.6), dpi=130)
    try:
        if spec.figure == "decay":
            _render_decay(rows, spec, ax)
        elif spec.figure == "tightness-map":
            _render_tightness(rows, spec, ax, fig)
        else:
            _render_scaling(rows, spec, ax)
        fig.tight_layout()
        out = Path(spec.output_image)
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out, metadata=_PNG_METADATA if out.suffix == ".png" else None)
    finally:
        plt.close(fig)
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render", description="Render figures from a phasesync sweep CSV")
    parser.add_argument("--in", dest="input_csv", required=True,
                        help="sweep CSV path")
    parser.add_argument("--figure", choices=FIGURES, required=True,
                        help="which figure to draw")
    parser.add_argument("--out", dest="output_image", required=True,
                        help="output image path")
    parser.add_argument("--overlay-c", type=float, default=1.0,
                        help="scale of the exponential overlay (decay figure)")
    parser.add_argument("--floor", type=float, default=DEFAULT_ZERO_FLOOR,
                        help="where exact zeros are drawn on the log axis")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    spec = PlotSpec(input_csv=args.input_csv, figure=args.figure,
                    output_image=args.output_image, overlay_c=args.overlay_c,
                    zero_floor=args.floor)
    try:
        out = render(spec)
    except SchemaMismatch as exc:
        print(f"error: schema-mismatch: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: io-failure: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
