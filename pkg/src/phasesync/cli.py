"""Command-line front end: generate / estimate / sweep / verify-lemmas /
summarize.

Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 verification
failure.  Errors print one machine-greppable line ``error: <tag>: <detail>``
on stderr.  All randomness flows from the explicit seeds.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness, instancefile, verifier
from .estimators import solve_bm, solve_mle, spectral_init_vector
from .losses import frob_discrepancy, loss_ell1, loss_ellm
from .model import make_instance


def _fail(tag: str, detail: str) -> int:
    print(f"error: {tag}: {detail}", file=sys.stderr)
    return 1


def _cmd_generate(args) -> int:
    obs = make_instance(args.n, args.sigma, args.seed,
                        ones_truth=(args.truth == "ones"))
    path = instancefile.save_instance(args.out, obs,
                                      include_truth=not args.no_truth)
    print(f"wrote {path} n={args.n} sigma={args.sigma!r} seed={args.seed}")
    return 0


def _cmd_estimate(args) -> int:
    obs, truth_embedded = instancefile.load_instance(args.infile)
    method = args.method
    tol = args.tol if args.tol > 0 else None
    if method == "eig":
        z = spectral_init_vector(obs)
        print(f"method=eig n={obs.n}")
        if truth_embedded:
            print(f"ell1_vs_truth={loss_ell1(z, obs.truth)!r}")
        return 0
    if method == "mle":
        run = solve_mle(obs, tol=tol, max_iter=args.max_iter)
    else:
        m = obs.n if method == "sdp" else args.m
        run = solve_bm(obs, m, tol=tol, max_iter=args.max_iter)
    print(f"method={method} n={obs.n} iterations={run.iterations} "
          f"residual={run.residual!r} converged={int(run.converged)} "
          f"objective={run.objective!r}")
    if method in ("bm", "sdp"):
        mle = solve_mle(obs, tol=tol, max_iter=args.max_iter)
        ellm = loss_ellm(run.iterate, mle.iterate)
        print(f"ellm_bm_mle={ellm!r} "
              f"frob_sq_normalized={frob_discrepancy(run.iterate, mle.iterate)!r} "
              f"tight={int(ellm <= 1e-9)}")
    if truth_embedded:
        if method == "mle":
            print(f"ell1_vs_truth={loss_ell1(run.iterate, obs.truth)!r}")
        else:
            print(f"ellm_vs_truth={loss_ellm(run.iterate, obs.truth)!r}")
    return 0


def parse_sweep_config(path) -> harness.SweepConfig:
    """key = value lines mirroring the SweepConfig fields; '#' comments."""
    import ast

    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    fields = {f for f in harness.SweepConfig.__dataclass_fields__}
    kwargs = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in fields:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        parsed = ast.literal_eval(val)
        if isinstance(parsed, list):
            parsed = tuple(parsed)
        kwargs[key] = parsed
    return harness.SweepConfig(**kwargs)


def _cmd_sweep(args) -> int:
    try:
        config = parse_sweep_config(args.config)
    except FileNotFoundError:
        return _fail("config-not-found", str(args.config))
    out = harness.run_sweep(config)
    print(f"wrote {out}")
    return 0


def _cmd_verify(args) -> int:
    config = verifier.VerifierConfig(trials=args.trials,
                                     adversarial=args.adversarial)
    results = verifier.run_suite(config, args.seed)
    for res in results:
        print(res.to_json())
    print()
    print(verifier.format_report(results))
    bad = verifier.total_violations(results)
    if bad:
        print(f"error: verification-failed: {bad} violation(s)", file=sys.stderr)
        return 3
    return 0


def _cmd_summarize(args) -> int:
    summary = harness.summarize(args.infile, overlay_c=args.overlay_c)
    print(harness.format_summary(summary))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phasesync",
        description="Phase-synchronization estimators and verification harness")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic instance file")
    gen.add_argument("--n", type=int, required=True, help="number of phases")
    gen.add_argument("--sigma", type=float, required=True, help="noise level")
    gen.add_argument("--seed", type=int, required=True, help="instance seed")
    gen.add_argument("--out", required=True, help="output path")
    gen.add_argument("--truth", choices=("random", "ones"), default="random",
                     help="truth sampling (ones gives a gauge-trivial instance)")
    gen.add_argument("--no-truth", action="store_true",
                     help="omit the truth vector from the file")
    gen.set_defaults(fn=_cmd_generate)

    est = sub.add_parser("estimate", help="run an estimator on an instance file")
    est.add_argument("--in", dest="infile", required=True, help="instance file")
    est.add_argument("--method", choices=("mle", "bm", "sdp", "eig"),
                     required=True, help="estimator to run")
    est.add_argument("--m", type=int, default=2, help="rank budget for bm")
    est.add_argument("--tol", type=float, default=0.0,
                     help="fixed-point tolerance (0 = default)")
    est.add_argument("--max-iter", type=int, default=10000, help="iteration cap")
    est.set_defaults(fn=_cmd_estimate)

    sw = sub.add_parser("sweep", help="run a Monte Carlo sweep from a config file")
    sw.add_argument("--config", required=True, help="key = value config file")
    sw.set_defaults(fn=_cmd_sweep)

    ver = sub.add_parser("verify-lemmas",
                         help="run the quantitative-claim suite")
    ver.add_argument("--trials", type=int, default=50, help="trials per check")
    ver.add_argument("--seed", type=int, default=42, help="master seed")
    ver.add_argument("--adversarial", action="store_true",
                     help="probe the contraction guards instead of asserting")
    ver.set_defaults(fn=_cmd_verify)

    summ = sub.add_parser("summarize", help="summarize a sweep CSV")
    summ.add_argument("--in", dest="infile", required=True, help="sweep CSV")
    summ.add_argument("--overlay-c", type=float, default=None,
                      help="scale for the exponential-bound overlay column")
    summ.set_defaults(fn=_cmd_summarize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse: 0 for --help, 2 for usage errors
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except FileNotFoundError as exc:
        return _fail("file-not-found", str(exc))
    except (ValueError, KeyError) as exc:
        return _fail("invalid-input", str(exc))
    except OSError as exc:
        return _fail("io-failure", str(exc))


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
