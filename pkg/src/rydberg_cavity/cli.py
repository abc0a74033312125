"""Command-line entry point: ``rydberg-cavity <subcommand> [options]``.

Exit codes: 0 success, 1 configuration error, 2 numerical non-convergence,
3 partial sweep failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import plotting, sweeps
from .dynamics import ConvergenceError
from .models import Variant
from .params import (
    TARGET_REFERENCE_DETUNING,
    ConfigError,
    derive_effective,
    format_config,
    linear_reference_detuning,
    load_config,
    default_params,
)

log = logging.getLogger("rydberg_cavity")

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGENCE, EXIT_PARTIAL = 0, 1, 2, 3


def _params(args):
    p = load_config(args.config) if args.config else default_params()
    if args.g2n_override is not None:
        p = p.replace(g2n=args.g2n_override)
    return p


def _spec(args, variants=(Variant.SPIN,)):
    return sweeps.SweepSpec(
        theta_min=args.theta_min,
        theta_max=args.theta_max,
        theta_step=args.theta_step,
        variants=variants,
        out_dir=Path(args.out),
        workers=args.workers,
        cutoff=args.cutoff,
    )


def cmd_effective_params(args) -> int:
    p = _params(args)
    eff = derive_effective(p)
    print(format_config(p), end="")
    print(f"g2n_used = {p.collective_coupling_sq!r}")
    for name in ("delta_r_eff", "delta_c_eff", "gamma_r_eff", "gamma_c_eff", "g_eff_sqrtN", "n_b", "kappa_bar"):
        print(f"{name} = {getattr(eff, name)!r}")
    if eff.bubble_count > 1:
        print(f"kappa_bar_prime = {eff.kappa_bar_prime!r}")
    print(f"reference_detuning_linear = {linear_reference_detuning(p)!r}")
    return EXIT_OK


def cmd_find_ref(args) -> int:
    p = _params(args)
    dc0 = sweeps.find_reference_detuning(p, tuple(args.window), Variant(args.model), args.cutoff)
    print(f"delta_c0 = {dc0!r}")
    print(f"delta_c0_linear_response = {linear_reference_detuning(p)!r}")
    print(f"delta_c0_target = {TARGET_REFERENCE_DETUNING!r}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    p = _params(args)
    variant = Variant(args.model)
    spec = _spec(args, (variant,))
    dc0, rows = sweeps.g2zero_sweep(p, spec, variant)
    csv_path = sweeps.write_csv(spec.out_dir / "g2zero.csv", sweeps.G2ZERO_COLUMNS, rows)
    plotting.g2zero_svg(csv_path, spec.out_dir / "g2zero.svg")
    failed = [r for r in rows if r["error"]]
    print(f"delta_c0 = {dc0!r}; wrote {csv_path} ({len(rows)} points, {len(failed)} failed)")
    return EXIT_PARTIAL if failed else EXIT_OK


def cmd_g2tau(args) -> int:
    p = _params(args)
    trace = sweeps.g2tau_trace(p, args.theta, Variant(args.model), args.tau_max, args.points, args.cutoff)
    out = Path(args.out)
    rows = [{"tau": t, "g2": g} for t, g in zip(trace.tau, trace.g2)]
    csv_path = sweeps.write_csv(out / "g2tau.csv", ("tau", "g2"), rows)
    plotting.g2tau_svg(csv_path, out / "g2tau.svg")
    meta = {k: (v.item() if hasattr(v, "item") else v) for k, v in trace.metadata.items()}
    (out / "g2tau_meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    print(json.dumps(meta, sort_keys=True))
    return EXIT_OK


def cmd_compare(args) -> int:
    p = _params(args)
    spec = _spec(args, (Variant.SPIN, Variant.BOSON_KBAR, Variant.BOSON_KBARPRIME))
    dc0, rows = sweeps.model_comparison(p, spec)
    csv_path = sweeps.write_csv(spec.out_dir / "compare.csv", sweeps.COMPARE_COLUMNS, rows)
    plotting.comparison_svg(csv_path, spec.out_dir / "compare.svg")
    bad = sum(1 for r in rows for c in sweeps.COMPARE_COLUMNS if r[c] != r[c])
    print(f"delta_c0 = {dc0!r}; wrote {csv_path}")
    return EXIT_PARTIAL if bad else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value parameter file (defaults: Rb 95d5/2 set)")
    common.add_argument("--g2n-override", type=float, help="collective coupling g^2 N in gamma_e^2")
    common.add_argument("--cutoff", type=int, default=6, help="max total excitations N_r + n_c")
    common.add_argument("--model", default="spin", choices=[v.value for v in Variant])
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("-v", "--verbose", action="store_true")

    sweep = argparse.ArgumentParser(add_help=False)
    sweep.add_argument("--theta-min", type=float, default=-8.0)
    sweep.add_argument("--theta-max", type=float, default=4.0)
    sweep.add_argument("--theta-step", type=float, default=0.05)

    parser = argparse.ArgumentParser(prog="rydberg-cavity", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("effective-params", parents=[common]).set_defaults(func=cmd_effective_params)
    ref = sub.add_parser("find-ref-detuning", parents=[common])
    ref.add_argument("--window", type=float, nargs=2, default=[-15.0, 5.0], metavar=("LO", "HI"))
    ref.set_defaults(func=cmd_find_ref)
    sub.add_parser("sweep-g2zero", parents=[common, sweep]).set_defaults(func=cmd_sweep)
    tau = sub.add_parser("g2tau", parents=[common])
    tau.add_argument("--theta", type=float, required=True)
    tau.add_argument("--tau-max", type=float, default=20.0)
    tau.add_argument("--points", type=int, default=400)
    tau.set_defaults(func=cmd_g2tau)
    sub.add_parser("compare-models", parents=[common, sweep]).set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConvergenceError as exc:
        log.error("numerical non-convergence: %s", exc)
        return EXIT_NONCONVERGENCE
    except (ConfigError, ValueError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
