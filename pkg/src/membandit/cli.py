"""Command-line front end.

Subcommands:
    enumerate   emit the arm table (arm_index + organization counts) as CSV
    golden      exhaustive baseline run; prints the golden arm
    explore     one policy run; prints the recommendation (optionally the
                pull trace)
    bench       full accuracy experiment; writes a CSV/JSON report
    validate    policy self-test on a synthetic Gaussian bed

Exit codes: 0 success, 2 configuration error, 3 infeasible design space,
4 I/O error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import ConfigError, load_config
from .designspace import EmptyDesignSpaceError, enumerate_architectures
from .environments import RecordingEnvironment
from .harness import (
    POLICY_FUNCS,
    POLICY_IDS,
    GOLDEN_STREAM_ID,
    build_memory_environment,
    build_synthetic_environment,
    derive_seed,
    export_report,
    golden_arm,
    run_experiment,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value configuration file")
    parser.add_argument("--seed", type=int, help="master seed override")
    parser.add_argument("--weights", help="cost weights as 'w_t,w_pdyn'")
    parser.add_argument("--normalizer", choices=("fixed", "running"),
                        help="normalizer mode")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="membandit",
        description="Best-arm search over memory organizations under "
                    "process/voltage variation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="emit the candidate arm table")
    _add_common(p)
    p.add_argument("--out", help="write CSV here instead of stdout")

    p = sub.add_parser("golden", help="exhaustive uniform baseline")
    _add_common(p)
    p.add_argument("--pulls-per-arm", type=int, default=None,
                   help="override baseline pulls per arm")
    p.add_argument("--out", help="write the per-arm mean table as CSV")

    p = sub.add_parser("explore", help="single policy run")
    _add_common(p)
    p.add_argument("--policy", required=True, choices=tuple(POLICY_FUNCS))
    p.add_argument("--multiplier", type=float, default=20.0,
                   help="budget as a multiple of the arm count")
    p.add_argument("--trace", action="store_true",
                   help="print the pull sequence")

    p = sub.add_parser("bench", help="full accuracy experiment")
    _add_common(p)
    p.add_argument("--policies", help="comma-separated policy subset")
    p.add_argument("--multipliers", help="comma-separated budget multipliers")
    p.add_argument("--reps", type=int, help="repetitions per cell")
    p.add_argument("--format", choices=("csv", "json"), help="report format")
    p.add_argument("--out", help="report path (default: report.<format>)")

    p = sub.add_parser("validate", help="synthetic-bed policy self-test")
    _add_common(p)
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--multiplier", type=float, default=20.0)
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    mapping = {
        "seed": "master_seed",
        "weights": "weights",
        "normalizer": "normalizer_mode",
        "policies": "policies",
        "multipliers": "multipliers",
        "reps": "repetitions",
        "format": "format",
        "out": "out",
        "pulls_per_arm": "baseline_pulls_per_arm",
    }
    out = {}
    for attr, key in mapping.items():
        value = getattr(args, attr, None)
        if value is not None:
            out[key] = value
    return out


def _cmd_enumerate(args) -> int:
    config = load_config(args.config, _overrides(args))
    arms = enumerate_architectures(config.ranges)
    lines = ["arm_index,n_banks,n_subbanks,n_mats,n_rows,n_cols"]
    lines += [f"{i},{a.n_banks},{a.n_subbanks},{a.n_mats},{a.n_rows},{a.n_cols}"
              for i, a in enumerate(arms)]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
        print(f"{len(arms)} architectures -> {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_golden(args) -> int:
    config = load_config(args.config, _overrides(args))
    env = build_memory_environment(config)
    rng = np.random.default_rng(
        derive_seed(config.master_seed, GOLDEN_STREAM_ID, 0, 0))
    result = golden_arm(env, config.baseline_pulls_per_arm, rng)
    arch = env.arms[result.arm]
    print(f"golden arm: {result.arm} "
          f"(banks={arch.n_banks} subbanks={arch.n_subbanks} "
          f"mats={arch.n_mats} rows={arch.n_rows} cols={arch.n_cols})")
    print(f"total simulations: {result.total_pulls}")
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write("arm_index,mean_reward\n")
            for i, m in enumerate(result.mean_rewards):
                fh.write(f"{i},{m:.6f}\n")
        print(f"per-arm means -> {args.out}")
    return EXIT_OK


def _cmd_explore(args) -> int:
    config = load_config(args.config, _overrides(args))
    env = build_memory_environment(config)
    budget = round(args.multiplier * env.n_arms)
    rng = np.random.default_rng(
        derive_seed(config.master_seed, POLICY_IDS[args.policy], 0, 0))
    recorder = RecordingEnvironment(env)
    rec = POLICY_FUNCS[args.policy](recorder, budget, rng)
    arch = env.arms[rec]
    print(f"policy={args.policy} budget={budget} pulls={len(recorder.trace)}")
    print(f"recommendation: arm {rec} "
          f"(banks={arch.n_banks} subbanks={arch.n_subbanks} "
          f"mats={arch.n_mats} rows={arch.n_rows} cols={arch.n_cols})")
    if args.trace:
        for t, (arm, reward) in enumerate(recorder.trace, start=1):
            print(f"{t},{arm},{reward:.6f}")
    return EXIT_OK


def _cmd_bench(args) -> int:
    config = load_config(args.config, _overrides(args))
    report = run_experiment(config)
    out = config.out_path or f"report.{config.out_format}"
    export_report(report, config.out_format, out)
    print(f"golden arm: {report.golden_arm} of {report.n_arms}")
    for c in report.cells:
        print(f"{c.policy:>10} x{c.multiplier:<5g} ratio={c.correct_ratio:.4f} "
              f"+/-{c.stderr:.4f} pulls={c.total_pulls}")
    print(f"report -> {out}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    config = load_config(args.config, _overrides(args))
    env = build_synthetic_environment(config)
    budget = round(args.multiplier * env.n_arms)
    best = int(np.argmax(env.means))
    print(f"synthetic bed: {env.n_arms} arms, best={best}, "
          f"budget={budget}, reps={args.reps}")
    for name, policy in POLICY_FUNCS.items():
        correct = 0
        for rep in range(args.reps):
            rng = np.random.default_rng(
                derive_seed(config.master_seed, POLICY_IDS[name], 0, rep))
            correct += policy(env, budget, rng) == best
        print(f"{name:>10}: correct {correct}/{args.reps} "
              f"({correct / args.reps:.3f})")
    return EXIT_OK


_COMMANDS = {
    "enumerate": _cmd_enumerate,
    "golden": _cmd_golden,
    "explore": _cmd_explore,
    "bench": _cmd_bench,
    "validate": _cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EmptyDesignSpaceError as exc:
        print(f"infeasible design space: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
