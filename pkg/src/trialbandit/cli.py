"""Command line entry point.

    trialbandit replay --config ist.toml --out results/
    trialbandit synth --config configs/synthetic_ist.toml --runs 5 --policies random,thompson
"""
from __future__ import annotations

import argparse
import logging
import sys

from .runner import ResultsBundle, load_config, run_experiment


def _bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trialbandit",
        description="Replay a treatment-allocation trial under bandit policies.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("replay", "replay a recorded trial dataset (CSV named in the config)"),
        ("synth", "simulate participants from the config's synthetic success table"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="TOML experiment config")
        p.add_argument("--seed", type=_u64, help="master seed (overrides config)")
        p.add_argument("--runs", type=_positive, help="repetitions per policy")
        p.add_argument("--policies", help="comma-separated subset of random,greedy,thompson,ucb")
        p.add_argument("--contextual", type=_bool, help="one bandit per context (true/false)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--workers", type=_positive, help="parallel worker processes")
        if name == "replay":
            p.add_argument("--dataset", help="CSV path (overrides config)")
    return parser


def _report(bundle: ResultsBundle) -> str:
    cfg = bundle.config
    lines = [f"mode={cfg.mode} runs={cfg.runs} seed={cfg.seed}"]
    for name, agg in bundle.aggregates.items():
        ratio = bundle.ratios.get(name, {})
        extra = ""
        if "regret_ratio_vs_random_pct" in ratio:
            extra = (
                f"  regret {ratio['regret_ratio_vs_random_pct']:.2f}"
                f"+-{ratio['regret_ratio_vs_random_std_pct']:.2f}% of random"
                f"  suboptimal {ratio.get('suboptimal_ratio_vs_random_pct', float('nan')):.2f}"
                f"+-{ratio.get('suboptimal_ratio_vs_random_std_pct', float('nan')):.2f}%"
            )
        lines.append(
            f"{name:>9}: R={agg.mean_final_regret:.3f}+-{agg.std_final_regret:.3f}"
            f"  S={agg.mean_final_suboptimal:.1f}+-{agg.std_final_suboptimal:.1f}{extra}"
        )
    if cfg.output_dir is not None:
        lines.append(f"wrote {len(bundle.files)} files to {cfg.output_dir}")
    return "\n".join(lines)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    policies = None
    if args.policies:
        policies = tuple(p for p in args.policies.split(",") if p.strip())
    try:
        config = load_config(
            args.config,
            mode=args.command,
            seed=args.seed,
            runs=args.runs,
            policies=policies,
            contextual=args.contextual,
            output_dir=args.out,
            workers=args.workers,
            dataset=getattr(args, "dataset", None),
        )
        bundle = run_experiment(config)
    except (OSError, ValueError, LookupError) as exc:
        print(f"trialbandit: error: {exc}", file=sys.stderr)
        return 2
    print(_report(bundle))
    return 0


if __name__ == "__main__":
    sys.exit(main())
