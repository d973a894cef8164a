"""Command-line front end: run sessions and experiments, print verdicts,
write transcripts and machine-readable reports.

Exit codes: 0 success or accept, 1 protocol reject or verdict mismatch,
2 usage, schema or I/O error. All angles in files and flags are degrees.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .harness import ExperimentConfig, run_experiment
from .jsonio import write_json
from .protocol import (
    F1F4_WEIGHTS,
    UNIFORM_WEIGHTS,
    TranscriptSchemaError,
    recheck_transcript,
    run_honest_session,
    transcript_from_dict,
)

FAMILY_PRESETS = {"uniform": UNIFORM_WEIGHTS, "f1f4": F1F4_WEIGHTS}


def _families_arg(text: str) -> tuple[float, ...]:
    preset = FAMILY_PRESETS.get(text.lower())
    if preset is not None:
        return preset
    parts = text.split(",")
    if len(parts) != 6:
        raise argparse.ArgumentTypeError(
            f"families must be 'uniform', 'f1f4' or six comma-separated weights, got {text!r}"
        )
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad family weights {text!r}: {exc}") from exc


def _seed_arg(text: str) -> int:
    try:
        value = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from exc
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eprcommit",
        description=(
            "Simulate an entanglement-based bit commitment protocol: honest "
            "sessions, the naive substitution cheat, and the delayed-choice "
            "attack that defeats it. All angles are degrees."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, trials: bool, families: bool = True):
        p.add_argument("--seed", type=_seed_arg, default=0,
                       help="unsigned 64-bit master seed (default 0)")
        if families:
            p.add_argument("--families", type=_families_arg, default=UNIFORM_WEIGHTS,
                           help="'uniform', 'f1f4', or six comma-separated F1..F6 weights summing to 1")
        if trials:
            p.add_argument("--trials", type=int, required=True,
                           help="number of independent sessions to run")
        p.add_argument("--output", type=Path, default=None,
                       help="path for the machine-readable JSON document")

    p_session = sub.add_parser("session", help="run one honest commit/open session")
    p_session.add_argument("--lambda", dest="lambda_bit", type=int, choices=(0, 1),
                           required=True, help="committed bit")
    p_session.add_argument("--n", type=int, required=True,
                           help="security parameter: number of pairs")
    add_common(p_session, trials=False)

    p_cheat = sub.add_parser("cheat", help="estimate the naive substitution cheat's success rate")
    p_cheat.add_argument("--n", type=int, required=True, help="pairs per session")
    p_cheat.add_argument("--committed-bit", type=int, choices=(0, 1), default=0,
                         help="bit actually committed (default 0)")
    p_cheat.add_argument("--claimed-bit", type=int, choices=(0, 1), default=1,
                         help="bit claimed at opening (default 1)")
    add_common(p_cheat, trials=True)
    p_cheat.add_argument("--stable-output", action="store_true",
                         help="omit runtime_ms so reports compare byte for byte")

    p_attack = sub.add_parser("attack", help="run the delayed-choice attack")
    p_attack.add_argument("--n", type=int, required=True, help="pairs per session")
    p_attack.add_argument("--claimed-bit", type=int, choices=(0, 1), required=True,
                          help="bit claimed at opening")
    add_common(p_attack, trials=True)
    p_attack.add_argument("--stable-output", action="store_true",
                          help="omit runtime_ms so reports compare byte for byte")

    p_indist = sub.add_parser(
        "indist", help="receiver zero-information report (exact and sampled)"
    )
    add_common(p_indist, trials=False, families=False)
    p_indist.add_argument("--stable-output", action="store_true",
                          help="omit runtime_ms so reports compare byte for byte")

    p_corr = sub.add_parser(
        "corr-table", help="closed-form vs Born-rule correlation table on the default grid"
    )
    p_corr.add_argument("--output", type=Path, default=None,
                        help="path for the machine-readable JSON document")
    p_corr.add_argument("--stable-output", action="store_true",
                        help="omit runtime_ms so reports compare byte for byte")

    p_verify = sub.add_parser("verify-transcript", help="re-verify a stored transcript")
    p_verify.add_argument("path", type=Path, help="transcript JSON file")

    return parser


def _cmd_session(args) -> int:
    transcript = run_honest_session(args.lambda_bit, args.n, args.families, args.seed)
    verdict = transcript.verdict
    print(
        f"accepted={str(verdict.accepted).lower()} "
        f"lambda={transcript.lambda_claimed} n={transcript.n} "
        f"checked={verdict.checked_count}/{transcript.n} seed={transcript.seed}"
    )
    if args.output is not None:
        write_json(args.output, transcript.to_dict())
        print(f"transcript written to {args.output}")
    return 0 if verdict.accepted else 1


def _cmd_cheat(args) -> int:
    config = ExperimentConfig(
        kind="naive_cheat",
        master_seed=args.seed,
        n=args.n,
        trials=args.trials,
        family_weights=args.families,
        committed_bit=args.committed_bit,
        claimed_bit=args.claimed_bit,
        output_path=args.output,
        stable_output=args.stable_output,
    )
    results = run_experiment(config)["results"]
    print(
        f"rate={results['rate']:.6f} "
        f"interval=[{results['wilson_95'][0]:.6f}, {results['wilson_95'][1]:.6f}] "
        f"oracle={results['analytic_oracle']:.6f} "
        f"fixed_count_bound={results['fixed_count_bound']:.6f} "
        f"trials={results['trials']}"
    )
    return 0


def _cmd_attack(args) -> int:
    config = ExperimentConfig(
        kind="epr_attack",
        master_seed=args.seed,
        n=args.n,
        trials=args.trials,
        family_weights=args.families,
        claimed_bit=args.claimed_bit,
        output_path=args.output,
        stable_output=args.stable_output,
    )
    results = run_experiment(config)["results"]
    print(
        f"rate={results['rate']:.6f} trials={results['trials']} "
        f"rejected={results['rejected_count']} claimed_bit={args.claimed_bit}"
    )
    return 0


def _cmd_indist(args) -> int:
    config = ExperimentConfig(
        kind="indistinguishability",
        master_seed=args.seed,
        output_path=args.output,
        stable_output=args.stable_output,
    )
    results = run_experiment(config)["results"]
    print(
        f"exact_max_abs_difference={results['exact_max_abs_difference']:.3e} "
        f"min_chi2_p={results['min_chi2_p_value']:.4f}"
    )
    return 0


def _cmd_corr_table(args) -> int:
    config = ExperimentConfig(
        kind="correlation_table",
        master_seed=0,
        output_path=args.output,
        stable_output=args.stable_output,
    )
    results = run_experiment(config)["results"]
    print(f"cells={results['cells']} max_abs_diff={results['max_abs_diff']:.3e}")
    return 0


def _cmd_verify_transcript(args) -> int:
    try:
        text = Path(args.path).read_text(encoding="utf-8")
        data = json.loads(text)
    except OSError as exc:
        print(f"cannot read {args.path}: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"cannot parse {args.path}: {exc}", file=sys.stderr)
        return 2
    try:
        transcript = transcript_from_dict(data)
        recomputed = recheck_transcript(transcript)
    except TranscriptSchemaError as exc:
        for problem in exc.problems:
            print(f"schema violation: {problem}", file=sys.stderr)
        return 2
    stored = transcript.verdict
    if recomputed != stored:
        print(
            f"verdict mismatch: stored accepted={stored.accepted} "
            f"checked={stored.checked_count}, recomputed accepted={recomputed.accepted} "
            f"checked={recomputed.checked_count}"
        )
        for failure in recomputed.failures:
            print(
                f"  index {failure.index}: expected {failure.expected_product}, "
                f"observed {failure.observed_product} ({failure.reason})"
            )
        return 1
    if not stored.accepted:
        print(f"verdict verified: rejected with {len(stored.failures)} failure(s)")
        for failure in stored.failures:
            print(
                f"  index {failure.index}: expected {failure.expected_product}, "
                f"observed {failure.observed_product} ({failure.reason})"
            )
        return 1
    print(f"verdict verified: accepted, checked={stored.checked_count}/{transcript.n}")
    return 0


_COMMANDS = {
    "session": _cmd_session,
    "cheat": _cmd_cheat,
    "attack": _cmd_attack,
    "indist": _cmd_indist,
    "corr-table": _cmd_corr_table,
    "verify-transcript": _cmd_verify_transcript,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse prints its own message; keep its code
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
