"""Monte Carlo experiment runner and statistics.

Experiments are reproducible and order-independent: trial t always draws
from the stream seeded by (master_seed, t), and aggregation uses counts
and sums only, so any worker count produces the same report bytes.
Reports are written as canonical JSON (sorted keys, floats at 12
significant digits); per-trial rows go to an optional CSV with the fixed
column order trial_index, accepted, checked_count.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats as _stats

from . import __version__
from .jsonio import write_csv, write_json
from .quantum import MeasurementAxis, joint_outcome_distribution, mixture_density
from .states import (
    CommitmentStateKind,
    closed_form_correlation,
    commitment_state,
    kinds_for_bit,
)
from .quantum import expectation_product
from .protocol import (
    ConstraintFamily,
    UNIFORM_WEIGHTS,
    alice_commit,
    bob_measure,
    bob_verify,
    alice_reveal,
    generate_basis_vector,
    validate_family_weights,
)
from .attacks import EprDelayedChoice, NaiveSubstitution, epr_attack_session, naive_cheat_session

EXPERIMENT_KINDS = (
    "honest",
    "naive_cheat",
    "epr_attack",
    "indistinguishability",
    "correlation_table",
)

# Fixed representative axis pairs, one per family, used by the
# indistinguishability report. Families with a free polar angle use 60
# degrees so the second family doubles as the textbook (1 + cos^2 60)/2
# = 0.625 product check.
REPRESENTATIVE_AXES = {
    ConstraintFamily.F1: (MeasurementAxis(90.0, 30.0), MeasurementAxis(90.0, 330.0)),
    ConstraintFamily.F2: (MeasurementAxis(60.0, 30.0), MeasurementAxis(60.0, 330.0)),
    ConstraintFamily.F3: (MeasurementAxis(60.0, 30.0), MeasurementAxis(120.0, 330.0)),
    ConstraintFamily.F4: (MeasurementAxis(90.0, 30.0), MeasurementAxis(90.0, 60.0)),
    ConstraintFamily.F5: (MeasurementAxis(60.0, 30.0), MeasurementAxis(60.0, 60.0)),
    ConstraintFamily.F6: (MeasurementAxis(60.0, 30.0), MeasurementAxis(120.0, 60.0)),
}

_OUTCOME_PAIRS = ((1, 1), (1, -1), (-1, 1), (-1, -1))
_OUTCOME_LABELS = {(1, 1): "++", (1, -1): "+-", (-1, 1): "-+", (-1, -1): "--"}


def wilson_interval(
    successes: int, trials: int, confidence: float = 0.95
) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion; stable near rates
    of 0 and 1."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    z = float(_stats.norm.ppf(0.5 + confidence / 2.0))
    p_hat = successes / trials
    denom = 1.0 + z * z / trials
    center = (p_hat + z * z / (2.0 * trials)) / denom
    half = z * math.sqrt(p_hat * (1.0 - p_hat) / trials + z * z / (4.0 * trials * trials)) / denom
    low = 0.0 if successes == 0 else max(0.0, center - half)  # endpoints are exact
    high = 1.0 if successes == trials else min(1.0, center + half)
    return low, high


def fixed_count_cheat_bound(n: int) -> float:
    """(1/2)^(n/2): the naive-cheat success figure obtained by treating the
    checked count as exactly n/2 instead of binomial."""
    return 0.5 ** (n / 2.0)


def _mean_checked_pass_probability(theta_points: int) -> float:
    # Midpoint rule for the average over theta in [0, 180] of
    # (1 + cos^2 theta) / 2, the pass probability of a checked index in a
    # family with a free polar angle. The exact value is 3/4.
    step = 180.0 / theta_points
    total = 0.0
    for k in range(theta_points):
        theta = (k + 0.5) * step
        c = math.cos(math.radians(theta))
        total += (1.0 + c * c) / 2.0
    return total / theta_points


def naive_cheat_oracle(
    n: int, family_weights, claimed_bit: int = 1, theta_points: int = 10_000
) -> float:
    """Exact acceptance probability of the naive substitution cheat.

    Per index: the family matching the claimed bit's filter at 90 degrees
    polar (F1 for bit 1, F4 for bit 0) is always checked and passes with
    probability 1/2; the two filter families with free polar angles are
    checked only when the guessed kind names them, passing with
    (1 + cos^2 theta)/2 averaged over theta; the other three families are
    never checked. Acceptance is the per-index pass probability to the
    n-th power. When only the 90-degree families carry weight the result
    is the closed form (1 - w_checked / 2)^n.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if claimed_bit not in (0, 1):
        raise ValueError("claimed_bit must be 0 or 1")
    weights = validate_family_weights(family_weights)
    if claimed_bit == 1:
        w_always, w_free_a, w_free_b = weights[0], weights[1], weights[2]
        w_unchecked = weights[3] + weights[4] + weights[5]
    else:
        w_always, w_free_a, w_free_b = weights[3], weights[4], weights[5]
        w_unchecked = weights[0] + weights[1] + weights[2]
    if w_free_a == 0.0 and w_free_b == 0.0:
        per_index = 1.0 - w_always / 2.0  # closed form
    else:
        avg_pass = _mean_checked_pass_probability(theta_points)
        p_free = 0.5 * avg_pass + 0.5  # checked only on the matching guess
        per_index = w_always * 0.5 + (w_free_a + w_free_b) * p_free + w_unchecked
    return per_index ** n


_ORACLE_NOTE = (
    "Exact acceptance: an index is checked with probability equal to the "
    "weight of the 90-degree family matching the claimed bit and passes a "
    "check with probability 1/2, so acceptance = E[(1/2)^K] with K ~ "
    "Binomial(n, w_checked) = (1 - w_checked/2)^n; families with a free "
    "polar angle are checked only on the matching kind guess and pass with "
    "(1 + cos^2 theta)/2 averaged over theta, folded in by numerical "
    "integration. The commonly quoted figure (1/2)^(n/2) instead treats "
    "the checked count as exactly n/2 and understates the cheat's true "
    "success rate, which is (3/4)^n for uniform weight on the two "
    "90-degree families."
)


@dataclass(frozen=True)
class CheatEstimate:
    successes: int
    trials: int
    rate: float
    wilson_low: float
    wilson_high: float
    analytic_oracle: float
    fixed_count_bound: float

    def to_dict(self) -> dict:
        return {
            "successes": self.successes,
            "trials": self.trials,
            "rate": self.rate,
            "wilson_95": [self.wilson_low, self.wilson_high],
            "analytic_oracle": self.analytic_oracle,
            "fixed_count_bound": self.fixed_count_bound,
        }


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one experiment run.

    ``workers``, the output paths and ``stable_output`` affect how the
    report is produced, never its results, and are excluded from the
    serialized config so reruns compare byte for byte.
    """

    kind: str
    master_seed: int
    n: int = 1
    trials: int = 1
    family_weights: tuple[float, ...] = UNIFORM_WEIGHTS
    lambda_bit: int | None = None
    committed_bit: int | None = None
    claimed_bit: int | None = None
    samples_per_family: int = 100_000
    output_path: str | Path | None = None
    csv_path: str | Path | None = None
    stable_output: bool = False
    workers: int = 1

    def __post_init__(self) -> None:
        if self.kind not in EXPERIMENT_KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.master_seed < 0:
            raise ValueError("master_seed must be nonnegative")
        if self.samples_per_family < 1:
            raise ValueError("samples_per_family must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        object.__setattr__(
            self, "family_weights", validate_family_weights(self.family_weights)
        )
        for name in ("lambda_bit", "committed_bit", "claimed_bit"):
            value = getattr(self, name)
            if value is not None and value not in (0, 1):
                raise ValueError(f"{name} must be 0 or 1 when given")

    def config_dict(self) -> dict:
        doc = {
            "kind": self.kind,
            "master_seed": self.master_seed,
            "family_weights": list(self.family_weights),
        }
        if self.kind in ("honest", "naive_cheat", "epr_attack"):
            doc["n"] = self.n
            doc["trials"] = self.trials
        if self.kind == "honest":
            doc["lambda_bit"] = self.lambda_bit
        if self.kind == "naive_cheat":
            doc["committed_bit"] = self.committed_bit
            doc["claimed_bit"] = self.claimed_bit
        if self.kind == "epr_attack":
            doc["claimed_bit"] = self.claimed_bit
        if self.kind == "indistinguishability":
            doc["samples_per_family"] = self.samples_per_family
        return doc


def _map_trials(config: ExperimentConfig, fn):
    if config.workers <= 1:
        return [fn(t) for t in range(config.trials)]
    with ThreadPoolExecutor(max_workers=config.workers) as executor:
        return list(executor.map(fn, range(config.trials)))


def _attack_rows(config: ExperimentConfig, strategy) -> list[tuple[bool, int]]:
    if isinstance(strategy, NaiveSubstitution):
        def trial(t: int) -> tuple[bool, int]:
            result = naive_cheat_session(
                config.n, config.family_weights, strategy, [config.master_seed, t]
            )
            return result.accepted, result.checked_count
    elif isinstance(strategy, EprDelayedChoice):
        def trial(t: int) -> tuple[bool, int]:
            result = epr_attack_session(
                config.n, config.family_weights, strategy.claimed_bit, [config.master_seed, t]
            )
            return result.accepted, result.checked_count
    else:
        raise ValueError(f"unsupported strategy {strategy!r}")
    return _map_trials(config, trial)


def estimate_cheat_success(config: ExperimentConfig, strategy) -> CheatEstimate:
    """Monte Carlo attack-success estimate with its Wilson 95% interval, the
    exact analytic oracle, and the fixed-count comparison figure."""
    rows = _attack_rows(config, strategy)
    return _estimate_from_rows(config, strategy, rows)


def _estimate_from_rows(config, strategy, rows) -> CheatEstimate:
    successes = sum(1 for accepted, _ in rows if accepted)
    low, high = wilson_interval(successes, config.trials)
    if isinstance(strategy, NaiveSubstitution):
        oracle = naive_cheat_oracle(config.n, config.family_weights, strategy.claimed_bit)
    else:
        oracle = 1.0  # the delayed-choice attack never fails
    return CheatEstimate(
        successes=successes,
        trials=config.trials,
        rate=successes / config.trials,
        wilson_low=low,
        wilson_high=high,
        analytic_oracle=oracle,
        fixed_count_bound=fixed_count_cheat_bound(config.n),
    )


def _honest_rows(config: ExperimentConfig) -> list[tuple[bool, int]]:
    n, weights = config.n, config.family_weights

    def trial(t: int) -> tuple[bool, int]:
        rng = np.random.default_rng([config.master_seed, t])
        if config.lambda_bit is None:
            lam = 1 if rng.random() < 0.5 else 0
        else:
            lam = config.lambda_bit
        basis = generate_basis_vector(n, weights, rng)
        record, channel = alice_commit(lam, n, rng)
        outcomes = bob_measure(channel, basis, rng)
        verdict = bob_verify(alice_reveal(record), basis, outcomes)
        return verdict.accepted, verdict.checked_count

    return _map_trials(config, trial)


def _honest_results(config: ExperimentConfig, rows) -> dict:
    accepted = sum(1 for ok, _ in rows if ok)
    fractions = [checked / config.n for _, checked in rows]
    mean = math.fsum(fractions) / len(fractions)
    if len(fractions) > 1:
        var = math.fsum((f - mean) ** 2 for f in fractions) / (len(fractions) - 1)
        se = math.sqrt(var / len(fractions))
    else:
        se = float("nan")
    return {
        "trials": config.trials,
        "n": config.n,
        "accepted_count": accepted,
        "all_accepted": accepted == config.trials,
        "mean_checked_fraction": mean,
        "checked_fraction_se": se,
    }


def _sample_outcome_counts(
    kind: CommitmentStateKind,
    axes: tuple[MeasurementAxis, MeasurementAxis],
    samples: int,
    rng: np.random.Generator,
) -> np.ndarray:
    dist = joint_outcome_distribution(commitment_state(kind), axes[0], axes[1])
    pvals = np.array([dist[pair] for pair in _OUTCOME_PAIRS])
    pvals = pvals / pvals.sum()
    return rng.multinomial(samples, pvals)


def indistinguishability_report(config: ExperimentConfig) -> dict:
    """Receiver-side zero-information evidence.

    (a) exact: the two equal-weight commitment mixtures must agree
    entrywise below 1e-12; (b) sampled: per family at fixed representative
    axes, a chi-square comparison of the (m1, m2) frequencies between the
    two committed bits (kind drawn uniformly per sample, outcomes sampled
    from the Born-rule joint distribution); (c) the empirical
    p(m1*m2 = +1) against (1 + cos theta1 cos theta2)/2.
    """
    mix_bit1 = mixture_density(
        [(commitment_state(k), 0.5) for k in kinds_for_bit(1)]
    )
    mix_bit0 = mixture_density(
        [(commitment_state(k), 0.5) for k in kinds_for_bit(0)]
    )
    exact_gap = mix_bit1.max_abs_difference(mix_bit0)

    def matrix_entries(rho):
        return [
            [[float(cell.real), float(cell.imag)] for cell in row]
            for row in rho.matrix
        ]

    samples = config.samples_per_family
    families = {}
    for family_index, family in enumerate(ConstraintFamily):
        axes = REPRESENTATIVE_AXES[family]
        # Mixture p(m1*m2 = +1): the mean of the two kinds' closed-form
        # probabilities, which collapses to (1 + cos theta1 cos theta2)/2.
        expected_plus = 0.5 * (
            closed_form_correlation(CommitmentStateKind.PHI_PLUS, axes[0], axes[1]).p_plus
            + closed_form_correlation(CommitmentStateKind.PHI_MINUS, axes[0], axes[1]).p_plus
        )
        table = np.zeros((2, 4), dtype=np.int64)
        per_bit = {}
        for lam in (0, 1):
            rng = np.random.default_rng([config.master_seed, family_index, lam])
            first, second = kinds_for_bit(lam)
            n_first = int(rng.binomial(samples, 0.5))
            counts = _sample_outcome_counts(first, axes, n_first, rng)
            counts = counts + _sample_outcome_counts(second, axes, samples - n_first, rng)
            table[lam] = counts
            plus_count = int(counts[0] + counts[3])  # m1*m2 = +1 cells
            empirical = plus_count / samples
            se = math.sqrt(expected_plus * (1.0 - expected_plus) / samples)
            per_bit[f"lambda{lam}"] = {
                "counts": {
                    _OUTCOME_LABELS[pair]: int(c) for pair, c in zip(_OUTCOME_PAIRS, counts)
                },
                "product_plus_rate": empirical,
                "se_distance": abs(empirical - expected_plus) / se,
            }
        chi2, p_value, dof, _ = _stats.chi2_contingency(table, correction=False)
        families[family.value] = {
            "axes": {
                "theta1": axes[0].theta_deg,
                "phi1": axes[0].phi_deg,
                "theta2": axes[1].theta_deg,
                "phi2": axes[1].phi_deg,
            },
            "samples_per_bit": samples,
            "expected_product_plus_rate": expected_plus,
            "chi2_statistic": float(chi2),
            "chi2_dof": int(dof),
            "chi2_p_value": float(p_value),
            **per_bit,
        }
    return {
        "exact_max_abs_difference": exact_gap,
        "mixture_matrices": {
            "bit0": matrix_entries(mix_bit0),
            "bit1": matrix_entries(mix_bit1),
        },
        "families": families,
        "min_chi2_p_value": min(f["chi2_p_value"] for f in families.values()),
    }


def default_axis_grid() -> list[tuple[MeasurementAxis, MeasurementAxis]]:
    """5^4 grid over (theta1, phi1, theta2, phi2); includes the z-z cell and
    cells whose azimuthal sums hit 0 and 90 degrees exactly."""
    thetas = (0.0, 45.0, 90.0, 135.0, 180.0)
    phis = (0.0, 45.0, 90.0, 225.0, 315.0)
    axes = [MeasurementAxis(t, p) for t in thetas for p in phis]
    return [(a, b) for a in axes for b in axes]


def correlation_table(axis_grid=None) -> dict:
    """Closed-form versus Born-rule correlation for every kind and axis
    pair; the two routes must agree below 1e-10 everywhere."""
    pairs = default_axis_grid() if axis_grid is None else list(axis_grid)
    if not pairs:
        raise ValueError("axis grid must be nonempty")
    rows = []
    max_gap = 0.0
    for kind in CommitmentStateKind:
        state = commitment_state(kind)
        for axis_a, axis_b in pairs:
            closed = closed_form_correlation(kind, axis_a, axis_b).value
            born = expectation_product(state, axis_a, axis_b)
            gap = abs(closed - born)
            max_gap = max(max_gap, gap)
            rows.append(
                {
                    "kind": kind.value,
                    "theta1": axis_a.theta_deg,
                    "phi1": axis_a.phi_deg,
                    "theta2": axis_b.theta_deg,
                    "phi2": axis_b.phi_deg,
                    "closed_form": closed,
                    "born_rule": born,
                    "abs_diff": gap,
                }
            )
    return {"cells": len(pairs), "rows": rows, "max_abs_diff": max_gap}


def run_experiment(config: ExperimentConfig) -> dict:
    """Dispatch on the experiment kind, write the report (and optional
    per-trial CSV), and return the report document."""
    start = time.perf_counter()
    csv_rows = None
    if config.kind == "honest":
        rows = _honest_rows(config)
        results = _honest_results(config, rows)
        csv_rows = rows
    elif config.kind == "naive_cheat":
        committed = 0 if config.committed_bit is None else config.committed_bit
        claimed = 1 if config.claimed_bit is None else config.claimed_bit
        strategy = NaiveSubstitution(committed, claimed)
        rows = _attack_rows(config, strategy)
        estimate = _estimate_from_rows(config, strategy, rows)
        results = estimate.to_dict()
        results["strategy"] = strategy.to_dict()
        results["oracle_note"] = _ORACLE_NOTE
        csv_rows = rows
    elif config.kind == "epr_attack":
        if config.claimed_bit is None:
            raise ValueError("epr_attack requires claimed_bit")
        strategy = EprDelayedChoice(config.claimed_bit)
        rows = _attack_rows(config, strategy)
        estimate = _estimate_from_rows(config, strategy, rows)
        results = estimate.to_dict()
        results["strategy"] = strategy.to_dict()
        results["rejected_count"] = sum(1 for accepted, _ in rows if not accepted)
        csv_rows = rows
    elif config.kind == "indistinguishability":
        results = indistinguishability_report(config)
    else:
        results = correlation_table()
    report = {
        "config": config.config_dict(),
        "results": results,
        "build_info": {"package": "eprcommit", "version": __version__},
    }
    if not config.stable_output:
        report["runtime_ms"] = (time.perf_counter() - start) * 1000.0
    if config.output_path is not None:
        _write_report(config.output_path, report)
    if config.csv_path is not None and csv_rows is not None:
        write_csv(
            config.csv_path,
            ["trial_index", "accepted", "checked_count"],
            [(t, int(ok), checked) for t, (ok, checked) in enumerate(csv_rows)],
        )
    return report


def _write_report(path, report) -> None:
    try:
        write_json(path, report)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
