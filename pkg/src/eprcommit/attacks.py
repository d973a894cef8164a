"""Cheating-sender strategies against the commitment protocol.

Two strategies are modeled:

* Naive substitution: commit honestly to one bit, then claim the other bit
  at opening with per-index kinds guessed uniformly. Each index whose
  family certifies the claimed bit passes its deterministic check only by
  luck, so acceptance decays exponentially in n.

* Delayed choice: send the first two particles of the three-particle
  chained state and keep the third. At opening, measuring the retained
  particle along x (to claim bit 1) or y (to claim bit 0) steers the pair
  the receiver already measured into a kind exactly consistent with the
  receiver's outcomes, so verification passes with certainty for either
  claimed bit.

Attack sessions serialize to the ordinary transcript schema plus a
``strategy`` field.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quantum import MeasurementAxis, StateVector, measure_qubit
from .states import CommitmentStateKind, ghz_state, kinds_for_bit
from .protocol import (
    RevealMessage,
    Transcript,
    Verdict,
    alice_commit,
    bob_measure,
    bob_verify,
    build_transcript,
    generate_basis_vector,
    measure_channel,
    validate_family_weights,
)

X_AXIS = MeasurementAxis(90.0, 0.0)
Y_AXIS = MeasurementAxis(90.0, 90.0)

_X_CLAIMS = {1: CommitmentStateKind.PHI_PLUS, -1: CommitmentStateKind.PHI_MINUS}
_Y_CLAIMS = {1: CommitmentStateKind.PSI_MINUS, -1: CommitmentStateKind.PSI_PLUS}


@dataclass(frozen=True)
class NaiveSubstitution:
    """Commit to one bit, claim the other at opening."""

    committed_bit: int
    claimed_bit: int

    def __post_init__(self) -> None:
        if self.committed_bit not in (0, 1) or self.claimed_bit not in (0, 1):
            raise ValueError("bits must be 0 or 1")
        if self.committed_bit == self.claimed_bit:
            raise ValueError("naive substitution requires committed_bit != claimed_bit")

    def to_dict(self) -> dict:
        return {
            "kind": "naive_substitution",
            "committed_bit": self.committed_bit,
            "claimed_bit": self.claimed_bit,
        }


@dataclass(frozen=True)
class EprDelayedChoice:
    """Defer the bit choice by retaining the third particle of each
    chained triple until opening."""

    claimed_bit: int

    def __post_init__(self) -> None:
        if self.claimed_bit not in (0, 1):
            raise ValueError("claimed_bit must be 0 or 1")

    def to_dict(self) -> dict:
        return {"kind": "epr_delayed_choice", "claimed_bit": self.claimed_bit}


@dataclass(frozen=True)
class AttackSessionResult:
    verdict: Verdict
    transcript: Transcript

    @property
    def accepted(self) -> bool:
        return self.verdict.accepted

    @property
    def checked_count(self) -> int:
        return self.verdict.checked_count


def naive_cheat_session(
    n: int, family_weights, strategy: NaiveSubstitution, seed
) -> AttackSessionResult:
    """One naive-substitution session against an honest receiver.

    The sender commits honestly to ``strategy.committed_bit``, the receiver
    measures, and at opening the sender claims ``strategy.claimed_bit``
    with per-index kinds drawn uniformly (she has no knowledge of the
    receiver's outcomes)."""
    weights = validate_family_weights(family_weights)
    rng = np.random.default_rng(seed)
    basis = generate_basis_vector(n, weights, rng)
    _, channel = alice_commit(strategy.committed_bit, n, rng)
    outcomes = bob_measure(channel, basis, rng)
    first, second = kinds_for_bit(strategy.claimed_bit)
    claimed = tuple(first if rng.random() < 0.5 else second for _ in range(n))
    reveal = RevealMessage(strategy.claimed_bit, claimed)
    verdict = bob_verify(reveal, basis, outcomes)
    transcript = build_transcript(
        seed, weights, reveal, basis, outcomes, verdict, strategy=strategy.to_dict()
    )
    return AttackSessionResult(verdict, transcript)


def delayed_choice_claim(
    state: StateVector, claimed_bit: int, rng: np.random.Generator
) -> tuple[CommitmentStateKind, int]:
    """Measure the retained third particle and name the kind that the
    measurement steers the other two particles into.

    Claiming bit 1 measures along x (+1 names phi-plus, -1 phi-minus);
    claiming bit 0 measures along y (+1 names psi-minus, -1 psi-plus).
    """
    if claimed_bit == 1:
        axis, table = X_AXIS, _X_CLAIMS
    elif claimed_bit == 0:
        axis, table = Y_AXIS, _Y_CLAIMS
    else:
        raise ValueError(f"claimed_bit must be 0 or 1, got {claimed_bit!r}")
    outcome, _ = measure_qubit(state, 3, axis, rng)
    return table[outcome], outcome


def epr_attack_session(
    n: int, family_weights, claimed_bit: int, seed
) -> AttackSessionResult:
    """One delayed-choice session: send particles 1-2 of n chained triples,
    let the receiver measure per protocol, then measure every retained
    third particle and reveal the claimed bit with the steered kinds."""
    if claimed_bit not in (0, 1):
        raise ValueError(f"claimed_bit must be 0 or 1, got {claimed_bit!r}")
    weights = validate_family_weights(family_weights)
    rng = np.random.default_rng(seed)
    basis = generate_basis_vector(n, weights, rng)
    channel = [ghz_state()] * n
    outcomes, post_states = measure_channel(channel, basis, rng)
    claimed = tuple(
        delayed_choice_claim(state, claimed_bit, rng)[0] for state in post_states
    )
    reveal = RevealMessage(claimed_bit, claimed)
    verdict = bob_verify(reveal, basis, outcomes)
    transcript = build_transcript(
        seed,
        weights,
        reveal,
        basis,
        outcomes,
        verdict,
        strategy=EprDelayedChoice(claimed_bit).to_dict(),
    )
    return AttackSessionResult(verdict, transcript)
