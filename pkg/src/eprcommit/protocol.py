"""Honest two-party commitment sessions as explicit state machines.

Commit phase: the sender encodes bit 1 as pairs drawn uniformly from the
two phi kinds and bit 0 as pairs from the two psi kinds. For every pair
the receiver draws an axis pair from one of six constraint families:

    F1  theta1 = theta2 = 90          phi1 + phi2 = 0    (mod 360)
    F2  theta1 = theta2               phi1 + phi2 = 0
    F3  theta1 + theta2 = 180         phi1 + phi2 = 0
    F4  theta1 = theta2 = 90          phi1 + phi2 = 90
    F5  theta1 = theta2               phi1 + phi2 = 90
    F6  theta1 + theta2 = 180         phi1 + phi2 = 90

measures particle 1 along the first axis and particle 2 along the second,
and keeps both the axes and the outcomes secret.

Opening phase: the sender reveals the bit and the per-index kinds. The
receiver checks the outcome products that are deterministic for the
revealed kind (+1 at F1 and F2 for phi-plus, -1 at F1 and F3 for
phi-minus, +1 at F4 and F5 for psi-plus, -1 at F4 and F6 for psi-minus),
rejects outright if any revealed kind encodes the wrong bit, and accepts
iff every applicable product matches.

Sessions are reproducible: a session consumes one seeded stream in a fixed
order (basis, then commitment kinds, then measurements, one uniform draw
per decision), and transcripts serialize to a stable JSON document.
Independent sessions may run in parallel with streams derived from
(master_seed, session_index).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .jsonio import dumps_canonical
from .quantum import MeasurementAxis, StateVector, measure_qubit
from .states import CommitmentStateKind, commitment_state, kinds_for_bit

PROTOCOL_VERSION = 1

UNIFORM_WEIGHTS = (1.0 / 6.0,) * 6
F1F4_WEIGHTS = (0.5, 0.0, 0.0, 0.5, 0.0, 0.0)

# Tolerance, in degrees, for checking that stored axis pairs satisfy their
# family's angle relations (generation is exact up to float rounding).
FAMILY_ANGLE_TOL_DEG = 1e-9


class ConstraintFamily(Enum):
    F1 = "F1"
    F2 = "F2"
    F3 = "F3"
    F4 = "F4"
    F5 = "F5"
    F6 = "F6"

    @property
    def phi_sum_deg(self) -> float:
        """Target of (phi1 + phi2) mod 360 for this family."""
        return 0.0 if self.name in ("F1", "F2", "F3") else 90.0

    @property
    def certifies_bit(self) -> int:
        """The bit whose opening checks can apply at this family."""
        return 1 if self.phi_sum_deg == 0.0 else 0


FAMILIES = tuple(ConstraintFamily)

_REQUIRED_PRODUCT: dict[tuple[CommitmentStateKind, ConstraintFamily], int] = {
    (CommitmentStateKind.PHI_PLUS, ConstraintFamily.F1): 1,
    (CommitmentStateKind.PHI_PLUS, ConstraintFamily.F2): 1,
    (CommitmentStateKind.PHI_MINUS, ConstraintFamily.F1): -1,
    (CommitmentStateKind.PHI_MINUS, ConstraintFamily.F3): -1,
    (CommitmentStateKind.PSI_PLUS, ConstraintFamily.F4): 1,
    (CommitmentStateKind.PSI_PLUS, ConstraintFamily.F5): 1,
    (CommitmentStateKind.PSI_MINUS, ConstraintFamily.F4): -1,
    (CommitmentStateKind.PSI_MINUS, ConstraintFamily.F6): -1,
}


def required_product(kind: CommitmentStateKind, family: ConstraintFamily) -> int | None:
    """The deterministic product the receiver demands for a revealed kind at
    a family, or None when the pair is not checked."""
    return _REQUIRED_PRODUCT.get((kind, family))


def _check_bit(bit: int, name: str = "bit") -> int:
    if bit not in (0, 1):
        raise ValueError(f"{name} must be 0 or 1, got {bit!r}")
    return bit


def validate_family_weights(weights) -> tuple[float, ...]:
    """Validate six nonnegative weights summing to 1 and return them
    renormalized exactly."""
    values = tuple(float(w) for w in weights)
    if len(values) != 6:
        raise ValueError(f"family weights must have 6 entries, got {len(values)}")
    if any(not math.isfinite(w) or w < 0.0 for w in values):
        raise ValueError(f"family weights must be finite and nonnegative, got {values}")
    total = math.fsum(values)
    if abs(total - 1.0) > 1e-6:
        raise ValueError(f"family weights must sum to 1, got sum {total!r}")
    return tuple(w / total for w in values)


def _circular_distance_deg(angle_deg: float, target_deg: float) -> float:
    return abs((angle_deg - target_deg + 180.0) % 360.0 - 180.0)


def entry_satisfies_family(
    family: ConstraintFamily,
    axis1: MeasurementAxis,
    axis2: MeasurementAxis,
    tol_deg: float = FAMILY_ANGLE_TOL_DEG,
) -> bool:
    t1, t2 = axis1.theta_deg, axis2.theta_deg
    if family in (ConstraintFamily.F1, ConstraintFamily.F4):
        theta_ok = abs(t1 - 90.0) <= tol_deg and abs(t2 - 90.0) <= tol_deg
    elif family in (ConstraintFamily.F2, ConstraintFamily.F5):
        theta_ok = abs(t1 - t2) <= tol_deg
    else:
        theta_ok = abs(t1 + t2 - 180.0) <= tol_deg
    phi_ok = _circular_distance_deg(axis1.phi_deg + axis2.phi_deg, family.phi_sum_deg) <= tol_deg
    return theta_ok and phi_ok


@dataclass(frozen=True)
class BasisEntry:
    family: ConstraintFamily
    axis1: MeasurementAxis
    axis2: MeasurementAxis


@dataclass(frozen=True)
class BasisVector:
    """The receiver's secret per-index axis pairs with their families."""

    entries: tuple[BasisEntry, ...]

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError("basis vector must have at least one entry")
        for i, entry in enumerate(self.entries):
            if not entry_satisfies_family(entry.family, entry.axis1, entry.axis2):
                raise ValueError(
                    f"basis entry {i} does not satisfy the {entry.family.value} relations"
                )

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class CommitmentRecord:
    """The sender's committed bit and per-index kinds (honest senders use
    only kinds that encode the bit)."""

    lambda_bit: int
    kinds: tuple[CommitmentStateKind, ...]


@dataclass(frozen=True)
class RevealMessage:
    lambda_bit: int
    kinds: tuple[CommitmentStateKind, ...]


@dataclass(frozen=True)
class OutcomeRecord:
    """Per-index (m1, m2) measurement outcomes, each +1 or -1."""

    outcomes: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        for i, (m1, m2) in enumerate(self.outcomes):
            if m1 not in (1, -1) or m2 not in (1, -1):
                raise ValueError(f"outcome {i} must be a pair of +1/-1 values")

    def __len__(self) -> int:
        return len(self.outcomes)


@dataclass(frozen=True)
class VerificationFailure:
    index: int
    expected_product: int | None
    observed_product: int | None
    reason: str  # "product_mismatch" or "kind_bit_mismatch"


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    checked_count: int
    failures: tuple[VerificationFailure, ...]

    def __post_init__(self) -> None:
        if self.accepted != (len(self.failures) == 0):
            raise ValueError("verdict accepted flag must match emptiness of failures")


def _draw_uniform(rng: np.random.Generator, scale: float) -> float:
    return rng.random() * scale


def _draw_family(weights: tuple[float, ...], rng: np.random.Generator) -> ConstraintFamily:
    u = rng.random()
    acc = 0.0
    for family, weight in zip(FAMILIES, weights):
        acc += weight
        if u < acc:
            return family
    return FAMILIES[-1]  # guards rounding at u ~ 1


def generate_basis_vector(
    n: int, family_weights, rng: np.random.Generator
) -> BasisVector:
    """Draw n axis pairs: a family per the weights, then the free parameters
    (theta uniform on [0, 180] where unconstrained, phi1 uniform on
    [0, 360), phi2 = (target - phi1) mod 360)."""
    weights = validate_family_weights(family_weights)
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    entries = []
    for _ in range(n):
        family = _draw_family(weights, rng)
        if family in (ConstraintFamily.F1, ConstraintFamily.F4):
            theta1 = theta2 = 90.0
        elif family in (ConstraintFamily.F2, ConstraintFamily.F5):
            theta1 = theta2 = _draw_uniform(rng, 180.0)
        else:
            theta1 = _draw_uniform(rng, 180.0)
            theta2 = 180.0 - theta1
        phi1 = _draw_uniform(rng, 360.0)
        phi2 = (family.phi_sum_deg - phi1) % 360.0
        entries.append(
            BasisEntry(family, MeasurementAxis(theta1, phi1), MeasurementAxis(theta2, phi2))
        )
    return BasisVector(tuple(entries))


def alice_commit(
    lambda_bit: int, n: int, rng: np.random.Generator
) -> tuple[CommitmentRecord, list[StateVector]]:
    """Commit to a bit: per index, one of the bit's two kinds uniformly, and
    the matching pair state on the quantum channel."""
    _check_bit(lambda_bit, "lambda")
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    first, second = kinds_for_bit(lambda_bit)
    kinds = tuple(first if rng.random() < 0.5 else second for _ in range(n))
    channel = [commitment_state(kind) for kind in kinds]
    return CommitmentRecord(lambda_bit, kinds), channel


def measure_channel(
    channel, basis: BasisVector, rng: np.random.Generator
) -> tuple[OutcomeRecord, tuple[StateVector, ...]]:
    """Measure particle 1 then particle 2 of every channel state along the
    basis axes; returns the outcomes and the post-measurement states."""
    if len(channel) != len(basis):
        raise ValueError(
            f"channel length {len(channel)} does not match basis length {len(basis)}"
        )
    outcomes = []
    post_states = []
    for state, entry in zip(channel, basis.entries):
        m1, state = measure_qubit(state, 1, entry.axis1, rng)
        m2, state = measure_qubit(state, 2, entry.axis2, rng)
        outcomes.append((m1, m2))
        post_states.append(state)
    return OutcomeRecord(tuple(outcomes)), tuple(post_states)


def bob_measure(channel, basis: BasisVector, rng: np.random.Generator) -> OutcomeRecord:
    outcomes, _ = measure_channel(channel, basis, rng)
    return outcomes


def alice_reveal(record: CommitmentRecord) -> RevealMessage:
    """Faithful copy of the record onto the classical channel; dishonest
    contents are transmitted verbatim and left for the receiver to detect."""
    return RevealMessage(record.lambda_bit, record.kinds)


def bob_verify(
    reveal: RevealMessage, basis: BasisVector, outcomes: OutcomeRecord
) -> Verdict:
    """Apply the opening checks to the revealed kinds.

    ``checked_count`` counts the indices whose family certifies the revealed
    bit (azimuthal sum 0 for bit 1, 90 for bit 0); with uniform family
    weights that is about half the indices.
    """
    n = len(basis)
    if len(reveal.kinds) != n or len(outcomes) != n:
        raise ValueError("reveal, basis and outcomes must have equal lengths")
    _check_bit(reveal.lambda_bit, "lambda")
    checked_count = sum(
        1 for entry in basis.entries if entry.family.certifies_bit == reveal.lambda_bit
    )
    mismatched = [i for i, kind in enumerate(reveal.kinds) if kind.bit != reveal.lambda_bit]
    if mismatched:
        failures = tuple(
            VerificationFailure(i, None, None, "kind_bit_mismatch") for i in mismatched
        )
        return Verdict(False, checked_count, failures)
    failures = []
    for i, (entry, kind, (m1, m2)) in enumerate(
        zip(basis.entries, reveal.kinds, outcomes.outcomes)
    ):
        expected = required_product(kind, entry.family)
        if expected is not None and m1 * m2 != expected:
            failures.append(VerificationFailure(i, expected, m1 * m2, "product_mismatch"))
    return Verdict(not failures, checked_count, tuple(failures))


@dataclass(frozen=True)
class TranscriptEntry:
    index: int
    family: ConstraintFamily
    axis1: MeasurementAxis
    axis2: MeasurementAxis
    kind_revealed: CommitmentStateKind
    m1: int
    m2: int
    checked: bool
    expected_product: int | None


@dataclass(frozen=True)
class Transcript:
    """Full session record; serializes to a stable JSON document.

    ``verdict.checked_count`` counts family-filter matches while each
    entry's ``checked`` flag marks whether a deterministic product rule
    actually applied to the revealed kind at that index.
    """

    protocol_version: int
    seed: int
    n: int
    family_weights: tuple[float, ...]
    lambda_claimed: int
    entries: tuple[TranscriptEntry, ...]
    verdict: Verdict
    strategy: dict | None = None

    def to_dict(self) -> dict:
        doc = {
            "protocol_version": self.protocol_version,
            "seed": self.seed,
            "n": self.n,
            "family_weights": list(self.family_weights),
            "lambda_claimed": self.lambda_claimed,
            "entries": [
                {
                    "index": e.index,
                    "family": e.family.value,
                    "theta1": e.axis1.theta_deg,
                    "phi1": e.axis1.phi_deg,
                    "theta2": e.axis2.theta_deg,
                    "phi2": e.axis2.phi_deg,
                    "kind_revealed": e.kind_revealed.value,
                    "m1": e.m1,
                    "m2": e.m2,
                    "checked": e.checked,
                    "expected_product": e.expected_product,
                }
                for e in self.entries
            ],
            "verdict": {
                "accepted": self.verdict.accepted,
                "checked_count": self.verdict.checked_count,
                "failures": [
                    {
                        "index": f.index,
                        "expected_product": f.expected_product,
                        "observed_product": f.observed_product,
                        "reason": f.reason,
                    }
                    for f in self.verdict.failures
                ],
            },
        }
        if self.strategy is not None:
            doc["strategy"] = dict(self.strategy)
        return doc

    def to_json(self) -> str:
        return dumps_canonical(self.to_dict())


def build_transcript(
    seed,
    family_weights: tuple[float, ...],
    reveal: RevealMessage,
    basis: BasisVector,
    outcomes: OutcomeRecord,
    verdict: Verdict,
    strategy: dict | None = None,
) -> Transcript:
    entries = tuple(
        TranscriptEntry(
            index=i,
            family=entry.family,
            axis1=entry.axis1,
            axis2=entry.axis2,
            kind_revealed=kind,
            m1=m1,
            m2=m2,
            checked=required_product(kind, entry.family) is not None,
            expected_product=required_product(kind, entry.family),
        )
        for i, (entry, kind, (m1, m2)) in enumerate(
            zip(basis.entries, reveal.kinds, outcomes.outcomes)
        )
    )
    return Transcript(
        protocol_version=PROTOCOL_VERSION,
        seed=seed,
        n=len(basis),
        family_weights=family_weights,
        lambda_claimed=reveal.lambda_bit,
        entries=entries,
        verdict=verdict,
        strategy=strategy,
    )


def run_honest_session(lambda_bit: int, n: int, family_weights, seed) -> Transcript:
    """Commit, measure, reveal and verify with both parties honest.

    The seed is recorded in the transcript; the session derives one stream
    from it, so a fixed seed reproduces the transcript byte for byte.
    """
    _check_bit(lambda_bit, "lambda")
    weights = validate_family_weights(family_weights)
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    rng = np.random.default_rng(seed)
    basis = generate_basis_vector(n, weights, rng)
    record, channel = alice_commit(lambda_bit, n, rng)
    outcomes = bob_measure(channel, basis, rng)
    reveal = alice_reveal(record)
    verdict = bob_verify(reveal, basis, outcomes)
    return build_transcript(seed, weights, reveal, basis, outcomes, verdict)


class TranscriptSchemaError(ValueError):
    """A transcript document violated the schema; ``problems`` lists each
    offending field path."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = list(problems)


_FAMILY_BY_VALUE = {f.value: f for f in FAMILIES}
_KIND_BY_VALUE = {k.value: k for k in CommitmentStateKind}


def transcript_from_dict(data) -> Transcript:
    """Parse and validate a transcript document, reporting every schema
    violation with its field path."""
    problems: list[str] = []
    if not isinstance(data, dict):
        raise TranscriptSchemaError(["document: expected a JSON object"])

    def need(key, kinds, where="document"):
        value = data.get(key)
        if not isinstance(value, kinds) or isinstance(value, bool) and kinds is not bool:
            problems.append(f"{where}.{key}: missing or wrong type")
            return None
        return value

    version = need("protocol_version", int)
    seed = data.get("seed")
    if not isinstance(seed, (int, list)) or isinstance(seed, bool):
        problems.append("document.seed: missing or wrong type")
    n = need("n", int)
    lam = need("lambda_claimed", int)
    if lam is not None and lam not in (0, 1):
        problems.append("document.lambda_claimed: must be 0 or 1")
    weights_raw = data.get("family_weights")
    weights: tuple[float, ...] | None = None
    if not isinstance(weights_raw, list) or len(weights_raw) != 6:
        problems.append("document.family_weights: expected a list of 6 numbers")
    else:
        try:
            weights = validate_family_weights(weights_raw)
        except ValueError as exc:
            problems.append(f"document.family_weights: {exc}")
    entries_raw = data.get("entries")
    if not isinstance(entries_raw, list) or (n is not None and len(entries_raw) != n):
        problems.append("document.entries: expected a list of n entry objects")
        entries_raw = []
    entries: list[TranscriptEntry] = []
    for i, raw in enumerate(entries_raw):
        where = f"entries[{i}]"
        if not isinstance(raw, dict):
            problems.append(f"{where}: expected an object")
            continue
        family = _FAMILY_BY_VALUE.get(raw.get("family"))
        if family is None:
            problems.append(f"{where}.family: unknown family {raw.get('family')!r}")
        kind = _KIND_BY_VALUE.get(raw.get("kind_revealed"))
        if kind is None:
            problems.append(f"{where}.kind_revealed: unknown kind {raw.get('kind_revealed')!r}")
        angles = {}
        for key in ("theta1", "phi1", "theta2", "phi2"):
            value = raw.get(key)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                problems.append(f"{where}.{key}: missing or wrong type")
            else:
                angles[key] = float(value)
        for key in ("m1", "m2"):
            if raw.get(key) not in (1, -1):
                problems.append(f"{where}.{key}: expected +1 or -1")
        if family is None or kind is None or len(angles) != 4:
            continue
        try:
            axis1 = MeasurementAxis(angles["theta1"], angles["phi1"])
            axis2 = MeasurementAxis(angles["theta2"], angles["phi2"])
        except ValueError as exc:
            problems.append(f"{where}: {exc}")
            continue
        entries.append(
            TranscriptEntry(
                index=raw.get("index", i),
                family=family,
                axis1=axis1,
                axis2=axis2,
                kind_revealed=kind,
                m1=raw["m1"],
                m2=raw["m2"],
                checked=bool(raw.get("checked", False)),
                expected_product=raw.get("expected_product"),
            )
        )
    verdict_raw = data.get("verdict")
    verdict = None
    if not isinstance(verdict_raw, dict):
        problems.append("document.verdict: expected an object")
    else:
        accepted = verdict_raw.get("accepted")
        checked_count = verdict_raw.get("checked_count")
        failures_raw = verdict_raw.get("failures")
        if not isinstance(accepted, bool):
            problems.append("verdict.accepted: expected a boolean")
        if not isinstance(checked_count, int) or isinstance(checked_count, bool):
            problems.append("verdict.checked_count: expected an integer")
        if not isinstance(failures_raw, list):
            problems.append("verdict.failures: expected a list")
            failures_raw = []
        failures = []
        for j, raw in enumerate(failures_raw):
            if not isinstance(raw, dict) or not isinstance(raw.get("index"), int):
                problems.append(f"verdict.failures[{j}]: malformed failure record")
                continue
            failures.append(
                VerificationFailure(
                    index=raw["index"],
                    expected_product=raw.get("expected_product"),
                    observed_product=raw.get("observed_product"),
                    reason=raw.get("reason", "product_mismatch"),
                )
            )
        if not problems:
            try:
                verdict = Verdict(accepted, checked_count, tuple(failures))
            except ValueError as exc:
                problems.append(f"verdict: {exc}")
    if problems:
        raise TranscriptSchemaError(problems)
    assert weights is not None and verdict is not None
    return Transcript(
        protocol_version=version,
        seed=seed,
        n=n,
        family_weights=weights,
        lambda_claimed=lam,
        entries=tuple(entries),
        verdict=verdict,
        strategy=data.get("strategy"),
    )


def recheck_transcript(transcript: Transcript) -> Verdict:
    """Recompute the verdict from a transcript's entries.

    Raises TranscriptSchemaError when the stored axis pairs violate their
    family relations.
    """
    try:
        basis = BasisVector(
            tuple(BasisEntry(e.family, e.axis1, e.axis2) for e in transcript.entries)
        )
    except ValueError as exc:
        raise TranscriptSchemaError([f"entries: {exc}"]) from exc
    reveal = RevealMessage(
        transcript.lambda_claimed, tuple(e.kind_revealed for e in transcript.entries)
    )
    outcomes = OutcomeRecord(tuple((e.m1, e.m2) for e in transcript.entries))
    return bob_verify(reveal, basis, outcomes)
