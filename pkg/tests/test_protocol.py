"""Protocol state-machine tests: basis generation, commitment, measurement,
verification rules, transcripts, and the receiver's zero-information
property through full sessions."""

import json
import math

import numpy as np
import pytest
from scipy import stats

from eprcommit import (
    BasisEntry,
    BasisVector,
    CommitmentStateKind,
    ConstraintFamily,
    F1F4_WEIGHTS,
    MeasurementAxis,
    OutcomeRecord,
    RevealMessage,
    UNIFORM_WEIGHTS,
    alice_commit,
    alice_reveal,
    bob_measure,
    bob_verify,
    generate_basis_vector,
    recheck_transcript,
    required_product,
    run_honest_session,
    transcript_from_dict,
    validate_family_weights,
)
from eprcommit.protocol import (
    CommitmentRecord,
    TranscriptSchemaError,
    entry_satisfies_family,
)


class TestFamilies:
    def test_phi_sum_targets(self):
        for family in ConstraintFamily:
            expected = 0.0 if family.value in ("F1", "F2", "F3") else 90.0
            assert family.phi_sum_deg == expected
            assert family.certifies_bit == (1 if expected == 0.0 else 0)

    def test_weight_validation(self):
        with pytest.raises(ValueError, match="6 entries"):
            validate_family_weights((1.0,))
        with pytest.raises(ValueError, match="nonnegative"):
            validate_family_weights((1.2, -0.2, 0, 0, 0, 0))
        with pytest.raises(ValueError, match="sum to 1"):
            validate_family_weights((0.5, 0.5, 0.5, 0, 0, 0))
        weights = validate_family_weights(UNIFORM_WEIGHTS)
        assert math.fsum(weights) == pytest.approx(1.0, abs=1e-15)


class TestGenerateBasisVector:
    def test_entries_satisfy_their_families(self):
        rng = np.random.default_rng(2)
        basis = generate_basis_vector(300, UNIFORM_WEIGHTS, rng)
        for entry in basis.entries:
            assert entry_satisfies_family(entry.family, entry.axis1, entry.axis2)

    def test_single_family_weight(self):
        rng = np.random.default_rng(3)
        basis = generate_basis_vector(50, (0, 0, 0, 0, 0, 1.0), rng)
        for entry in basis.entries:
            assert entry.family is ConstraintFamily.F6
            assert abs(entry.axis1.theta_deg + entry.axis2.theta_deg - 180.0) < 1e-9
            phi_sum = (entry.axis1.phi_deg + entry.axis2.phi_deg) % 360.0
            assert min(abs(phi_sum - 90.0), abs(phi_sum - 450.0)) < 1e-9

    def test_f1_fully_constrained_but_phi(self):
        rng = np.random.default_rng(4)
        basis = generate_basis_vector(1, (1.0, 0, 0, 0, 0, 0), rng)
        entry = basis.entries[0]
        assert entry.axis1.theta_deg == 90.0 and entry.axis2.theta_deg == 90.0
        phi_sum = (entry.axis1.phi_deg + entry.axis2.phi_deg) % 360.0
        assert min(phi_sum, 360.0 - phi_sum) < 1e-9

    def test_family_histogram_uniform(self):
        rng = np.random.default_rng(5)
        basis = generate_basis_vector(1000, UNIFORM_WEIGHTS, rng)
        counts = {
            family: sum(1 for e in basis.entries if e.family is family)
            for family in ConstraintFamily
        }
        expected = 1000 / 6
        tolerance = 4 * math.sqrt(1000 * (1 / 6) * (5 / 6))
        for family, count in counts.items():
            assert abs(count - expected) <= tolerance

    def test_invalid_inputs(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError, match="at least 1"):
            generate_basis_vector(0, UNIFORM_WEIGHTS, rng)
        with pytest.raises(ValueError):
            generate_basis_vector(5, (1, 1, 1, 1, 1, 1), rng)

    def test_basis_vector_rejects_violating_entry(self):
        good = MeasurementAxis(90.0, 10.0)
        bad = MeasurementAxis(70.0, 350.0)
        with pytest.raises(ValueError, match="entry 0"):
            BasisVector((BasisEntry(ConstraintFamily.F1, good, bad),))


class TestAliceCommit:
    def test_kinds_match_bit(self):
        rng = np.random.default_rng(6)
        record, channel = alice_commit(1, 100, rng)
        assert all(kind.bit == 1 for kind in record.kinds)
        record, channel = alice_commit(0, 100, rng)
        assert all(kind.bit == 0 for kind in record.kinds)
        assert len(channel) == 100

    def test_kind_split_is_binomial(self):
        rng = np.random.default_rng(7)
        record, _ = alice_commit(1, 2000, rng)
        plus = sum(1 for k in record.kinds if k is CommitmentStateKind.PHI_PLUS)
        assert abs(plus - 1000) <= 4 * math.sqrt(2000 * 0.25)

    def test_bad_inputs(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            alice_commit(2, 5, rng)
        with pytest.raises(ValueError):
            alice_commit(0, 0, rng)


class TestBobMeasure:
    def test_deterministic_products(self):
        rng = np.random.default_rng(8)
        f1 = BasisVector(
            (BasisEntry(ConstraintFamily.F1, MeasurementAxis(90, 25), MeasurementAxis(90, 335)),)
        )
        f4 = BasisVector(
            (BasisEntry(ConstraintFamily.F4, MeasurementAxis(90, 25), MeasurementAxis(90, 65)),)
        )
        from eprcommit import commitment_state

        for _ in range(200):
            outcomes = bob_measure(
                [commitment_state(CommitmentStateKind.PHI_PLUS)], f1, rng
            )
            m1, m2 = outcomes.outcomes[0]
            assert m1 * m2 == 1
            outcomes = bob_measure(
                [commitment_state(CommitmentStateKind.PSI_MINUS)], f4, rng
            )
            m1, m2 = outcomes.outcomes[0]
            assert m1 * m2 == -1

    def test_free_polar_family_statistics(self):
        # a bit-1 state at the 45-degree free-polar family with azimuthal
        # sum 90: product +1 with probability (1 + cos^2 45)/2 = 0.75
        from eprcommit import commitment_state

        rng = np.random.default_rng(9)
        basis = BasisVector(
            (BasisEntry(ConstraintFamily.F5, MeasurementAxis(45, 100), MeasurementAxis(45, 350)),)
        )
        samples = 10_000
        hits = 0
        state = commitment_state(CommitmentStateKind.PHI_PLUS)
        for _ in range(samples):
            m1, m2 = bob_measure([state], basis, rng).outcomes[0]
            hits += m1 * m2 == 1
        se = math.sqrt(0.75 * 0.25 / samples)
        assert abs(hits / samples - 0.75) <= 4 * se

    def test_length_mismatch(self):
        from eprcommit import commitment_state

        rng = np.random.default_rng(0)
        basis = generate_basis_vector(2, UNIFORM_WEIGHTS, rng)
        with pytest.raises(ValueError, match="length"):
            bob_measure([commitment_state(CommitmentStateKind.PHI_PLUS)], basis, rng)


class TestAliceReveal:
    def test_identity_copy(self):
        record = CommitmentRecord(1, (CommitmentStateKind.PHI_PLUS,))
        message = alice_reveal(record)
        assert message.lambda_bit == 1
        assert message.kinds == (CommitmentStateKind.PHI_PLUS,)

    def test_order_preserved(self):
        kinds = (
            CommitmentStateKind.PSI_PLUS,
            CommitmentStateKind.PSI_MINUS,
            CommitmentStateKind.PSI_PLUS,
            CommitmentStateKind.PSI_MINUS,
            CommitmentStateKind.PSI_PLUS,
        )
        message = alice_reveal(CommitmentRecord(0, kinds))
        assert message.kinds == kinds

    def test_dishonest_record_transmitted_verbatim(self):
        # detection is the receiver's job, not the sender's
        record = CommitmentRecord(1, (CommitmentStateKind.PSI_PLUS,))
        message = alice_reveal(record)
        assert message.kinds == (CommitmentStateKind.PSI_PLUS,)


def _basis_of(*rows):
    entries = []
    for family, theta1, phi1, theta2, phi2 in rows:
        entries.append(
            BasisEntry(family, MeasurementAxis(theta1, phi1), MeasurementAxis(theta2, phi2))
        )
    return BasisVector(tuple(entries))


class TestBobVerify:
    def test_required_product_table(self):
        assert required_product(CommitmentStateKind.PHI_PLUS, ConstraintFamily.F1) == 1
        assert required_product(CommitmentStateKind.PHI_PLUS, ConstraintFamily.F3) is None
        assert required_product(CommitmentStateKind.PHI_MINUS, ConstraintFamily.F3) == -1
        assert required_product(CommitmentStateKind.PSI_MINUS, ConstraintFamily.F6) == -1
        assert required_product(CommitmentStateKind.PSI_PLUS, ConstraintFamily.F1) is None

    def test_unchecked_family_ignored(self):
        basis = _basis_of((ConstraintFamily.F4, 90, 10, 90, 80))
        reveal = RevealMessage(1, (CommitmentStateKind.PHI_PLUS,))
        outcomes = OutcomeRecord(((1, -1),))  # product -1, but F4 not checked for bit 1
        verdict = bob_verify(reveal, basis, outcomes)
        assert verdict.accepted
        assert verdict.checked_count == 0

    def test_checked_family_failure_recorded(self):
        basis = _basis_of((ConstraintFamily.F1, 90, 10, 90, 350))
        reveal = RevealMessage(1, (CommitmentStateKind.PHI_PLUS,))
        outcomes = OutcomeRecord(((1, -1),))
        verdict = bob_verify(reveal, basis, outcomes)
        assert not verdict.accepted
        assert verdict.checked_count == 1
        assert len(verdict.failures) == 1
        failure = verdict.failures[0]
        assert (failure.index, failure.expected_product, failure.observed_product) == (0, 1, -1)

    def test_kind_bit_mismatch_rejects(self):
        basis = _basis_of((ConstraintFamily.F1, 90, 10, 90, 350))
        reveal = RevealMessage(1, (CommitmentStateKind.PSI_PLUS,))
        outcomes = OutcomeRecord(((1, 1),))
        verdict = bob_verify(reveal, basis, outcomes)
        assert not verdict.accepted
        assert verdict.failures[0].reason == "kind_bit_mismatch"

    def test_checked_count_uses_bit_filter(self):
        basis = _basis_of(
            (ConstraintFamily.F1, 90, 10, 90, 350),
            (ConstraintFamily.F3, 40, 20, 140, 340),
            (ConstraintFamily.F4, 90, 10, 90, 80),
        )
        reveal = RevealMessage(
            1, (CommitmentStateKind.PHI_PLUS,) * 3
        )
        outcomes = OutcomeRecord(((1, 1), (1, 1), (1, 1)))
        verdict = bob_verify(reveal, basis, outcomes)
        # F1 and F3 match the bit-1 filter even though phi-plus has no F3 rule
        assert verdict.checked_count == 2
        assert verdict.accepted

    def test_is_pure_function(self):
        basis = _basis_of((ConstraintFamily.F1, 90, 10, 90, 350))
        reveal = RevealMessage(1, (CommitmentStateKind.PHI_MINUS,))
        outcomes = OutcomeRecord(((1, -1),))
        first = bob_verify(reveal, basis, outcomes)
        second = bob_verify(reveal, basis, outcomes)
        assert first == second


class TestHonestSessions:
    def test_honest_completeness(self):
        rng = np.random.default_rng(77)
        for i in range(150):
            lam = int(rng.integers(2))
            transcript = run_honest_session(lam, 8, UNIFORM_WEIGHTS, int(rng.integers(2**32)))
            assert transcript.verdict.accepted, f"session {i} rejected"

    def test_rejects_n_zero(self):
        with pytest.raises(ValueError, match="at least 1"):
            run_honest_session(1, 0, UNIFORM_WEIGHTS, 1)

    def test_checked_count_near_half(self):
        rng = np.random.default_rng(78)
        fractions = []
        for _ in range(200):
            t = run_honest_session(int(rng.integers(2)), 20, UNIFORM_WEIGHTS, int(rng.integers(2**32)))
            fractions.append(t.verdict.checked_count / t.n)
        mean = sum(fractions) / len(fractions)
        se = np.std(fractions, ddof=1) / math.sqrt(len(fractions))
        assert abs(mean - 0.5) <= 4 * se

    def test_f1f4_preset_sessions_accept(self):
        for seed in range(20):
            transcript = run_honest_session(seed % 2, 12, F1F4_WEIGHTS, seed)
            assert transcript.verdict.accepted


class TestTranscript:
    def test_fixed_seed_reproduces_bytes(self):
        first = run_honest_session(1, 15, UNIFORM_WEIGHTS, 123).to_json()
        second = run_honest_session(1, 15, UNIFORM_WEIGHTS, 123).to_json()
        assert first == second

    def test_round_trip(self):
        transcript = run_honest_session(0, 10, UNIFORM_WEIGHTS, 99)
        data = json.loads(transcript.to_json())
        parsed = transcript_from_dict(data)
        assert parsed.lambda_claimed == transcript.lambda_claimed
        assert parsed.n == transcript.n
        assert parsed.verdict == transcript.verdict
        assert recheck_transcript(parsed) == transcript.verdict

    def test_schema_errors_carry_field_paths(self):
        transcript = run_honest_session(0, 3, UNIFORM_WEIGHTS, 7)
        data = json.loads(transcript.to_json())
        data["entries"][1]["m1"] = 3
        del data["lambda_claimed"]
        with pytest.raises(TranscriptSchemaError) as err:
            transcript_from_dict(data)
        text = str(err.value)
        assert "entries[1].m1" in text
        assert "lambda_claimed" in text

    def test_recheck_detects_tamper(self):
        transcript = run_honest_session(1, 20, F1F4_WEIGHTS, 5)
        data = json.loads(transcript.to_json())
        target = next(e for e in data["entries"] if e["checked"])
        target["m1"] = -target["m1"]
        tampered = transcript_from_dict(data)
        recomputed = recheck_transcript(tampered)
        assert recomputed != tampered.verdict
        assert not recomputed.accepted
        assert any(f.index == target["index"] for f in recomputed.failures)


class TestZeroInformationThroughSessions:
    def test_chi_square_on_family_outcome_triples(self):
        # 1e5 (family, m1, m2) triples per bit through real sessions; the
        # two bits must be statistically indistinguishable
        sessions = 200
        n = 500
        tables = {}
        for lam in (0, 1):
            counts = {}
            for s in range(sessions):
                rng = np.random.default_rng([909, lam, s])
                basis = generate_basis_vector(n, UNIFORM_WEIGHTS, rng)
                record, channel = alice_commit(lam, n, rng)
                outcomes = bob_measure(channel, basis, rng)
                for entry, (m1, m2) in zip(basis.entries, outcomes.outcomes):
                    key = (entry.family.value, m1, m2)
                    counts[key] = counts.get(key, 0) + 1
            tables[lam] = counts
        keys = sorted(set(tables[0]) | set(tables[1]))
        table = np.array(
            [[tables[lam].get(key, 0) for key in keys] for lam in (0, 1)]
        )
        _, p_value, _, _ = stats.chi2_contingency(table, correction=False)
        assert p_value > 0.01
