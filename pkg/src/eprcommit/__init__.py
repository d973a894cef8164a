"""State-vector simulator and analysis harness for an entanglement-based
two-party bit commitment protocol: honest commit/open sessions, the
receiver's zero-information property, the naive substitution cheat and its
failure rate, and the delayed-choice attack that breaks the scheme."""

__version__ = "0.1.0"

from .quantum import (
    DensityMatrix,
    InvariantError,
    MeasurementAxis,
    StateVector,
    basis_expansion,
    expectation_product,
    joint_outcome_distribution,
    measure_qubit,
    measurement_branch,
    mixture_density,
    spin_observable,
    states_equal,
)
from .states import (
    CommitmentStateKind,
    CorrelationResult,
    closed_form_correlation,
    commitment_state,
    ghz_decomposition_residual,
    ghz_state,
    kinds_for_bit,
)
from .protocol import (
    BasisEntry,
    BasisVector,
    CommitmentRecord,
    ConstraintFamily,
    F1F4_WEIGHTS,
    OutcomeRecord,
    RevealMessage,
    Transcript,
    TranscriptSchemaError,
    UNIFORM_WEIGHTS,
    Verdict,
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
from .attacks import (
    AttackSessionResult,
    EprDelayedChoice,
    NaiveSubstitution,
    delayed_choice_claim,
    epr_attack_session,
    naive_cheat_session,
)
from .harness import (
    CheatEstimate,
    ExperimentConfig,
    correlation_table,
    estimate_cheat_success,
    fixed_count_cheat_bound,
    indistinguishability_report,
    naive_cheat_oracle,
    run_experiment,
    wilson_interval,
)

__all__ = [
    "__version__",
    "AttackSessionResult",
    "BasisEntry",
    "BasisVector",
    "CheatEstimate",
    "CommitmentRecord",
    "CommitmentStateKind",
    "ConstraintFamily",
    "CorrelationResult",
    "DensityMatrix",
    "EprDelayedChoice",
    "ExperimentConfig",
    "F1F4_WEIGHTS",
    "InvariantError",
    "MeasurementAxis",
    "NaiveSubstitution",
    "OutcomeRecord",
    "RevealMessage",
    "StateVector",
    "Transcript",
    "TranscriptSchemaError",
    "UNIFORM_WEIGHTS",
    "Verdict",
    "alice_commit",
    "alice_reveal",
    "basis_expansion",
    "bob_measure",
    "bob_verify",
    "closed_form_correlation",
    "commitment_state",
    "correlation_table",
    "delayed_choice_claim",
    "epr_attack_session",
    "estimate_cheat_success",
    "expectation_product",
    "fixed_count_cheat_bound",
    "generate_basis_vector",
    "ghz_decomposition_residual",
    "ghz_state",
    "indistinguishability_report",
    "joint_outcome_distribution",
    "kinds_for_bit",
    "measure_qubit",
    "measurement_branch",
    "mixture_density",
    "naive_cheat_oracle",
    "naive_cheat_session",
    "recheck_transcript",
    "required_product",
    "run_experiment",
    "run_honest_session",
    "spin_observable",
    "states_equal",
    "transcript_from_dict",
    "validate_family_weights",
    "wilson_interval",
]
