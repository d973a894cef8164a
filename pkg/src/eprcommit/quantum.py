"""Minimal dense state-vector engine for one to three spin-1/2 particles.

Fixed conventions (these make serialized runs reproducible):

* Particle 1 is the most significant bit of the basis index, with spin-up
  before spin-down, so a two-particle basis is ordered (uu, ud, du, dd).
* Angles are degrees at every public interface: polar theta in [0, 180]
  measured from the z axis, azimuthal phi in [0, 360) measured from the
  x axis. Trigonometry is exact at multiples of 90 degrees.
* Measurement kets use the half-angle phase convention. Along (theta, phi)
  the +1 ket is ``e^(-i phi/2) cos(theta/2) |up> + e^(+i phi/2) sin(theta/2) |down>``
  and the -1 ket is ``-e^(-i phi/2) sin(theta/2) |up> + e^(+i phi/2) cos(theta/2) |down>``.
  States are compared up to a global phase everywhere downstream.
* All sampling consumes an explicit ``numpy.random.Generator``, exactly one
  uniform draw per projective measurement; there is no global randomness.

Everything here is immutable once constructed and operations return new
values, so values can be shared freely across threads as long as parallel
callers use independent generators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

NORM_TOL = 1e-12
# Branch probabilities within this distance of 0 or 1 are treated as exact,
# which keeps algebraically deterministic outcomes deterministic in floats.
DEGENERATE_PROB = 1e-14


class InvariantError(RuntimeError):
    """An internal numerical invariant was violated (not a caller error)."""


def cos_deg(angle_deg: float) -> float:
    """Cosine of an angle in degrees, exact at multiples of 90."""
    r = angle_deg % 360.0
    if r == 0.0:
        return 1.0
    if r == 90.0 or r == 270.0:
        return 0.0
    if r == 180.0:
        return -1.0
    return math.cos(math.radians(r))


def sin_deg(angle_deg: float) -> float:
    """Sine of an angle in degrees, exact at multiples of 90."""
    r = angle_deg % 360.0
    if r == 0.0 or r == 180.0:
        return 0.0
    if r == 90.0:
        return 1.0
    if r == 270.0:
        return -1.0
    return math.sin(math.radians(r))


def phase_deg(angle_deg: float) -> complex:
    """Unit phase e^(i * angle) for an angle in degrees."""
    return complex(cos_deg(angle_deg), sin_deg(angle_deg))


@dataclass(frozen=True)
class MeasurementAxis:
    """Spin direction given by polar ``theta_deg`` from z and azimuthal
    ``phi_deg`` from x, both in degrees. ``phi_deg`` is normalized to
    [0, 360) at construction."""

    theta_deg: float
    phi_deg: float

    def __post_init__(self) -> None:
        theta = float(self.theta_deg)
        phi = float(self.phi_deg)
        if not (math.isfinite(theta) and math.isfinite(phi)):
            raise ValueError("axis angles must be finite")
        if not 0.0 <= theta <= 180.0:
            raise ValueError(f"theta must lie in [0, 180] degrees, got {theta}")
        object.__setattr__(self, "theta_deg", theta)
        object.__setattr__(self, "phi_deg", phi % 360.0)


class StateVector:
    """Normalized complex amplitude vector over 1, 2 or 3 particles."""

    __slots__ = ("_amps", "qubit_count")

    def __init__(self, amplitudes) -> None:
        amps = np.array(amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size not in (2, 4, 8):
            raise ValueError(
                f"amplitude vector must have length 2, 4 or 8, got {amps.size}"
            )
        if not np.isfinite(amps).all():
            raise ValueError("amplitudes must be finite")
        norm_sq = float(np.sum(np.abs(amps) ** 2))
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized: sum |a|^2 = {norm_sq!r}")
        amps.setflags(write=False)
        self._amps = amps
        self.qubit_count = amps.size.bit_length() - 1

    @classmethod
    def _renormalized(cls, amplitudes: np.ndarray, qubit_count: int) -> "StateVector":
        # Fast path for states that are normalized by construction
        # (projections divided by their own norm); skips re-validation.
        obj = object.__new__(cls)
        amplitudes.setflags(write=False)
        obj._amps = amplitudes
        obj.qubit_count = qubit_count
        return obj

    @property
    def amplitudes(self) -> np.ndarray:
        """Read-only amplitude array, basis-ordered with particle 1 as the
        most significant bit."""
        return self._amps

    def __repr__(self) -> str:
        return f"StateVector({self._amps.tolist()!r})"


def states_equal(a: StateVector, b: StateVector, tol: float = 1e-10) -> bool:
    """True when the two states agree up to a global phase."""
    if a.qubit_count != b.qubit_count:
        return False
    return abs(abs(np.vdot(a.amplitudes, b.amplitudes)) - 1.0) <= tol


@lru_cache(maxsize=4096)
def _axis_kets(theta_deg: float, phi_deg: float) -> tuple[np.ndarray, np.ndarray]:
    c = cos_deg(theta_deg / 2.0)
    s = sin_deg(theta_deg / 2.0)
    ph = phase_deg(phi_deg / 2.0)
    ph_conj = ph.conjugate()
    both = np.array(
        [[ph_conj * c, ph * s], [-ph_conj * s, ph * c]], dtype=np.complex128
    )
    both.setflags(write=False)
    return both[0], both[1]


def basis_expansion(axis: MeasurementAxis) -> tuple[StateVector, StateVector]:
    """The +1 and -1 measurement kets along ``axis`` in the computational
    basis, under the module's half-angle phase convention."""
    plus, minus = _axis_kets(axis.theta_deg, axis.phi_deg)
    return StateVector(plus), StateVector(minus)


def spin_observable(axis: MeasurementAxis) -> np.ndarray:
    """2x2 spin operator along ``axis``: (+1)|+><+| + (-1)|-><-|.

    Hermitian with eigenvalues +1 and -1; equals diag(1, -1) on the z axis.
    """
    plus, minus = _axis_kets(axis.theta_deg, axis.phi_deg)
    return np.outer(plus, plus.conj()) - np.outer(minus, minus.conj())


def _check_qubit_index(state: StateVector, qubit_index: int) -> None:
    if not 1 <= qubit_index <= state.qubit_count:
        raise ValueError(
            f"qubit index {qubit_index} out of range for a "
            f"{state.qubit_count}-particle state (indices are 1-based)"
        )


def _project(split: np.ndarray, ket: np.ndarray) -> tuple[np.ndarray, float]:
    # split has shape (2^ax, 2, 2^(n-ax-1)); contract the measured axis with
    # the conjugated ket and return the residual tensor and its probability.
    rest = ket[0].conjugate() * split[:, 0, :] + ket[1].conjugate() * split[:, 1, :]
    return rest, float(np.vdot(rest, rest).real)


def _collapse(ket: np.ndarray, rest: np.ndarray, prob: float, qubit_count: int) -> StateVector:
    scaled = rest * (1.0 / math.sqrt(prob))
    collapsed = (ket.reshape(1, 2, 1) * scaled[:, None, :]).reshape(-1)
    return StateVector._renormalized(collapsed, qubit_count)


def measurement_branch(
    state: StateVector, qubit_index: int, axis: MeasurementAxis, outcome: int
) -> tuple[float, StateVector | None]:
    """Probability and renormalized collapse of one measurement branch.

    Returns ``(probability, collapsed)``; ``collapsed`` is None when the
    branch probability is below DEGENERATE_PROB. Useful for exhaustive
    branch enumeration, which sampling-based checks are verified against.
    """
    _check_qubit_index(state, qubit_index)
    if outcome not in (1, -1):
        raise ValueError(f"outcome must be +1 or -1, got {outcome}")
    plus, minus = _axis_kets(axis.theta_deg, axis.phi_deg)
    ket = plus if outcome == 1 else minus
    ax = qubit_index - 1
    split = state.amplitudes.reshape(1 << ax, 2, -1)
    rest, prob = _project(split, ket)
    if prob < DEGENERATE_PROB:
        return prob, None
    return prob, _collapse(ket, rest, prob, state.qubit_count)


def measure_qubit(
    state: StateVector,
    qubit_index: int,
    axis: MeasurementAxis,
    rng: np.random.Generator,
) -> tuple[int, StateVector]:
    """Born-rule projective measurement of one particle.

    Returns ``(outcome, collapsed)`` with outcome +1 at probability
    <P+> and the renormalized projection as the new state. Consumes
    exactly one uniform draw from ``rng`` per call, even when the
    outcome is algebraically forced.
    """
    _check_qubit_index(state, qubit_index)
    plus, minus = _axis_kets(axis.theta_deg, axis.phi_deg)
    ax = qubit_index - 1
    split = state.amplitudes.reshape(1 << ax, 2, -1)
    rest, p_plus = _project(split, plus)
    u = rng.random()
    if p_plus >= 1.0 - DEGENERATE_PROB:
        outcome = 1
    elif p_plus <= DEGENERATE_PROB:
        outcome = -1
    else:
        outcome = 1 if u < p_plus else -1
    if outcome == 1:
        ket, prob = plus, p_plus
    else:
        ket = minus
        rest, prob = _project(split, minus)
    if prob < DEGENERATE_PROB:
        raise InvariantError(
            "sampled a measurement branch with probability below 1e-14"
        )
    return outcome, _collapse(ket, rest, prob, state.qubit_count)


def expectation_product(
    state: StateVector, axis_a: MeasurementAxis, axis_b: MeasurementAxis
) -> float:
    """<psi| sigma(a) x sigma(b) |psi> for a two-particle state.

    The imaginary part must vanish (Hermitian observable); it is checked
    against 1e-12 and discarded.
    """
    if state.qubit_count != 2:
        raise ValueError("expectation_product requires a two-particle state")
    op = np.kron(spin_observable(axis_a), spin_observable(axis_b))
    value = complex(np.vdot(state.amplitudes, op @ state.amplitudes))
    if abs(value.imag) > 1e-12:
        raise InvariantError(
            f"product expectation has a non-real part: {value.imag!r}"
        )
    return value.real


def joint_outcome_distribution(
    state: StateVector, axis_a: MeasurementAxis, axis_b: MeasurementAxis
) -> dict[tuple[int, int], float]:
    """Probabilities of the four (m1, m2) outcome pairs when particle 1 is
    measured along ``axis_a`` and particle 2 along ``axis_b``."""
    if state.qubit_count != 2:
        raise ValueError("joint_outcome_distribution requires a two-particle state")
    kets_a = _axis_kets(axis_a.theta_deg, axis_a.phi_deg)
    kets_b = _axis_kets(axis_b.theta_deg, axis_b.phi_deg)
    tensor = state.amplitudes.reshape(2, 2)
    dist: dict[tuple[int, int], float] = {}
    for sa, ket_a in zip((1, -1), kets_a):
        row = ket_a.conj() @ tensor
        for sb, ket_b in zip((1, -1), kets_b):
            amp = row @ ket_b.conj()
            dist[(sa, sb)] = float(abs(amp) ** 2)
    return dist


class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix over 1-3 particles."""

    __slots__ = ("_mat", "qubit_count")

    def __init__(self, matrix) -> None:
        mat = np.array(matrix, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] not in (2, 4, 8):
            raise ValueError(f"density matrix must be 2^n x 2^n with n in 1..3, got shape {mat.shape}")
        if not np.isfinite(mat).all():
            raise ValueError("density matrix entries must be finite")
        if np.max(np.abs(mat - mat.conj().T)) > 1e-12:
            raise ValueError("density matrix must be Hermitian within 1e-12")
        trace = complex(np.trace(mat))
        if abs(trace - 1.0) > 1e-12:
            raise ValueError(f"density matrix trace must be 1 within 1e-12, got {trace!r}")
        eigenvalues = np.linalg.eigvalsh(mat)
        if float(eigenvalues.min()) < -1e-10:
            raise ValueError(
                f"density matrix must be positive semidefinite, smallest eigenvalue {eigenvalues.min()!r}"
            )
        mat.setflags(write=False)
        self._mat = mat
        self.qubit_count = mat.shape[0].bit_length() - 1

    @property
    def matrix(self) -> np.ndarray:
        return self._mat

    def max_abs_difference(self, other: "DensityMatrix") -> float:
        """Largest entrywise absolute difference to another density matrix."""
        if self._mat.shape != other._mat.shape:
            raise ValueError("density matrices have different dimensions")
        return float(np.max(np.abs(self._mat - other._mat)))

    def __repr__(self) -> str:
        return f"DensityMatrix(qubits={self.qubit_count})"


def mixture_density(components) -> DensityMatrix:
    """Statistical mixture sum_i w_i |psi_i><psi_i| of pure states.

    ``components`` is an iterable of (StateVector, weight); weights must be
    nonnegative and sum to 1 within 1e-12.
    """
    pairs = list(components)
    if not pairs:
        raise ValueError("mixture requires at least one component")
    weights = [float(w) for _, w in pairs]
    if any(w < 0.0 or not math.isfinite(w) for w in weights):
        raise ValueError("mixture weights must be finite and nonnegative")
    total = math.fsum(weights)
    if abs(total - 1.0) > 1e-12:
        raise ValueError(f"mixture weights must sum to 1 within 1e-12, got {total!r}")
    dim = pairs[0][0].amplitudes.size
    rho = np.zeros((dim, dim), dtype=np.complex128)
    for state, weight in zip((s for s, _ in pairs), weights):
        if state.amplitudes.size != dim:
            raise ValueError("all mixture components must have the same particle count")
        rho += weight * np.outer(state.amplitudes, state.amplitudes.conj())
    return DensityMatrix(rho)
