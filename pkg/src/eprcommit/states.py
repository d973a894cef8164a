"""The four entangled commitment states, their closed-form pair
correlations, and the three-particle state behind the delayed-choice
attack.

The closed forms here are derived independently of the Born-rule route in
:mod:`.quantum`; the test suite holds the two within 1e-10 of each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .quantum import (
    MeasurementAxis,
    StateVector,
    basis_expansion,
    cos_deg,
    sin_deg,
)

_SQRT_HALF = 1.0 / math.sqrt(2.0)


class CommitmentStateKind(Enum):
    """The four two-particle commitment states.

    The phi kinds (relative phase +-1 on the down-down term) encode bit 1;
    the psi kinds (relative phase +-i) encode bit 0.
    """

    PHI_PLUS = "phi_plus"
    PHI_MINUS = "phi_minus"
    PSI_PLUS = "psi_plus"
    PSI_MINUS = "psi_minus"

    @property
    def bit(self) -> int:
        """The committed bit this kind encodes."""
        return 1 if self in (CommitmentStateKind.PHI_PLUS, CommitmentStateKind.PHI_MINUS) else 0


def kinds_for_bit(bit: int) -> tuple[CommitmentStateKind, CommitmentStateKind]:
    """The two kinds an honest sender may use for a given bit."""
    if bit == 1:
        return (CommitmentStateKind.PHI_PLUS, CommitmentStateKind.PHI_MINUS)
    if bit == 0:
        return (CommitmentStateKind.PSI_PLUS, CommitmentStateKind.PSI_MINUS)
    raise ValueError(f"bit must be 0 or 1, got {bit!r}")


_PHASES = {
    CommitmentStateKind.PHI_PLUS: 1.0,
    CommitmentStateKind.PHI_MINUS: -1.0,
    CommitmentStateKind.PSI_PLUS: 1.0j,
    CommitmentStateKind.PSI_MINUS: -1.0j,
}

_STATE_CACHE: dict[CommitmentStateKind, StateVector] = {}


def commitment_state(kind: CommitmentStateKind) -> StateVector:
    """The exact two-particle state (uu + phase * dd) / sqrt(2) for a kind."""
    state = _STATE_CACHE.get(kind)
    if state is None:
        amps = np.zeros(4, dtype=np.complex128)
        amps[0] = _SQRT_HALF
        amps[3] = _PHASES[kind] * _SQRT_HALF
        state = StateVector(amps)
        _STATE_CACHE[kind] = state
    return state


@dataclass(frozen=True)
class CorrelationResult:
    """Closed-form pair correlation and the induced product-outcome
    probabilities p(m1*m2 = +1) = (1 + value) / 2."""

    value: float
    p_plus: float
    p_minus: float


def closed_form_correlation(
    kind: CommitmentStateKind, axis_a: MeasurementAxis, axis_b: MeasurementAxis
) -> CorrelationResult:
    """Expected product of the two outcomes, from the closed form.

    All four kinds share the cos(theta1)cos(theta2) term; the transverse
    term is +-cos(phi1 + phi2) for the phi kinds and +-sin(phi1 + phi2)
    for the psi kinds.
    """
    polar = cos_deg(axis_a.theta_deg) * cos_deg(axis_b.theta_deg)
    transverse = sin_deg(axis_a.theta_deg) * sin_deg(axis_b.theta_deg)
    phi_sum = axis_a.phi_deg + axis_b.phi_deg
    if kind is CommitmentStateKind.PHI_PLUS:
        value = polar + transverse * cos_deg(phi_sum)
    elif kind is CommitmentStateKind.PHI_MINUS:
        value = polar - transverse * cos_deg(phi_sum)
    elif kind is CommitmentStateKind.PSI_PLUS:
        value = polar + transverse * sin_deg(phi_sum)
    else:
        value = polar - transverse * sin_deg(phi_sum)
    return CorrelationResult(value=value, p_plus=(1.0 + value) / 2.0, p_minus=(1.0 - value) / 2.0)


_GHZ_CACHE: StateVector | None = None


def ghz_state() -> StateVector:
    """The three-particle state (uuu + ddd) / sqrt(2).

    A cheating sender keeps the third particle and sends the first two in
    place of a committed pair; measuring the third along x (y) steers the
    pair into a phi (psi) kind, which is what the delayed-choice attack
    exploits.
    """
    global _GHZ_CACHE
    if _GHZ_CACHE is None:
        amps = np.zeros(8, dtype=np.complex128)
        amps[0] = _SQRT_HALF
        amps[7] = _SQRT_HALF
        _GHZ_CACHE = StateVector(amps)
    return _GHZ_CACHE


def _phase_free_residual(target: np.ndarray, rebuilt: np.ndarray) -> float:
    # min over a global phase alpha of || target - e^(i alpha) rebuilt ||
    gap = (
        float(np.sum(np.abs(target) ** 2))
        + float(np.sum(np.abs(rebuilt) ** 2))
        - 2.0 * abs(np.vdot(target, rebuilt))
    )
    return math.sqrt(max(0.0, gap))


def ghz_decomposition_residual() -> tuple[float, float]:
    """Reconstruction error of the three-particle state from its two
    delayed-choice decompositions.

    Rebuilds (uuu + ddd)/sqrt(2) as
      (1/sqrt(2)) (|phi+>|x+> - |phi->|x->)        (x residual) and
      ((1+i)/2)   (|psi->|y+> - |psi+>|y->)        (y residual),
    with the x / y kets taken from :func:`basis_expansion` at (90, 0) and
    (90, 90), and returns the norm of each difference minimized over one
    global phase. Both must come out below 1e-10.
    """
    target = ghz_state().amplitudes
    x_plus, x_minus = basis_expansion(MeasurementAxis(90.0, 0.0))
    y_plus, y_minus = basis_expansion(MeasurementAxis(90.0, 90.0))
    phi_p = commitment_state(CommitmentStateKind.PHI_PLUS).amplitudes
    phi_m = commitment_state(CommitmentStateKind.PHI_MINUS).amplitudes
    psi_p = commitment_state(CommitmentStateKind.PSI_PLUS).amplitudes
    psi_m = commitment_state(CommitmentStateKind.PSI_MINUS).amplitudes

    rebuilt_x = _SQRT_HALF * (
        np.kron(phi_p, x_plus.amplitudes) - np.kron(phi_m, x_minus.amplitudes)
    )
    rebuilt_y = (0.5 + 0.5j) * (
        np.kron(psi_m, y_plus.amplitudes) - np.kron(psi_p, y_minus.amplitudes)
    )
    return _phase_free_residual(target, rebuilt_x), _phase_free_residual(target, rebuilt_y)
