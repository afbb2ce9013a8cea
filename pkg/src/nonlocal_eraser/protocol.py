"""Erasure-based nonlocal parity measurement on the two-photon register.

Pipeline: Alice couples her polarization to her path and keeps the ``d``
path; Bob copies his polarization and then his path into the ancilla; the
path of photon b is erased by a Hadamard and post-selection on ``d``. The
ancilla then holds the parity of the two polarizations (1 even, 0 odd) while
the polarization state is projected coherently onto the matching subspace.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    POLARIZATION_BASIS,
    DensityMatrix,
    Register,
    StateVector,
    SystemAmplitudes,
    build_initial_state,
    apply,
    basis_index,
    partial_trace_to_polarization,
    project,
)
from .errors import EraserError, ZeroProbabilityBranch
from .gates import X, cnot, hadamard

# Display letter of each ancilla value; l carries even parity.
CHANNEL_OF_AUX = {1: "l", 0: "r"}
AUX_OF_CHANNEL = {v: k for k, v in CHANNEL_OF_AUX.items()}
CHANNELS = ("l", "r")

EVEN_PROJECTOR = np.diag([1, 0, 0, 1]).astype(complex)
ODD_PROJECTOR = np.diag([0, 1, 1, 0]).astype(complex)
XX = np.kron(X, X)


class BellLabel(enum.Enum):
    PsiPlus = ("even", +1)
    PsiMinus = ("even", -1)
    PhiPlus = ("odd", +1)
    PhiMinus = ("odd", -1)

    @property
    def parity(self) -> str:
        return self.value[0]

    @property
    def x_product(self) -> int:
        return self.value[1]

    @property
    def amplitudes(self) -> SystemAmplitudes:
        s = 1 / np.sqrt(2)
        return {
            BellLabel.PsiPlus: SystemAmplitudes(s, 0, 0, s),
            BellLabel.PsiMinus: SystemAmplitudes(s, 0, 0, -s),
            BellLabel.PhiPlus: SystemAmplitudes(0, s, s, 0),
            BellLabel.PhiMinus: SystemAmplitudes(0, s, -s, 0),
        }[self]

    @classmethod
    def from_outcomes(cls, parity: str, x_product: int) -> "BellLabel":
        return cls((parity, x_product))


class ProtocolInternalError(EraserError):
    """A post-selection that valid inputs always pass came out empty."""


@dataclass(frozen=True)
class Branch:
    probability: float
    rho: Optional[DensityMatrix]

    def to_json(self) -> dict:
        return {"p": self.probability, "rho": None if self.rho is None else self.rho.to_json()}


@dataclass(frozen=True)
class ProtocolOutcome:
    success_probability: float
    branch_even: Branch
    branch_odd: Branch
    final_state: StateVector

    def branch(self, parity: str) -> Branch:
        return {"even": self.branch_even, "odd": self.branch_odd}[parity]

    def to_json(self) -> dict:
        return {
            "p_success": self.success_probability,
            "even": self.branch_even.to_json(),
            "odd": self.branch_odd.to_json(),
        }


def _postselect(state, reg, value):
    try:
        return project(state, reg, value)
    except ZeroProbabilityBranch as exc:
        raise ProtocolInternalError(str(exc)) from exc


def alice_stage(state: StateVector) -> tuple[StateVector, float]:
    """C-NOT from Alice's polarization (V) onto her path, keep path d."""
    coupled = apply(state, cnot(Register.APol, "V", Register.APath))
    return _postselect(coupled, Register.APath, "d")


def bob_coupling(state: StateVector) -> StateVector:
    """Copy Bob's polarization (V) then his path (u) into the ancilla."""
    state = apply(state, cnot(Register.BPol, "V", Register.BAux))
    return apply(state, cnot(Register.BPath, "u", Register.BAux))


def erase(state: StateVector) -> tuple[StateVector, float]:
    """Hadamard on Bob's path followed by post-selection on d."""
    return _postselect(apply(state, hadamard(Register.BPath)), Register.BPath, "d")


def _branch(state: StateVector, aux: int) -> Branch:
    try:
        conditioned, p = project(state, Register.BAux, aux)
    except ZeroProbabilityBranch:
        return Branch(0.0, None)
    return Branch(p, partial_trace_to_polarization(conditioned))


def branches_of(state: StateVector) -> tuple[Branch, Branch]:
    """(even, odd) branches of a state, split on the ancilla."""
    return _branch(state, 1), _branch(state, 0)


def run_protocol(sys: SystemAmplitudes) -> ProtocolOutcome:
    """Full 32-amplitude propagation from preparation to erased final state."""
    state = build_initial_state(sys)
    state, p_a = alice_stage(state)
    state, p_b = erase(bob_coupling(state))
    even, odd = branches_of(state)
    return ProtocolOutcome(p_a * p_b, even, odd, state)


def parity_readout(outcome: ProtocolOutcome) -> dict[str, float]:
    return {"even": outcome.branch_even.probability, "odd": outcome.branch_odd.probability}


PARITY_EIGENVALUE = {"even": +1, "odd": -1}


def x_product_probabilities(rho: DensityMatrix) -> dict[int, float]:
    """Distribution of the product of the two local sigma_x outcomes."""
    mean = rho.expectation(XX)
    return {+1: (1 + mean) / 2, -1: (1 - mean) / 2}


def bell_distribution(outcome: ProtocolOutcome) -> dict[BellLabel, float]:
    probs = {}
    for parity in ("even", "odd"):
        br = outcome.branch(parity)
        for sign in (+1, -1):
            label = BellLabel.from_outcomes(parity, sign)
            if br.rho is None:
                probs[label] = 0.0
            else:
                probs[label] = br.probability * x_product_probabilities(br.rho)[sign]
    return probs


def bell_measure(sys: SystemAmplitudes) -> dict[BellLabel, float]:
    """Parity from the ancilla, then sigma_x (x) sigma_x within the branch."""
    return bell_distribution(run_protocol(sys))


def snapshot_of(state: StateVector) -> dict[tuple[str, str, str], float]:
    """Joint distribution over (channel, Bob's path, polarization basis)."""
    probs = np.abs(state.tensor()) ** 2 / state.norm_squared
    # sum out Alice's path; axes left: APol, BPol, BPath, BAux
    probs = probs.sum(axis=1)
    out = {}
    for aux, channel in CHANNEL_OF_AUX.items():
        for path in ("u", "d"):
            bit = Register.BPath.encode(path)
            for i, basis in enumerate(POLARIZATION_BASIS):
                a, b = divmod(i, 2)
                out[(channel, path, basis)] = float(probs[a, b, bit, aux])
    return out


def pre_erasure_snapshot(sys: SystemAmplitudes) -> dict[tuple[str, str, str], float]:
    """Which-path distribution after Bob's couplings, before the eraser."""
    state, _ = alice_stage(build_initial_state(sys))
    return snapshot_of(bob_coupling(state))


def expected_final_state(sys: SystemAmplitudes) -> StateVector:
    """Closed form of the erased state: ancilla tags parity, both paths at d."""
    amps = np.zeros(32, dtype=complex)
    for (pa, pb), coeff in zip(
            [("H", "H"), ("H", "V"), ("V", "H"), ("V", "V")], sys.as_array()):
        aux = 1 if pa == pb else 0
        amps[basis_index(pa, "d", pb, "d", aux)] = coeff
    return StateVector(amps)


def subspace_state(sys: SystemAmplitudes, parity: str) -> Optional[np.ndarray]:
    """Normalized P_parity |psi_s>, or None when the projection vanishes."""
    proj = EVEN_PROJECTOR if parity == "even" else ODD_PROJECTOR
    v = proj @ sys.as_array()
    n = np.linalg.norm(v)
    return None if n < 1e-12 else v / n
