"""Dense state-vector and density-matrix kernel over the five photonic registers.

The register layout is fixed: polarization and path of photon a, then
polarization, path and left/right ancilla of photon b. The flat amplitude
index is ``sum(bit * 2**(4 - position))``, i.e. ``APol`` is the most
significant bit and ``BAux`` the least significant one.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING, Iterable

import numpy as np

from .errors import (
    FootprintMismatch,
    InvalidDensityMatrix,
    NotNormalized,
    ZeroProbabilityBranch,
)

if TYPE_CHECKING:
    from .gates import GateOp

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-8
ZERO_BRANCH_TOL = 1e-14

N_REGISTERS = 5
DIM = 2**N_REGISTERS

POLARIZATION_BASIS = ("HH", "HV", "VH", "VV")


class Register(enum.IntEnum):
    """The five binary registers, valued by their axis in the state tensor."""

    APol = 0
    APath = 1
    BPol = 2
    BPath = 3
    BAux = 4

    @property
    def labels(self) -> tuple[str, str]:
        """Symbolic names of the 0 and 1 basis states."""
        return _LABELS[self]

    def encode(self, value: int | str) -> int:
        """Map a basis label (``"H"``, ``"u"``, ``1`` ...) to its bit value."""
        if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
            if value in (0, 1):
                return int(value)
        elif isinstance(value, str):
            if value in ("0", "1"):
                return int(value)
            if value in self.labels:
                return self.labels.index(value)
        raise ValueError(f"{value!r} is not a basis value of register {self.name}")

    @classmethod
    def parse(cls, name: "str | Register") -> "Register":
        if isinstance(name, Register):
            return name
        try:
            return cls[name]
        except KeyError:
            raise FootprintMismatch(f"unknown register {name!r}") from None


_LABELS = {
    Register.APol: ("H", "V"),
    Register.APath: ("d", "u"),
    Register.BPol: ("H", "V"),
    Register.BPath: ("d", "u"),
    Register.BAux: ("0", "1"),
}

REGISTERS = tuple(Register)


def basis_index(apol: int | str, apath: int | str, bpol: int | str,
                bpath: int | str, baux: int | str) -> int:
    """Flat amplitude index of a computational basis state given by labels."""
    bits = [reg.encode(v) for reg, v in zip(REGISTERS, (apol, apath, bpol, bpath, baux))]
    return int(sum(b << (N_REGISTERS - 1 - i) for i, b in enumerate(bits)))


@dataclass(frozen=True)
class SystemAmplitudes:
    """Coefficients of |HH>, |HV>, |VH>, |VV> for the two polarization qubits."""

    alpha: complex
    beta: complex
    gamma: complex
    eta: complex

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "eta"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        norm = float(np.sum(np.abs(self.as_array()) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise NotNormalized(f"system amplitudes have squared norm {norm!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma, self.eta], dtype=complex)

    @classmethod
    def from_array(cls, values: Iterable[complex], normalize: bool = False) -> "SystemAmplitudes":
        arr = np.asarray(list(values), dtype=complex)
        if arr.shape != (4,):
            raise ValueError("expected exactly four amplitudes")
        if normalize:
            n = np.linalg.norm(arr)
            if n == 0:
                raise NotNormalized("cannot normalize the zero vector")
            arr = arr / n
        return cls(*arr)

    @classmethod
    def random(cls, rng: np.random.Generator) -> "SystemAmplitudes":
        """Haar-random two-qubit pure state."""
        z = rng.normal(size=4) + 1j * rng.normal(size=4)
        return cls.from_array(z, normalize=True)

    def density(self) -> "DensityMatrix":
        return DensityMatrix.pure(self.as_array())


@dataclass(frozen=True, eq=False)
class StateVector:
    """Immutable 32-amplitude state of the composite register."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (DIM,):
            raise ValueError(f"a state needs {DIM} amplitudes, got {amps.size}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @cached_property
    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    @property
    def is_normalized(self) -> bool:
        return abs(self.norm_squared - 1.0) <= NORM_TOL

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per register."""
        return self.amplitudes.reshape((2,) * N_REGISTERS)

    @classmethod
    def basis(cls, apol, apath, bpol, bpath, baux) -> "StateVector":
        amps = np.zeros(DIM, dtype=complex)
        amps[basis_index(apol, apath, bpol, bpath, baux)] = 1.0
        return cls(amps)

    @classmethod
    def random(cls, rng: np.random.Generator) -> "StateVector":
        z = rng.normal(size=DIM) + 1j * rng.normal(size=DIM)
        return cls(z / np.linalg.norm(z))

    def normalized(self) -> "StateVector":
        if self.norm_squared == 0:
            raise NotNormalized("cannot normalize the zero vector")
        return StateVector(self.amplitudes / np.sqrt(self.norm_squared))

    def __add__(self, other: "StateVector") -> "StateVector":
        return StateVector(self.amplitudes + other.amplitudes)

    def __rmul__(self, scalar: complex) -> "StateVector":
        return StateVector(scalar * self.amplitudes)

    def overlap(self, other: "StateVector") -> complex:
        """Inner product <self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def equals_up_to_phase(self, other: "StateVector", tol: float = 1e-10) -> bool:
        return abs(abs(self.overlap(other)) - 1.0) <= tol

    def marginal(self, reg: Register) -> float:
        """Probability that ``reg`` reads 1."""
        probs = np.abs(self.tensor()) ** 2
        return float(np.take(probs, 1, axis=int(reg)).sum() / probs.sum())

    def nonzero(self, tol: float = 1e-12) -> dict[tuple[str, ...], complex]:
        """Nonzero amplitudes keyed by register labels, for inspection."""
        out = {}
        for idx in np.flatnonzero(np.abs(self.amplitudes) > tol):
            bits = [(idx >> (N_REGISTERS - 1 - i)) & 1 for i in range(N_REGISTERS)]
            key = tuple(reg.labels[b] for reg, b in zip(REGISTERS, bits))
            out[key] = complex(self.amplitudes[idx])
        return out

    def to_json(self) -> dict:
        return {
            "registers": [r.name for r in REGISTERS],
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, doc: dict | str) -> "StateVector":
        if isinstance(doc, str):
            doc = json.loads(doc)
        if list(doc["registers"]) != [r.name for r in REGISTERS]:
            raise FootprintMismatch(f"unexpected register list {doc['registers']!r}")
        return cls(np.array([complex(re, im) for re, im in doc["amplitudes"]]))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated 4x4 density matrix over the |HH>, |HV>, |VH>, |VV> basis."""

    entries: np.ndarray
    check_trace: bool = field(default=True, repr=False)

    def __post_init__(self):
        rho = np.array(self.entries, dtype=complex)
        if rho.shape != (4, 4):
            raise InvalidDensityMatrix(f"expected a 4x4 matrix, got shape {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
            raise InvalidDensityMatrix("matrix is not Hermitian")
        if self.check_trace and abs(np.trace(rho) - 1.0) > TRACE_TOL:
            raise InvalidDensityMatrix(f"trace is {np.trace(rho).real:.3g}, not 1")
        if np.linalg.eigvalsh(rho).min() < -PSD_TOL:
            raise InvalidDensityMatrix("matrix has a negative eigenvalue")
        rho.setflags(write=False)
        object.__setattr__(self, "entries", rho)

    @classmethod
    def pure(cls, vec) -> "DensityMatrix":
        v = np.asarray(vec, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls) -> "DensityMatrix":
        return cls(np.eye(4) / 4)

    @classmethod
    def random(cls, rng: np.random.Generator, rank: int = 4) -> "DensityMatrix":
        """Random state drawn from the induced (Ginibre) measure of given rank."""
        g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
        rho = g @ g.conj().T
        return cls(rho / np.trace(rho).real)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    @property
    def purity(self) -> float:
        return float(np.trace(self.entries @ self.entries).real)

    def expectation(self, operator: np.ndarray) -> float:
        return float(np.trace(self.entries @ operator).real)

    def diagonal(self) -> dict[str, float]:
        return dict(zip(POLARIZATION_BASIS, np.real(np.diag(self.entries)).tolist()))

    def to_json(self) -> list:
        return [[[float(z.real), float(z.imag)] for z in row] for row in self.entries]

    @classmethod
    def from_json(cls, rows) -> "DensityMatrix":
        return cls(np.array([[complex(re, im) for re, im in row] for row in rows]))


def build_initial_state(sys: SystemAmplitudes) -> StateVector:
    """System (x) EPR meter (|ud> + |du>)/sqrt(2) (x) ancilla |0>."""
    if not isinstance(sys, SystemAmplitudes):
        sys = SystemAmplitudes.from_array(sys)
    system = sys.as_array().reshape(2, 2)  # [APol, BPol]
    meter = np.zeros((2, 2), dtype=complex)  # [APath, BPath]
    meter[1, 0] = meter[0, 1] = 1 / np.sqrt(2)
    aux = np.array([1.0, 0.0])
    psi = np.einsum("ac,bd,e->abcde", system, meter, aux)
    return StateVector(psi.reshape(-1))


def apply(state: StateVector, op: "GateOp") -> StateVector:
    """Apply a gate to the registers named in its footprint."""
    axes = [int(Register.parse(r)) for r in op.footprint]
    k = len(axes)
    if op.matrix.shape != (2**k, 2**k):
        raise FootprintMismatch(f"{op.label}: matrix shape does not match footprint")
    gate = op.matrix.reshape((2,) * (2 * k))
    psi = np.tensordot(gate, state.tensor(), axes=(list(range(k, 2 * k)), axes))
    # tensordot puts the gate's output axes first; move them back into place
    psi = np.moveaxis(psi, list(range(k)), axes)
    return StateVector(psi.reshape(-1))


def project(state: StateVector, reg: Register | str, value: int | str) -> tuple[StateVector, float]:
    """Post-select ``reg`` on ``value``; returns the renormalized state and its probability."""
    reg = Register.parse(reg)
    bit = reg.encode(value)
    psi = state.tensor().copy()
    drop = [slice(None)] * N_REGISTERS
    drop[int(reg)] = 1 - bit
    psi[tuple(drop)] = 0
    prob = float(np.sum(np.abs(psi) ** 2) / state.norm_squared)
    if prob < ZERO_BRANCH_TOL:
        raise ZeroProbabilityBranch(
            f"projection of {reg.name} onto {reg.labels[bit]} has probability {prob:.3g}")
    projected = StateVector(psi.reshape(-1))
    return projected.normalized(), prob


def partial_trace_to_polarization(state: StateVector) -> DensityMatrix:
    """Reduced density matrix of (APol, BPol), tracing out both paths and the ancilla."""
    if not state.is_normalized:
        raise NotNormalized(f"state has squared norm {state.norm_squared!r}")
    psi = state.tensor()
    rho = np.einsum("abcde,fbgde->acfg", psi, psi.conj()).reshape(4, 4)
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(rho)


to_density = partial_trace_to_polarization
