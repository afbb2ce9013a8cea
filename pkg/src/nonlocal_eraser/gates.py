"""Unitaries used by the protocol: C-NOT couplings, Hadamard, wave plates, Paulis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Register
from .errors import DuplicateRegister, FootprintMismatch

UNITARY_TOL = 1e-12

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

PAULI = {"X": X, "Y": Y, "Z": Z}


def projector(value: int) -> np.ndarray:
    """|value><value| on one qubit."""
    p = np.zeros((2, 2), dtype=complex)
    p[value, value] = 1
    return p


@dataclass(frozen=True, eq=False)
class GateOp:
    """A unitary acting on one or two named registers.

    For two registers the matrix is written in the basis ``|r0 r1>`` with the
    first footprint entry as the most significant bit.
    """

    footprint: tuple[Register, ...]
    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        regs = tuple(Register.parse(r) for r in self.footprint)
        if len(set(regs)) != len(regs):
            raise DuplicateRegister(f"{self.label}: footprint repeats a register")
        if not 1 <= len(regs) <= 2:
            raise FootprintMismatch(f"{self.label}: footprint must name 1 or 2 registers")
        m = np.array(self.matrix, dtype=complex)
        d = 2 ** len(regs)
        if m.shape != (d, d):
            raise FootprintMismatch(f"{self.label}: expected a {d}x{d} matrix")
        if np.max(np.abs(m @ m.conj().T - np.eye(d))) > UNITARY_TOL:
            raise ValueError(f"{self.label}: matrix is not unitary")
        m.setflags(write=False)
        object.__setattr__(self, "footprint", regs)
        object.__setattr__(self, "matrix", m)


def cnot(control: Register | str, control_value: int | str, target: Register | str) -> GateOp:
    """Flip ``target`` when ``control`` holds ``control_value``.

    ``control_value`` may be a label such as ``"V"`` or ``"u"``; with value 0
    this is an anti-controlled NOT.
    """
    control, target = Register.parse(control), Register.parse(target)
    if control == target:
        raise DuplicateRegister(f"C-NOT control and target are both {control.name}")
    v = control.encode(control_value)
    p = projector(v)
    m = np.kron(p, X) + np.kron(I2 - p, I2)
    label = f"cnot({control.name}={control.labels[v]} -> {target.name})"
    return GateOp((control, target), m, label)


def hadamard(reg: Register | str) -> GateOp:
    reg = Register.parse(reg)
    return GateOp((reg,), H, f"h({reg.name})")


def hwp_matrix(angle_deg: float) -> np.ndarray:
    t = np.radians(angle_deg)
    c, s = np.cos(2 * t), np.sin(2 * t)
    return np.array([[c, s], [s, -c]], dtype=complex)


def qwp_matrix(angle_deg: float) -> np.ndarray:
    t = np.radians(angle_deg)
    rot = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
    return rot @ np.diag([1, 1j]) @ rot.T


def waveplate(kind: str, angle_deg: float, reg: Register | str = Register.APol) -> GateOp:
    """Jones unitary of a half (``HWP``) or quarter (``QWP``) wave plate.

    The fast axis sits at ``angle_deg`` from horizontal. Global phases are
    dropped, so HWP(45) is exactly Pauli-X and HWP(22.5) exactly Hadamard.
    """
    reg = Register.parse(reg)
    if reg not in (Register.APol, Register.BPol):
        raise FootprintMismatch(f"wave plates act on polarization, not {reg.name}")
    kind = kind.upper()
    if kind == "HWP":
        m = hwp_matrix(angle_deg)
    elif kind == "QWP":
        m = qwp_matrix(angle_deg)
    else:
        raise ValueError(f"unknown wave plate kind {kind!r}")
    return GateOp((reg,), m, f"{kind}({angle_deg:g}) on {reg.name}")


def pauli(reg: Register | str, axis: str) -> GateOp:
    reg = Register.parse(reg)
    axis = axis.upper()
    if axis not in PAULI:
        raise ValueError(f"unknown Pauli axis {axis!r}")
    return GateOp((reg,), PAULI[axis], f"{axis}({reg.name})")


def identity(reg: Register | str = Register.APol) -> GateOp:
    reg = Register.parse(reg)
    return GateOp((reg,), I2, f"I({reg.name})")
