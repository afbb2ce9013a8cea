"""Line-oriented ``.qec`` circuit files: parser, formatter and executor.

Grammar, one instruction per line, ``#`` starts a comment::

    prepare <c> <c> <c> <c>            amplitudes of HH HV VH VV
    cnot <register> <value> <register> control, control value, target
    h <register>
    waveplate <HWP|QWP> <degrees> <APol|BPol>
    project <register> <value>
    readout <parity|bell|snapshot|state>

Registers are ``APol APath BPol BPath BAux``. Values are ``H``/``V`` for
polarization, ``d``/``u`` for paths, ``0``/``1`` for anything. Complex
literals look like ``0.5``, ``-0.5i`` or ``0.5-0.5i``. The program must open
with its only ``prepare``; a ``readout``, if present, must close it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Union

import numpy as np

from .core import (
    REGISTERS,
    Register,
    StateVector,
    SystemAmplitudes,
    apply,
    build_initial_state,
    project,
)
from .errors import EraserError, ZeroProbabilityBranch
from .gates import cnot, hadamard, waveplate
from .protocol import ProtocolOutcome, bell_distribution, branches_of, parity_readout, snapshot_of

PREPARE_TOL = 1e-6
READOUT_KINDS = ("parity", "bell", "snapshot", "state")


class CircuitError(EraserError):
    """Diagnostic tied to a source position (1-based line and column)."""

    def __init__(self, message: str, line: int, column: int, token: str = ""):
        self.message = message
        self.line = line
        self.column = column
        self.token = token
        where = f"line {line}, column {column}"
        super().__init__(f"{where}: {message}" + (f" (at {token!r})" if token else ""))


class CircuitSyntaxError(CircuitError):
    pass


class CircuitSemanticError(CircuitError):
    pass


class FormatError(EraserError, ValueError):
    pass


class CircuitZeroProbability(ZeroProbabilityBranch, CircuitError):
    pass


Span = tuple[int, int]


@dataclass(frozen=True)
class Prepare:
    amplitudes: tuple[complex, complex, complex, complex]
    span: Span = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class CNot:
    control: Register
    value: int
    target: Register
    span: Span = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Hadamard:
    register: Register
    span: Span = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Waveplate:
    kind: str
    angle: float
    register: Register
    span: Span = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Project:
    register: Register
    value: int
    span: Span = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Readout:
    kind: str
    span: Span = field(default=(0, 0), compare=False)


Instruction = Union[Prepare, CNot, Hadamard, Waveplate, Project, Readout]


@dataclass(frozen=True)
class CircuitProgram:
    instructions: tuple[Instruction, ...]

    def __len__(self):
        return len(self.instructions)

    def __iter__(self):
        return iter(self.instructions)

    @property
    def readout(self) -> Readout | None:
        last = self.instructions[-1] if self.instructions else None
        return last if isinstance(last, Readout) else None

    def with_prepare(self, amplitudes) -> "CircuitProgram":
        """Copy of the program with the prepared amplitudes replaced."""
        first = self.instructions[0]
        new = Prepare(tuple(complex(a) for a in amplitudes), first.span)
        return CircuitProgram((new,) + self.instructions[1:])


# --------------------------------------------------------------------------
# parsing

_REAL = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX = re.compile(
    rf"^(?:(?P<re>[+-]?{_REAL})(?:(?P<sign>[+-])(?P<im>{_REAL})i)?|(?P<only_im>[+-]?{_REAL})i)$")
_NUMBER = re.compile(rf"^[+-]?{_REAL}$")


def parse_complex(token: str) -> complex:
    m = _COMPLEX.match(token)
    if m is None:
        raise ValueError(f"malformed complex literal {token!r}")
    if m.group("only_im") is not None:
        return complex(0.0, float(m.group("only_im")))
    re_part = float(m.group("re"))
    if m.group("im") is None:
        return complex(re_part, 0.0)
    im = float(m.group("im"))
    return complex(re_part, im if m.group("sign") == "+" else -im)


def _tokens(line: str) -> list[tuple[str, int]]:
    return [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", line)]


_ARITY = {"prepare": 4, "cnot": 3, "h": 1, "waveplate": 3, "project": 2, "readout": 1}


def _register(tok: str, col: int, lineno: int) -> Register:
    try:
        return Register[tok]
    except KeyError:
        raise CircuitSemanticError("unknown register", lineno, col, tok) from None


def _value(reg: Register, tok: str, col: int, lineno: int) -> int:
    try:
        return reg.encode(tok)
    except ValueError:
        raise CircuitSemanticError(f"invalid value for {reg.name}", lineno, col, tok) from None


def _parse_line(keyword: str, args: list[tuple[str, int]], lineno: int, col0: int) -> Instruction:
    span = (lineno, col0)
    if keyword == "prepare":
        amps = []
        for tok, col in args:
            try:
                amps.append(parse_complex(tok))
            except ValueError:
                raise CircuitSyntaxError("malformed complex literal", lineno, col, tok) from None
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > PREPARE_TOL:
            raise CircuitSemanticError(f"amplitudes have squared norm {norm:.6g}, not 1",
                                       lineno, args[0][1], args[0][0])
        return Prepare(tuple(amps), span)
    if keyword == "cnot":
        (c, cc), (v, vc), (t, tc) = args
        control = _register(c, cc, lineno)
        value = _value(control, v, vc, lineno)
        target = _register(t, tc, lineno)
        if control == target:
            raise CircuitSemanticError("control and target are the same register", lineno, tc, t)
        return CNot(control, value, target, span)
    if keyword == "h":
        return Hadamard(_register(*args[0], lineno), span)
    if keyword == "waveplate":
        (kind, kc), (ang, ac), (r, rc) = args
        if kind.upper() not in ("HWP", "QWP"):
            raise CircuitSyntaxError("wave plate kind must be HWP or QWP", lineno, kc, kind)
        if not _NUMBER.match(ang):
            raise CircuitSyntaxError("malformed angle", lineno, ac, ang)
        reg = _register(r, rc, lineno)
        if reg not in (Register.APol, Register.BPol):
            raise CircuitSemanticError("wave plates act on polarization registers", lineno, rc, r)
        return Waveplate(kind.upper(), float(ang), reg, span)
    if keyword == "project":
        (r, rc), (v, vc) = args
        reg = _register(r, rc, lineno)
        return Project(reg, _value(reg, v, vc, lineno), span)
    if keyword == "readout":
        kind, kc = args[0]
        if kind not in READOUT_KINDS:
            raise CircuitSyntaxError("unknown readout kind", lineno, kc, kind)
        return Readout(kind, span)
    raise AssertionError(keyword)


def parse(text: str) -> CircuitProgram:
    """Parse and validate ``.qec`` source, raising a positioned diagnostic on error."""
    instructions: list[Instruction] = []
    last_line = 1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        toks = _tokens(line)
        if not toks:
            continue
        last_line = lineno
        (keyword, col0), args = toks[0], toks[1:]
        if keyword not in _ARITY:
            raise CircuitSyntaxError("unknown keyword", lineno, col0, keyword)
        if len(args) != _ARITY[keyword]:
            bad_tok, bad_col = (args[_ARITY[keyword]] if len(args) > _ARITY[keyword]
                                else toks[-1])
            raise CircuitSyntaxError(
                f"{keyword} takes {_ARITY[keyword]} operand(s), got {len(args)}",
                lineno, bad_col, bad_tok)
        instr = _parse_line(keyword, args, lineno, col0)
        if instructions and isinstance(instructions[-1], Readout):
            raise CircuitSemanticError("instruction after readout", lineno, col0, keyword)
        if isinstance(instr, Prepare) and instructions:
            raise CircuitSemanticError("prepare must appear once, as the first instruction",
                                       lineno, col0, keyword)
        if not instructions and not isinstance(instr, Prepare):
            raise CircuitSemanticError("program must start with prepare", lineno, col0, keyword)
        instructions.append(instr)
    if not instructions:
        raise CircuitSemanticError("program has no prepare instruction", last_line, 1)
    return CircuitProgram(tuple(instructions))


def load(path: str | Path) -> CircuitProgram:
    return parse(Path(path).read_text(encoding="utf-8"))


def shipped_circuits() -> list[str]:
    return sorted(p.name for p in resources.files("nonlocal_eraser.circuits").iterdir()
                  if p.name.endswith(".qec"))


def shipped_source(name: str) -> str:
    return resources.files("nonlocal_eraser.circuits").joinpath(name).read_text(encoding="utf-8")


# --------------------------------------------------------------------------
# formatting

def format_complex(z: complex) -> str:
    re_part, im = float(z.real), float(z.imag)
    if im == 0.0:
        return repr(re_part)
    if re_part == 0.0:
        return f"{im!r}i"
    sign = "-" if np.signbit(im) else "+"
    return f"{re_part!r}{sign}{abs(im)!r}i"


def _format_value(reg: Register, value: int) -> str:
    return reg.labels[value]


def format_instruction(instr: Instruction) -> str:
    if isinstance(instr, Prepare):
        return "prepare " + " ".join(format_complex(a) for a in instr.amplitudes)
    if isinstance(instr, CNot):
        return (f"cnot {instr.control.name} {_format_value(instr.control, instr.value)} "
                f"{instr.target.name}")
    if isinstance(instr, Hadamard):
        return f"h {instr.register.name}"
    if isinstance(instr, Waveplate):
        return f"waveplate {instr.kind} {instr.angle!r} {instr.register.name}"
    if isinstance(instr, Project):
        return f"project {instr.register.name} {_format_value(instr.register, instr.value)}"
    if isinstance(instr, Readout):
        return f"readout {instr.kind}"
    raise TypeError(f"not an instruction: {instr!r}")


def format(program: CircuitProgram) -> str:  # noqa: A001 - mirrors parse()
    """Canonical text of a program; comments and spacing are not preserved."""
    instrs = list(program)
    if not instrs or not isinstance(instrs[0], Prepare):
        raise FormatError("a program must start with prepare")
    if any(isinstance(i, Prepare) for i in instrs[1:]):
        raise FormatError("a program has exactly one prepare")
    if any(isinstance(i, Readout) for i in instrs[:-1]):
        raise FormatError("readout must be the last instruction")
    return "\n".join(format_instruction(i) for i in instrs) + "\n"


# --------------------------------------------------------------------------
# execution

@dataclass
class TraceStep:
    instruction: Instruction
    norm: float
    marginals: dict[str, float]
    cumulative_probability: float


@dataclass
class ExecutionTrace:
    steps: list[TraceStep]
    final_state: StateVector
    cumulative_probability: float
    readout: Any = None

    def to_json(self) -> dict:
        return {
            "steps": [
                {"line": s.instruction.span[0],
                 "instruction": format_instruction(s.instruction),
                 "norm": s.norm,
                 "marginals": s.marginals,
                 "cumulative_probability": s.cumulative_probability}
                for s in self.steps
            ],
            "cumulative_probability": self.cumulative_probability,
            "readout": _readout_json(self.readout),
        }


def _readout_json(payload):
    if payload is None or isinstance(payload, (dict, list)) and not payload:
        return payload
    if isinstance(payload, StateVector):
        return payload.to_json()
    first = next(iter(payload))
    if isinstance(first, tuple):
        return [{"channel": k[0], "path": k[1], "basis": k[2], "p": v} for k, v in payload.items()]
    if hasattr(first, "name"):
        return {k.name: v for k, v in payload.items()}
    return payload


def _marginals(state: StateVector) -> dict[str, float]:
    return {r.name: state.marginal(r) for r in REGISTERS}


def _read(kind: str, state: StateVector, cumulative: float):
    if kind == "state":
        return state
    if kind == "snapshot":
        return snapshot_of(state)
    even, odd = branches_of(state)
    outcome = ProtocolOutcome(cumulative, even, odd, state)
    if kind == "parity":
        return parity_readout(outcome)
    return bell_distribution(outcome)


def execute(program: CircuitProgram) -> ExecutionTrace:
    """Run a program, recording norm, marginals and post-selection odds per step."""
    state: StateVector | None = None
    cumulative = 1.0
    steps: list[TraceStep] = []
    payload = None
    for instr in program:
        if isinstance(instr, Prepare):
            amps = np.array(instr.amplitudes, dtype=complex)
            state = build_initial_state(SystemAmplitudes.from_array(amps, normalize=True))
        elif isinstance(instr, CNot):
            state = apply(state, cnot(instr.control, instr.value, instr.target))
        elif isinstance(instr, Hadamard):
            state = apply(state, hadamard(instr.register))
        elif isinstance(instr, Waveplate):
            state = apply(state, waveplate(instr.kind, instr.angle, instr.register))
        elif isinstance(instr, Project):
            try:
                state, p = project(state, instr.register, instr.value)
            except ZeroProbabilityBranch as exc:
                raise CircuitZeroProbability(str(exc), *instr.span, format_instruction(instr)) from exc
            cumulative *= p
        elif isinstance(instr, Readout):
            payload = _read(instr.kind, state, cumulative)
        steps.append(TraceStep(instr, float(np.sqrt(state.norm_squared)), _marginals(state), cumulative))
    return ExecutionTrace(steps, state, cumulative, payload)
