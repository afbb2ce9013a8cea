"""Phenomenological noise on channel/basis cell probabilities and seeded count sampling.

Cells are ``(channel, basis)`` pairs. After erasure the channel is ``l``
(even) or ``r`` (odd) and the basis is a two-letter polarization outcome such
as ``"HV"`` (or ``"+-"`` for the sigma_x analysis of the Bell readout).
Before erasure the channel also carries Bob's path, e.g. ``"lu"``.

Noise acts on these classical probabilities only:

* imperfect eraser visibility ``v`` moves ``(1 - v) / 2`` of every cell into
  the same basis cell of the opposite parity channel;
* analyzer extinction ``e`` moves ``e / 2`` of every cell into each of the
  two cells differing by one flipped polarization;
* a background ``b`` is added to every cell before renormalizing.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import POLARIZATION_BASIS, SystemAmplitudes, build_initial_state
from .gates import H as HADAMARD
from .errors import EmptyTable, ParameterOutOfRange, ProbabilityNotNormalized
from .protocol import (
    CHANNEL_OF_AUX,
    CHANNELS,
    ProtocolOutcome,
    alice_stage,
    bob_coupling,
    run_protocol,
    snapshot_of,
)

Cell = tuple[str, str]

X_BASIS = ("++", "+-", "-+", "--")
_FLIP = {"H": "V", "V": "H", "+": "-", "-": "+"}

PROB_TOL = 1e-9

PARITY_CELLS: tuple[Cell, ...] = tuple((c, b) for c in CHANNELS for b in POLARIZATION_BASIS)
BELL_CELLS: tuple[Cell, ...] = tuple((c, b) for c in CHANNELS for b in X_BASIS)
SNAPSHOT_CELLS: tuple[Cell, ...] = tuple(
    (c + p, b) for c in CHANNELS for p in ("u", "d") for b in POLARIZATION_BASIS)

BASIS_INPUTS = {
    "HH": SystemAmplitudes(1, 0, 0, 0),
    "HV": SystemAmplitudes(0, 1, 0, 0),
    "VH": SystemAmplitudes(0, 0, 1, 0),
    "VV": SystemAmplitudes(0, 0, 0, 1),
}
SUPERPOSITION_STATE = SystemAmplitudes(0.5, -0.5j, 0.5, -0.5j)

# Calibrated so the channel error of the parity check sits near 0.2% and
# the cell error of the erased four-term superposition near 0.5%.
DEFAULT_VISIBILITY = 0.996
DEFAULT_EXTINCTION = 0.002
DEFAULT_BACKGROUND = 1e-4


@dataclass(frozen=True)
class NoiseModel:
    eraser_visibility: float = 1.0
    extinction: float = 0.0
    background: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.eraser_visibility <= 1.0:
            raise ParameterOutOfRange(f"eraser_visibility={self.eraser_visibility} not in [0, 1]")
        if not 0.0 <= self.extinction <= 1.0:
            raise ParameterOutOfRange(f"extinction={self.extinction} not in [0, 1]")
        if not self.background >= 0.0:
            raise ParameterOutOfRange(f"background={self.background} is negative")

    @classmethod
    def ideal(cls) -> "NoiseModel":
        return cls(1.0, 0.0, 0.0)

    @classmethod
    def default(cls) -> "NoiseModel":
        return cls(DEFAULT_VISIBILITY, DEFAULT_EXTINCTION, DEFAULT_BACKGROUND)

    @property
    def is_ideal(self) -> bool:
        return self == NoiseModel.ideal()

    def to_json(self) -> dict:
        return {"eraser_visibility": self.eraser_visibility,
                "extinction": self.extinction,
                "background": self.background}

    @classmethod
    def from_json(cls, doc: Mapping) -> "NoiseModel":
        unknown = set(doc) - {"eraser_visibility", "extinction", "background"}
        if unknown:
            raise ParameterOutOfRange(f"unknown noise parameters {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in doc.items()})

    @classmethod
    def load(cls, source: str | Path) -> "NoiseModel":
        """``"ideal"``, ``"default"`` or the path of a JSON file."""
        if source == "ideal":
            return cls.ideal()
        if source == "default":
            return cls.default()
        return cls.from_json(json.loads(Path(source).read_text()))


def ideal_cells(outcome: ProtocolOutcome, basis: str = "z") -> dict[Cell, float]:
    """Noise-free (channel, basis) probabilities of an erased outcome.

    ``basis="z"`` analyzes both photons in H/V, ``basis="x"`` in +/-.
    """
    labels = POLARIZATION_BASIS if basis == "z" else X_BASIS
    rotate = np.eye(4) if basis == "z" else np.kron(HADAMARD, HADAMARD)
    cells = {}
    for aux, channel in CHANNEL_OF_AUX.items():
        br = outcome.branch_even if aux == 1 else outcome.branch_odd
        if br.rho is None:
            diag = np.zeros(4)
        else:
            diag = np.real(np.diag(rotate @ br.rho.entries @ rotate.conj().T))
        for lab, p in zip(labels, diag):
            cells[(channel, lab)] = br.probability * float(p)
    return {c: cells[c] for c in sorted(cells, key=_cell_order)}


def _cell_order(cell: Cell):
    channel, basis = cell
    order = POLARIZATION_BASIS if basis in POLARIZATION_BASIS else X_BASIS
    return (channel[0] != "l", channel[1:] != "u", order.index(basis))


def _opposite_channel(channel: str) -> str:
    return ("r" if channel[0] == "l" else "l") + channel[1:]


def perturb(cells: Mapping[Cell, float], model: NoiseModel,
            interference: bool = True) -> dict[Cell, float]:
    """Apply the three noise mechanisms to a cell-probability map.

    ``interference=False`` skips the visibility term, for stages that precede
    the eraser.
    """
    p = dict(cells)
    if interference and model.eraser_visibility < 1.0:
        leak = (1.0 - model.eraser_visibility) / 2
        p = {c: (1 - leak) * v + leak * p[(_opposite_channel(c[0]), c[1])] for c, v in p.items()}
    if model.extinction > 0.0:
        e = model.extinction
        out = {c: (1 - e) * v for c, v in p.items()}
        for (channel, basis), v in p.items():
            for k in range(2):
                flipped = basis[:k] + _FLIP[basis[k]] + basis[k + 1:]
                out[(channel, flipped)] += e / 2 * v
        p = out
    if model.background > 0.0:
        p = {c: v + model.background for c, v in p.items()}
    total = sum(p.values())
    return {c: v / total for c, v in p.items()}


def apply_noise(outcome: ProtocolOutcome, model: NoiseModel, basis: str = "z") -> dict[Cell, float]:
    return perturb(ideal_cells(outcome, basis), model)


def snapshot_cells(sys: SystemAmplitudes) -> dict[Cell, float]:
    """Pre-erasure cells keyed by (channel+path, basis), e.g. ``("lu", "HH")``."""
    state, _ = alice_stage(build_initial_state(sys))
    snap = snapshot_of(bob_coupling(state))
    return {(c + path, b): snap[(c, path, b)] for c, path, b in snap}


def sample_counts(cell_probabilities: Mapping[Cell, float], shots: int, seed: int) -> dict[Cell, int]:
    """Multinomial draw of ``shots`` events over the cells.

    The generator is numpy's PCG64 seeded with ``seed`` reduced to 64 bits.
    """
    if shots < 0:
        raise ValueError("shots must be non-negative")
    cells = list(cell_probabilities)
    probs = np.array([cell_probabilities[c] for c in cells], dtype=float)
    if np.any(probs < -PROB_TOL) or abs(probs.sum() - 1.0) > PROB_TOL:
        raise ProbabilityNotNormalized(f"cell probabilities sum to {probs.sum()!r}")
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum()
    rng = np.random.Generator(np.random.PCG64(seed & 0xFFFF_FFFF_FFFF_FFFF))
    counts = rng.multinomial(shots, probs)
    return {c: int(n) for c, n in zip(cells, counts)}


@dataclass
class CountsTable:
    """Coincidence counts, one row per prepared input."""

    rows: list[str]
    columns: list[Cell]
    counts: np.ndarray
    shots: list[int] = field(default_factory=list)

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64).reshape(len(self.rows), len(self.columns))
        if not self.shots:
            self.shots = [int(s) for s in self.counts.sum(axis=1)]
        if list(self.counts.sum(axis=1)) != list(self.shots):
            raise ValueError("row counts do not sum to their shots")

    def row(self, label: str) -> dict[Cell, int]:
        i = self.rows.index(label)
        return dict(zip(self.columns, self.counts[i].tolist()))

    def cell(self, row: str, channel: str, basis: str) -> int:
        return self.row(row)[(channel, basis)]

    @classmethod
    def from_rows(cls, rows: Mapping[str, Mapping[Cell, int]]) -> "CountsTable":
        labels = list(rows)
        columns = list(next(iter(rows.values()))) if rows else []
        counts = np.array([[rows[r][c] for c in columns] for r in labels], dtype=np.int64)
        return cls(labels, columns, counts.reshape(len(labels), len(columns)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["input", "channel", "basis", "count"])
        for i, r in enumerate(self.rows):
            for j, (channel, basis) in enumerate(self.columns):
                w.writerow([r, channel, basis, int(self.counts[i, j])])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "CountsTable":
        rows: dict[str, dict[Cell, int]] = {}
        reader = csv.DictReader(io.StringIO(text))
        if reader.fieldnames != ["input", "channel", "basis", "count"]:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        for rec in reader:
            rows.setdefault(rec["input"], {})[(rec["channel"], rec["basis"])] = int(rec["count"])
        return cls.from_rows(rows)

    def to_json(self) -> dict:
        return {
            "columns": [{"channel": c, "basis": b} for c, b in self.columns],
            "rows": [{"input": r, "shots": int(s), "counts": self.counts[i].tolist()}
                     for i, (r, s) in enumerate(zip(self.rows, self.shots))],
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> "CountsTable":
        columns = [(c["channel"], c["basis"]) for c in doc["columns"]]
        rows = [r["input"] for r in doc["rows"]]
        counts = np.array([r["counts"] for r in doc["rows"]], dtype=np.int64)
        return cls(rows, columns, counts.reshape(len(rows), len(columns)),
                   [int(r["shots"]) for r in doc["rows"]])


def sample_table(cell_maps: Mapping[str, Mapping[Cell, float]], shots: int, seed: int) -> CountsTable:
    """Sample every row with its own derived seed ``seed ^ row_index``."""
    rows = {label: sample_counts(cells, shots, seed ^ i)
            for i, (label, cells) in enumerate(cell_maps.items())}
    return CountsTable.from_rows(rows)


def parity_table(inputs: Mapping[str, SystemAmplitudes] | Sequence[SystemAmplitudes] = BASIS_INPUTS,
                 shots: int = 10_000, model: NoiseModel | None = None, seed: int = 0) -> CountsTable:
    """Erase, add noise and sample a (channel x basis) count table per input."""
    model = model or NoiseModel.ideal()
    if not isinstance(inputs, Mapping):
        inputs = {f"input{i}": s for i, s in enumerate(inputs)}
    maps = {label: apply_noise(run_protocol(s), model) for label, s in inputs.items()}
    return sample_table(maps, shots, seed)


def expected_cells(cells: Mapping[Cell, float], level: str = "cell", tol: float = 1e-12) -> set[Cell]:
    """Cells a noise-free run may populate.

    ``level="cell"`` keeps the populated cells themselves; ``level="channel"``
    accepts every basis of a populated channel, so only wrong-channel events
    count as errors.
    """
    hit = {c for c, p in cells.items() if p > tol}
    if level == "cell":
        return hit
    if level == "channel":
        channels = {c for c, _ in hit}
        return {c for c in cells if c[0] in channels}
    raise ValueError(f"unknown level {level!r}")


def error_rate(table: CountsTable, expected: Mapping[str, Iterable[Cell]]) -> float:
    """Fraction of all counts falling outside each row's expected cells."""
    total = int(table.counts.sum())
    if total == 0:
        raise EmptyTable("table holds no counts")
    good = 0
    for i, r in enumerate(table.rows):
        allowed = set(expected[r])
        good += sum(int(n) for c, n in zip(table.columns, table.counts[i]) if c in allowed)
    return 1.0 - good / total


# Laboratory parity-check coincidence counts for the four basis inputs.
REFERENCE_PARITY_COUNTS = CountsTable(
    rows=["HH", "VV", "HV", "VH"],
    columns=list(PARITY_CELLS),
    counts=np.array([
        [9192, 17, 23, 0, 11, 23, 10, 0],
        [0, 18, 17, 9405, 0, 6, 21, 8],
        [25, 18, 0, 14, 14, 9258, 0, 18],
        [9, 0, 13, 25, 24, 0, 9412, 15],
    ]),
)
