"""Two-qubit polarization tomography: simulated data, linear inversion, MLE, fidelity.

Each photon is analyzed in the six states H, V, D, A, R, L, giving 36 joint
projectors. A setting is recorded as an independent count out of
``shots`` trials, as for a single-output polarizing beam splitter.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field

import numpy as np

from .core import DensityMatrix
from .errors import InvalidDensityMatrix, RankDeficientRecord
from .gates import I2, X, Y, Z, hwp_matrix, qwp_matrix

_S = 1 / np.sqrt(2)
ANALYZER_STATES = {
    "H": np.array([1, 0], dtype=complex),
    "V": np.array([0, 1], dtype=complex),
    "D": np.array([_S, _S], dtype=complex),
    "A": np.array([_S, -_S], dtype=complex),
    "R": np.array([_S, 1j * _S], dtype=complex),
    "L": np.array([_S, -1j * _S], dtype=complex),
}

# (QWP, HWP) fast-axis angles in degrees that route each state to the
# transmitted (H) port of the polarizing beam splitter.
ANALYZER_ANGLES = {
    "H": (0.0, 0.0),
    "V": (0.0, 45.0),
    "D": (45.0, 22.5),
    "A": (45.0, -22.5),
    "R": (45.0, 0.0),
    "L": (-45.0, 0.0),
}

SETTINGS = tuple(itertools.product("HVDARL", repeat=2))

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 5000


def analyzer_unitary(state: str) -> np.ndarray:
    q, h = ANALYZER_ANGLES[state]
    return hwp_matrix(h) @ qwp_matrix(q)


def setting_projector(a: str, b: str) -> np.ndarray:
    va, vb = ANALYZER_STATES[a], ANALYZER_STATES[b]
    v = np.kron(va, vb)
    return np.outer(v, v.conj())


def _as_matrix(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.entries
    try:
        return DensityMatrix(rho).entries
    except InvalidDensityMatrix:
        raise
    except Exception as exc:
        raise InvalidDensityMatrix(str(exc)) from exc


@dataclass
class TomographyRecord:
    """Counts per analyzer setting, each out of ``shots`` trials.

    Counts may be non-integer expected values, which is how the exact
    (infinite statistics) limit is represented.
    """

    settings: list[tuple[str, str]]
    counts: np.ndarray
    shots: int
    projectors: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.settings = [tuple(s) for s in self.settings]
        self.counts = np.asarray(self.counts, dtype=float)
        if self.counts.shape != (len(self.settings),):
            raise ValueError("one count per setting is required")
        if np.any(self.counts < 0) or np.any(self.counts > self.shots + 1e-9):
            raise ValueError("counts must lie in [0, shots]")
        for a, b in self.settings:
            if a not in ANALYZER_STATES or b not in ANALYZER_STATES:
                raise ValueError(f"unknown analyzer setting {(a, b)!r}")
        self.projectors = np.array([setting_projector(a, b) for a, b in self.settings])

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.shots

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["setting_a", "setting_b", "count", "shots"])
        for (a, b), n in zip(self.settings, self.counts):
            w.writerow([a, b, int(n) if float(n).is_integer() else repr(float(n)), self.shots])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "TomographyRecord":
        reader = csv.DictReader(io.StringIO(text))
        if reader.fieldnames != ["setting_a", "setting_b", "count", "shots"]:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        settings, counts, shots = [], [], set()
        for rec in reader:
            settings.append((rec["setting_a"], rec["setting_b"]))
            counts.append(float(rec["count"]))
            shots.add(int(rec["shots"]))
        if len(shots) != 1:
            raise ValueError("all settings must share one shots value")
        return cls(settings, np.array(counts), shots.pop())


def probabilities(rho, settings=SETTINGS) -> np.ndarray:
    """Tr(Pi rho) for each setting."""
    m = _as_matrix(rho)
    return np.array([np.real(np.trace(setting_projector(a, b) @ m)) for a, b in settings])


def simulate_tomography(rho, shots: int, seed: int, settings=SETTINGS) -> TomographyRecord:
    """Binomial count for every setting, drawn from a PCG64 generator."""
    if shots < 1:
        raise ValueError("shots must be at least 1")
    p = np.clip(probabilities(rho, settings), 0.0, 1.0)
    rng = np.random.Generator(np.random.PCG64(seed & 0xFFFF_FFFF_FFFF_FFFF))
    return TomographyRecord(list(settings), rng.binomial(shots, p), shots)


def exact_record(rho, shots: int = 1, settings=SETTINGS) -> TomographyRecord:
    return TomographyRecord(list(settings), shots * probabilities(rho, settings), shots)


# Hermitian operator basis: identity and the 15 two-qubit Pauli products.
_PAULI_1Q = (I2, X, Y, Z)
PAULI_BASIS = np.array([np.kron(a, b) for a in _PAULI_1Q for b in _PAULI_1Q])


def _design(projectors: np.ndarray) -> np.ndarray:
    """Row i, column k: Tr(Pi_i P_k) / 4."""
    return np.real(np.einsum("iab,kba->ik", projectors, PAULI_BASIS)) / 4


def linear_inversion(record: TomographyRecord) -> np.ndarray:
    """Least-squares unit-trace Hermitian estimate; not necessarily positive."""
    A = _design(record.projectors)
    if np.linalg.matrix_rank(A, tol=1e-10) < 16:
        raise RankDeficientRecord("settings do not determine a two-qubit state")
    f = record.frequencies
    # The identity coefficient is pinned to 1 by the trace constraint.
    coeffs, *_ = np.linalg.lstsq(A[:, 1:], f - A[:, 0], rcond=None)
    est = (PAULI_BASIS[0] + np.tensordot(coeffs, PAULI_BASIS[1:], axes=1)) / 4
    return (est + est.conj().T) / 2


@dataclass
class MLEResult:
    rho: DensityMatrix
    log_likelihood: float
    iterations: int
    converged: bool
    history: list[float] = field(default_factory=list, repr=False)


def log_likelihood(rho: np.ndarray, record: TomographyRecord) -> float:
    """Mean log-likelihood per count, sum_i f_i log p_i with f normalized."""
    p = np.real(np.einsum("iab,ba->i", record.projectors, rho))
    w = record.counts / record.counts.sum()
    mask = w > 0
    return float(np.sum(w[mask] * np.log(np.clip(p[mask], 1e-300, None))))


def mle_reconstruct(record: TomographyRecord, tol: float = DEFAULT_TOL,
                    max_iter: int = DEFAULT_MAX_ITER) -> MLEResult:
    """Iterative R rho R maximum-likelihood reconstruction.

    Starts from the maximally mixed state. Each step maps rho to
    R rho R / Tr(R rho R) with R = sum_i (f_i / p_i) Pi_i. If a full step ever
    lowers the likelihood the step is shrunk toward rho until it does not.
    Stops once the likelihood gain drops below ``tol``; ``converged`` is False
    when ``max_iter`` runs out first.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    A = _design(record.projectors)
    if np.linalg.matrix_rank(A, tol=1e-10) < 16:
        raise RankDeficientRecord("settings do not determine a two-qubit state")
    if record.counts.sum() <= 0:
        raise ValueError("record holds no counts")
    projectors = record.projectors
    w = record.counts / record.counts.sum()
    rho = np.eye(4, dtype=complex) / 4
    ll = log_likelihood(rho, record)
    history = [ll]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        p = np.real(np.einsum("iab,ba->i", projectors, rho))
        ratio = np.where(w > 0, w / np.clip(p, 1e-300, None), 0.0)
        R = np.tensordot(ratio, projectors, axes=1)
        new_ll, candidate = -np.inf, rho
        step = 1.0
        while step > 1e-6:
            Rs = (1 - step) * np.eye(4) + step * R
            trial = Rs @ rho @ Rs
            trial = trial / np.real(np.trace(trial))
            trial = (trial + trial.conj().T) / 2
            new_ll = log_likelihood(trial, record)
            if new_ll >= ll:
                candidate = trial
                break
            step /= 2
        else:
            new_ll = ll
        gain = new_ll - ll
        rho, ll = candidate, new_ll
        history.append(ll)
        if gain < tol:
            converged = True
            break
    return MLEResult(DensityMatrix(rho), ll, it, converged, history)


def _sqrt_psd(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    w = np.where(w > 1e-14 * max(w.max(), 1.0), w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))**2.

    Computed as the squared trace norm of sqrt(rho) sqrt(sigma), which stays
    accurate when either argument is (nearly) pure.
    """
    a, b = _as_matrix(rho), _as_matrix(sigma)
    s = np.linalg.svd(_sqrt_psd(a) @ _sqrt_psd(b), compute_uv=False)
    return float(min(max(np.sum(s) ** 2, 0.0), 1.0))


def bootstrap_fidelity(record: TomographyRecord, target, resamples: int = 100,
                       seed: int = 0, tol: float = 1e-8, max_iter: int = DEFAULT_MAX_ITER
                       ) -> tuple[float, float]:
    """Parametric bootstrap: (fidelity of the MLE, std over resampled MLEs).

    Resamples are binomial redraws at the MLE's predicted probabilities,
    each with its own derived seed ``seed ^ k``.
    """
    best = mle_reconstruct(record, tol=tol, max_iter=max_iter).rho
    center = fidelity(best, target)
    p = np.clip(np.real(np.einsum("iab,ba->i", record.projectors, best.entries)), 0, 1)
    values = []
    for k in range(resamples):
        rng = np.random.Generator(np.random.PCG64(seed ^ k))
        rec = TomographyRecord(record.settings, rng.binomial(record.shots, p), record.shots)
        values.append(fidelity(mle_reconstruct(rec, tol=tol, max_iter=max_iter).rho, target))
    return center, float(np.std(values, ddof=1)) if resamples > 1 else 0.0
