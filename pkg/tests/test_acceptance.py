"""Acceptance criteria, one test per criterion.

Each test records a single ``PASS``/``FAIL`` line and then asserts. The lines
are printed together in an "acceptance criteria" section at the end of the
pytest run (see ``conftest.py``), also when the file is run directly.
Tolerances and runtime budgets are the ones the criteria state.
"""

import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from nonlocal_eraser import circuit, cli
from nonlocal_eraser.core import (
    DIM,
    REGISTERS,
    DensityMatrix,
    StateVector,
    SystemAmplitudes,
    apply,
    basis_index,
    project,
)
from nonlocal_eraser.gates import cnot, hadamard, waveplate
from nonlocal_eraser.noise import (
    BASIS_INPUTS,
    SUPERPOSITION_STATE,
    NoiseModel,
    apply_noise,
    error_rate,
    expected_cells,
    ideal_cells,
    parity_table,
    sample_table,
)
from nonlocal_eraser.protocol import BellLabel, bell_measure, run_protocol
from nonlocal_eraser.tomography import (
    fidelity,
    log_likelihood,
    mle_reconstruct,
    simulate_tomography,
)

SEED = 20240515
RESULTS: list[str] = []
S2 = 1 / np.sqrt(2)


def report(number: int, title: str, ok: bool, detail: str):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} -- {detail}"
    RESULTS.append(line)
    assert ok, line


def closed_form_final(sys_amp: SystemAmplitudes) -> np.ndarray:
    # HH, VV tagged by ancilla 1 and HV, VH by ancilla 0; both paths end in d.
    v = np.zeros(DIM, dtype=complex)
    pol = [("H", "H"), ("H", "V"), ("V", "H"), ("V", "V")]
    for (a, b), c, aux in zip(pol, sys_amp.as_array(), (1, 0, 0, 1)):
        v[basis_index(a, "d", b, "d", aux)] = c
    return v


def test_criterion_1_closed_form_oracle():
    rng = np.random.default_rng(SEED)
    inputs = [SystemAmplitudes.random(rng) for _ in range(1000)]
    start = time.perf_counter()
    outcomes = [run_protocol(s) for s in inputs]
    elapsed = time.perf_counter() - start
    state_err = max(1 - abs(np.vdot(closed_form_final(s), o.final_state.amplitudes))
                    for s, o in zip(inputs, outcomes))
    prob_err = max(abs(o.success_probability - 0.25) for o in outcomes)
    ok = state_err < 1e-10 and prob_err < 1e-12 and elapsed < 1.0
    report(1, "closed-form equivalence", ok,
           f"max 1-|overlap|={state_err:.1e}, max |p-0.25|={prob_err:.1e}, "
           f"{elapsed:.2f}s for 1000 inputs")


def test_criterion_2_ideal_parity_table():
    start = time.perf_counter()
    table = parity_table(BASIS_INPUTS, shots=100_000, model=NoiseModel.ideal(), seed=SEED)
    expected = {"HH": ("l", "HH"), "VV": ("l", "VV"), "HV": ("r", "HV"), "VH": ("r", "VH")}
    routed = all(table.row(k)[cell] == sum(table.row(k).values()) == 100_000
                 for k, cell in expected.items())
    rate = error_rate(table, {k: {c} for k, c in expected.items()})
    elapsed = time.perf_counter() - start
    ok = routed and rate == 0 and elapsed < 1.0
    report(2, "ideal parity table", ok,
           f"all counts in l:HH, l:VV, r:HV, r:VH = {routed}, error_rate={rate}, {elapsed:.2f}s")


def test_criterion_3_noise_calibration():
    model = NoiseModel.default()
    shots = 1_000_000
    outcomes = {k: run_protocol(s) for k, s in BASIS_INPUTS.items()}
    parity = sample_table({k: apply_noise(o, model) for k, o in outcomes.items()}, shots, SEED)
    parity_rate = error_rate(parity, {k: expected_cells(ideal_cells(o), "channel")
                                      for k, o in outcomes.items()})
    sup = run_protocol(SUPERPOSITION_STATE)
    erased = sample_table({"superposition": apply_noise(sup, model)}, shots, SEED + 1)
    erasure_rate = error_rate(erased, {"superposition": expected_cells(ideal_cells(sup), "cell")})
    ok = 0.001 <= parity_rate <= 0.004 and 0.003 <= erasure_rate <= 0.010
    report(3, "noise calibration", ok,
           f"parity error {parity_rate:.4%} in [0.1%, 0.4%], "
           f"superposition erasure error {erasure_rate:.4%} in [0.3%, 1.0%]")


def test_criterion_4_subspace_projection():
    start = time.perf_counter()
    outcome = run_protocol(SUPERPOSITION_STATE)
    even_target = np.array([1, 0, 0, -1j]) * S2
    odd_target = np.array([0, -1j, 1, 0]) * S2
    targets = {"even": (outcome.branch_even, even_target), "odd": (outcome.branch_odd, odd_target)}
    ideal_f, mle_f = {}, {}
    for k, (branch, vec) in targets.items():
        target = DensityMatrix.pure(vec)
        ideal_f[k] = fidelity(branch.rho, target)
        record = simulate_tomography(branch.rho, 100_000, SEED + len(k))
        mle_f[k] = fidelity(mle_reconstruct(record).rho, target)
    elapsed = time.perf_counter() - start
    ok = (min(ideal_f.values()) >= 1 - 1e-10 and min(mle_f.values()) >= 0.98 and elapsed < 30)
    report(4, "subspace projection", ok,
           f"ideal F even={ideal_f['even']:.12f} odd={ideal_f['odd']:.12f}; "
           f"MLE F even={mle_f['even']:.4f} odd={mle_f['odd']:.4f}; {elapsed:.1f}s")


def test_criterion_5_bell_completeness():
    start = time.perf_counter()
    labels = list(BellLabel)
    matrix = np.array([[bell_measure(a.amplitudes)[b] for b in labels] for a in labels])
    perm_err = np.max(np.abs(matrix - np.eye(4)))
    fids = {}
    for i, lab in enumerate(labels):
        rho = lab.amplitudes.density()
        record = simulate_tomography(rho, 100_000, SEED + i)
        fids[lab.name] = fidelity(mle_reconstruct(record).rho, rho)
    elapsed = time.perf_counter() - start
    ok = perm_err < 1e-12 and min(fids.values()) >= 0.97 and elapsed < 60
    report(5, "Bell completeness", ok,
           f"max |M - permutation|={perm_err:.1e}; tomography F min={min(fids.values()):.4f} "
           f"({', '.join(f'{k}={v:.4f}' for k, v in fids.items())}); {elapsed:.1f}s")


def _random_gate(rng):
    kind = rng.integers(4)
    regs = rng.choice(len(REGISTERS), size=2, replace=False)
    a, b = REGISTERS[regs[0]], REGISTERS[regs[1]]
    if kind == 0:
        return cnot(a, int(rng.integers(2)), b)
    if kind == 1:
        return hadamard(a)
    pol = REGISTERS[int(rng.choice([0, 2]))]
    return waveplate("HWP" if kind == 2 else "QWP", rng.uniform(-180, 180), pol)


def _random_program(rng):
    z = rng.normal(size=4) + 1j * rng.normal(size=4)
    instrs = [circuit.Prepare(tuple(complex(v) for v in z / np.linalg.norm(z)))]
    for _ in range(rng.integers(0, 10)):
        g = rng.integers(4)
        r = REGISTERS[int(rng.integers(5))]
        if g == 0:
            t = REGISTERS[(int(r) + 1 + int(rng.integers(4))) % 5]
            instrs.append(circuit.CNot(r, int(rng.integers(2)), t))
        elif g == 1:
            instrs.append(circuit.Hadamard(r))
        elif g == 2:
            pol = REGISTERS[int(rng.choice([0, 2]))]
            instrs.append(circuit.Waveplate(str(rng.choice(["HWP", "QWP"])),
                                            float(rng.uniform(-90, 90)), pol))
        else:
            instrs.append(circuit.Project(r, int(rng.integers(2))))
    if rng.random() < 0.7:
        instrs.append(circuit.Readout(str(rng.choice(circuit.READOUT_KINDS))))
    return circuit.CircuitProgram(tuple(instrs))


def test_criterion_6_invariant_suites():
    rng = np.random.default_rng(SEED)
    start = time.perf_counter()
    n = 1000

    unitary_err = 0.0
    for _ in range(n):
        m = _random_gate(rng).matrix
        unitary_err = max(unitary_err, np.max(np.abs(m @ m.conj().T - np.eye(len(m)))))
        psi = StateVector.random(rng)
        unitary_err = max(unitary_err, abs(apply(psi, _random_gate(rng)).norm_squared - 1))

    completeness_err = 0.0
    for _ in range(n):
        psi = StateVector.random(rng)
        reg = REGISTERS[int(rng.integers(5))]
        total = project(psi, reg, 0)[1] + project(psi, reg, 1)[1]
        completeness_err = max(completeness_err, abs(total - 1))

    monotone, psd = True, True
    for k in range(n):
        rho = DensityMatrix.random(rng, rank=int(rng.integers(1, 5)))
        record = simulate_tomography(rho, int(rng.integers(100, 5000)), k)
        result = mle_reconstruct(record, tol=1e-8, max_iter=300)
        hist = np.array(result.history)
        monotone &= bool(np.all(np.diff(hist) >= -1e-12))
        monotone &= abs(hist[-1] - log_likelihood(result.rho.entries, record)) < 1e-9
        eig = np.linalg.eigvalsh(result.rho.entries)
        psd &= bool(eig.min() >= -1e-8 and abs(np.trace(result.rho.entries) - 1) < 1e-10)

    round_trips = 0
    for _ in range(n):
        prog = _random_program(rng)
        round_trips += circuit.parse(circuit.format(prog)) == prog

    elapsed = time.perf_counter() - start
    ok = (unitary_err < 1e-12 and completeness_err < 1e-12 and monotone and psd
          and round_trips == n and elapsed < 60)
    report(6, "invariant suites", ok,
           f"unitarity err {unitary_err:.1e}, completeness err {completeness_err:.1e}, "
           f"MLE monotone={monotone}, PSD={psd}, round trips {round_trips}/{n}; {elapsed:.1f}s")


def test_criterion_7_determinism():
    start = time.perf_counter()
    with tempfile.TemporaryDirectory() as tmp:
        blobs = []
        for name in ("first", "second"):
            out = Path(tmp) / name
            code = cli.main(["parity", "--seed", "42", "--shots", "100000",
                             "--noise", "default", "--out", str(out)])
            assert code == 0
            blobs.append((out / "parity_counts.csv").read_bytes())
    elapsed = time.perf_counter() - start
    ok = blobs[0] == blobs[1] and elapsed < 5
    report(7, "determinism", ok, f"identical CSV={blobs[0] == blobs[1]} "
           f"({len(blobs[0])} bytes), {elapsed:.2f}s for two runs")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
