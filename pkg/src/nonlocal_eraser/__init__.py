"""Simulation of erasure-based nonlocal measurements on a hyper-entangled photon pair.

Modules
-------
core
    32-amplitude register state, projections and reduced density matrices.
gates
    C-NOT couplings, Hadamard, wave plates, Pauli operators.
protocol
    Alice's stage, Bob's couplings, the eraser, parity and Bell readouts.
noise
    Channel-level noise model, seeded count sampling, count tables.
tomography
    Simulated polarization tomography, linear inversion, R rho R MLE, fidelity.
circuit
    The ``.qec`` text format: parse, format, execute.
"""

from .core import (
    DensityMatrix,
    Register,
    StateVector,
    SystemAmplitudes,
    apply,
    build_initial_state,
    partial_trace_to_polarization,
    project,
    to_density,
)
from .errors import *  # noqa: F401,F403
from .gates import GateOp, cnot, hadamard, pauli, waveplate
from .noise import (
    CountsTable,
    NoiseModel,
    apply_noise,
    error_rate,
    parity_table,
    sample_counts,
)
from .protocol import (
    BellLabel,
    ProtocolOutcome,
    alice_stage,
    bell_measure,
    bob_coupling,
    erase,
    parity_readout,
    pre_erasure_snapshot,
    run_protocol,
)
from .tomography import (
    TomographyRecord,
    fidelity,
    linear_inversion,
    mle_reconstruct,
    simulate_tomography,
)

__version__ = "0.1.0"
