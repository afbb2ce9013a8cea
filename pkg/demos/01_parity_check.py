"""
Nonlocal parity check
=====================

Two photons each carry a polarization qubit. Alice's photon and Bob's photon
never meet, yet the joint parity ZZ can be read out of a single ancilla path
without learning either polarization. This script walks the 32-amplitude
register through the protocol and then builds a noisy count table.
"""

import numpy as np

from nonlocal_eraser import (
    NoiseModel,
    SystemAmplitudes,
    build_initial_state,
    parity_readout,
    run_protocol,
)
from nonlocal_eraser.noise import BASIS_INPUTS, error_rate, expected_cells, ideal_cells, parity_table
from nonlocal_eraser.protocol import alice_stage, bob_coupling, erase

# Start from |HH>: alpha = 1, all other amplitudes zero.
sys_amp = SystemAmplitudes(1, 0, 0, 0)
state = build_initial_state(sys_amp)
print("initial:", state.nonzero())

# Alice couples her polarization to her path and keeps the d output.
state, p_alice = alice_stage(state)
print(f"after Alice (p={p_alice:.2f}):", state.nonzero())

# Bob's two C-NOTs write the parity into the ancilla path.
state = bob_coupling(state)
print("after Bob's coupling:", state.nonzero())

# The Hadamard on Bob's path erases which-path information.
state, p_erase = erase(state)
print(f"after erasure (p={p_erase:.2f}):", state.nonzero())

# Same thing in one call, for a random input.
rng = np.random.default_rng(7)
random_input = SystemAmplitudes.random(rng)
outcome = run_protocol(random_input)
print("\nrandom input:", np.round(random_input.as_array(), 3))
print("success probability:", outcome.success_probability)
print("parity readout:", parity_readout(outcome))
a = random_input.as_array()
print("expected even weight |alpha|^2 + |eta|^2 =", abs(a[0]) ** 2 + abs(a[3]) ** 2)

# A count table for the four basis inputs with the default imperfections.
model = NoiseModel.default()
table = parity_table(BASIS_INPUTS, shots=10_000, model=model, seed=1)
print("\n" + table.to_csv())
expected = {k: expected_cells(ideal_cells(run_protocol(s)), "channel")
            for k, s in BASIS_INPUTS.items()}
print(f"parity error rate: {error_rate(table, expected):.3%}")
