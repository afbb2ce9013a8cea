"""
Erasing which-path information
==============================

Before the eraser, the path of Bob's photon still reveals Alice's and Bob's
polarizations. After the Hadamard, only the parity survives, and the state in
each parity subspace stays coherent.
"""

import numpy as np

from nonlocal_eraser import run_protocol
from nonlocal_eraser.noise import SUPERPOSITION_STATE
from nonlocal_eraser.protocol import pre_erasure_snapshot
from nonlocal_eraser.tomography import fidelity

sys_amp = SUPERPOSITION_STATE
print("input amplitudes (HH, HV, VH, VV):", sys_amp.as_array())

# Before erasure every (channel, path) port holds exactly one polarization pair.
print("\nbefore the eraser:")
for (channel, path, basis), p in sorted(pre_erasure_snapshot(sys_amp).items()):
    if p > 1e-12:
        print(f"  {channel}{path}  {basis}  p={p:.3f}")

# After erasure only the channel carries information: even or odd parity.
outcome = run_protocol(sys_amp)
for name, branch in (("even", outcome.branch_even), ("odd", outcome.branch_odd)):
    print(f"\n{name} branch, p={branch.probability:.3f}")
    print(np.round(branch.rho.entries, 3))

# The branch states are the projections onto the parity subspaces, coherences intact.
s = 1 / np.sqrt(2)
even = np.array([1, 0, 0, -1j]) * s
odd = np.array([0, -1j, 1, 0]) * s
print("\nfidelity with (HH - iVV)/sqrt2:", fidelity(outcome.branch_even.rho, np.outer(even, even.conj())))
print("fidelity with (-iHV + VH)/sqrt2:", fidelity(outcome.branch_odd.rho, np.outer(odd, odd.conj())))
