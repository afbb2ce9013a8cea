"""
Complete Bell-state discrimination
==================================

The parity channel separates Psi from Phi. Measuring both photons in the
diagonal basis afterwards gives the XX sign, which separates + from -.
Together the two bits label all four Bell states deterministically.
"""

import numpy as np

from nonlocal_eraser import BellLabel, bell_measure
from nonlocal_eraser.core import SystemAmplitudes

labels = list(BellLabel)
matrix = np.array([[bell_measure(a.amplitudes)[b] for b in labels] for a in labels])
matrix = np.abs(matrix.round(12))  # drop -0.0 from rounding noise
print("rows: prepared state, columns: reported label")
print("          " + "  ".join(f"{b.name:>9}" for b in labels))
for a, row in zip(labels, matrix):
    print(f"{a.name:>9} " + "  ".join(f"{v:9.3f}" for v in row))

# A product state is not a Bell state, so its labels come out random.
print("\n|HH>:", {k.name: round(v, 3) for k, v in bell_measure(SystemAmplitudes(1, 0, 0, 0)).items()})
