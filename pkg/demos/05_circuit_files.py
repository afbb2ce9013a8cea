"""
Circuit files
=============

The protocol can also be written as a small text program. The package ships
a few; here we run one, swap its input, and print the step-by-step trace.
"""

from nonlocal_eraser import circuit

print("shipped circuits:", circuit.shipped_circuits())
source = circuit.shipped_source("protocol.qec")
print(source)

program = circuit.parse(source)
trace = circuit.execute(program)
for step in trace.steps:
    line = step.instruction.span[0]
    text = circuit.format_instruction(step.instruction)
    print(f"line {line:2d}  {text:<24} cumulative p={step.cumulative_probability:.3f}")
print("readout:", trace.readout)

# Same pipeline, different input state.
program = program.with_prepare([0.5, -0.5j, 0.5, -0.5j])
print("\nsuperposition input readout:", circuit.execute(program).readout)

# Canonical formatting drops comments and normalizes spacing.
print("\n" + circuit.format(program))

# Diagnostics carry a position.
try:
    circuit.parse("prepare 1 0 0 0\ncnot APol V APol\n")
except circuit.CircuitError as exc:
    print("error:", exc)
