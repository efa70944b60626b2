"""Walk through the constrained reduction of the planar trap.

In the vanishing-kinetic-energy limit the two momentum constraints become
second class as soon as the uniform field is on.  Inverting their bracket
matrix hands back a one-degree-of-freedom model whose coordinates are the
guiding-centre pair (x1, x2).
"""

from abtrap import (TrapConfig, constraint_matrix, dirac_bracket,
                    perp_hamiltonian, quantize, reduce, reduction_report,
                    serialize_expression, trap_constraints)

cs = trap_constraints()
space = cs.space

print("constraints phi_i = p_i + g_i:")
for phi in cs:
    print("  ", serialize_expression(phi))

cm = constraint_matrix(cs)
print("\nbracket matrix C_ab = {phi_a, phi_b}:")
for row in cm.entry_strings():
    print("   [" + ", ".join(row) + "]")
print("det C =", serialize_expression(cm.determinant))
print("classification:", cm.classification.name)

# the survivors close on a Heisenberg pair up to the 1/(mu*omega_c) scale
x1, x2 = space.vars("x1", "x2")
print("\n{x1, x2}_D =", serialize_expression(dirac_bracket(x1, x2, cs)))

cfg = TrapConfig(omega_P=1.0, omega_c=1.0, omega_0=0.5, a=1.0)
model = reduce(perp_hamiltonian(), trap_constraints(), config=cfg)
spectrum = quantize(model)

print("\nreduced Hamiltonian:",
      serialize_expression(model.reduced_hamiltonian))
print("effective frequency:",
      serialize_expression(model.effective_frequency))
print("zero-point J_z:", serialize_expression(spectrum.zero_point_Jz),
      "=", model.value(spectrum.zero_point_Jz), "at alpha = 1/4")

doc = reduction_report(model, spectrum)
print("\nreport sections:", ", ".join(sorted(doc)))
