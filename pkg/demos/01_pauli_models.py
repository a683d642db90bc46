"""
Pauli-sum Hamiltonians and the statevector kernel
=================================================

Build the two benchmark models, apply them to a state term by term and
check against the dense matrix.
"""

import numpy as np

from qkud import hamiltonian as ham
from qkud.linalg import basis_state

# %%
# A Hamiltonian file is one ``re im WORD`` line per term. Duplicate words merge.
h = ham.parse_pauli_file("# two-spin example\n0.5 0 ZZ\n0.5 0 ZZ\n-1 0 XI\n")
print(ham.serialize_pauli(h))

# %%
# Open transverse-field Ising chain, -J sum ZZ - h sum X.
tfim = ham.build_tfim(4, 1.0, 1.0)
print(f"tfim(4,1,1): {len(tfim.terms)} terms, ground energy",
      np.linalg.eigvalsh(ham.to_dense(tfim))[0])

# %%
# Fermi-Hubbard chain under Jordan-Wigner, qubit 2*site + spin.
# Three sites at U = 4 have ground energy -2 in the half-filled sector.
hub = ham.build_hubbard_chain(3, 1.0, 4.0)
print("hubbard(3,1,4) ground energy", np.linalg.eigvalsh(ham.to_dense(hub))[0])

# %%
# ``apply`` never forms the matrix. Compare on a random vector.
rng = np.random.default_rng(0)
v = rng.normal(size=hub.dim) + 1j * rng.normal(size=hub.dim)
print("apply vs dense:", np.linalg.norm(ham.apply(hub, v) - ham.to_dense(hub) @ v))

# %%
# <psi|H|psi> for a basis state is just the diagonal Z part.
psi = basis_state(hub.dim, 9)
print("<9|H|9> =", np.vdot(psi, ham.apply(hub, psi)).real)
