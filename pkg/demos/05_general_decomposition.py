"""
Any matrix as four unitaries
============================

Split A into Hermitian and anti-Hermitian parts. Each becomes a sine of a
small-step unitary, so A v is recovered with an eps^2 error.
"""

import numpy as np

from qkud.krylov import general_unitary_decomposition_apply

rng = np.random.default_rng(3)
a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
v = rng.normal(size=8) + 1j * rng.normal(size=8)

eps = np.logspace(-3, -1, 8)
err = [np.linalg.norm(general_unitary_decomposition_apply(a, e, v) - a @ v) for e in eps]
for e, x in zip(eps, err):
    print(f"eps {e:.1e}: error {x:.2e}")
print("log-log slope", np.polyfit(np.log(eps), np.log(err), 1)[0])

# %%
# The nilpotent example: A |1> = |0>.
n = np.array([[0, 1], [0, 0]], dtype=complex)
print(general_unitary_decomposition_apply(n, 1e-3, np.array([0, 1], dtype=complex)))
