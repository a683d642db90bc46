"""
Ill-conditioned overlaps and canonical orthogonalization
========================================================

Krylov vectors become nearly parallel. ``solve_gevp`` drops overlap
eigenvalues below a relative threshold before solving M c = E S c.
"""

import numpy as np

from qkud import hamiltonian as ham
from qkud import krylov as kr
from qkud.geneig import solve_gevp

# %%
# One qubit, H = Z, |+>, eps = 0.5: a 2 x 2 pencil with eigenvalues -1, 1.
s = np.sin(0.5) / 0.5
print(solve_gevp(np.array([[0, s], [s, 0]]), np.diag([1, s * s])).eigvals)

# %%
# A duplicated vector leaves only one direction.
print("kept:", solve_gevp(np.ones((2, 2)), np.ones((2, 2))).kept_dim)

# %%
# At eps = 1e-6 the QKUD vectors are numerically the power basis.
h = ham.build_tfim(6, 1.0, 1.0)
rec, _ = kr.run(kr.KrylovConfig(method="qkud", epsilon=1e-6, max_iter=40), h)
for r in rec.rows[::3]:
    print(f"iter {r.iter:2d}: gap {r.e_exact_gap:.2e} cond(S) {r.cond_s:.1e} kept {r.kept_dim}")
print(rec.status.value)

# %%
# The threshold trades accuracy against stability.
for thr in (1e-14, 1e-12, 1e-10, 1e-8):
    r, _ = kr.run(kr.KrylovConfig(method="qkud", epsilon=1e-6, max_iter=40, gevp_threshold=thr), h)
    rise = np.max(np.diff(r.energies))
    print(f"threshold {thr:.0e}: final gap {r.final.e_exact_gap:.2e}, largest upward step {rise:.1e}")
