"""
Measuring primitives and recombining them
=========================================

On hardware the Krylov vectors are never held. Each (X + X^dagger)^n is
expanded binomially and M, S are rebuilt from expectation values
<psi0| exp(i m eps H) O exp(i n eps H) |psi0>.
"""

import numpy as np

from qkud import hamiltonian as ham
from qkud import krylov as kr
from qkud import lcu
from qkud.linalg import basis_state

for c in lcu.binomial_phase_coeffs(3):
    print(f"freq {c.freq:+d}: {c.coeff}")

# %%
h = ham.build_tfim(4, 1.0, 1.0)
cache = kr.spectral_cache(h)
psi0 = basis_state(16, 0)
eps, order = 0.1, 6
table = lcu.build_primitive_table(order, eps, cache, psi0, h)
print(f"{len(lcu.primitive_keys(order))} keys, {len(table)} stored after conjugate pairing")

m_l, s_l = lcu.assemble_matrices_lcu(order, eps, table)
vecs = [psi0]
for _ in range(order):
    vecs.append(kr.qkud_step(vecs[-1], eps, cache))
m_d, s_d = kr.assemble_matrices(vecs, h)
print("relative difference M:", np.linalg.norm(m_l - m_d) / np.linalg.norm(m_d))
print("relative difference S:", np.linalg.norm(s_l - s_d) / np.linalg.norm(s_d))

# %%
# The recombination cancels hard at small eps. The amplification factor
# is tracked and too much of it raises PrecisionLoss.
for e in (0.5, 0.1, 1e-2, 1e-4):
    t = lcu.build_primitive_table(order, e, cache, psi0, h)
    print(f"eps {e:.0e}: cancellation ratio {lcu.cancellation_ratio(order, e, t):.1e}")

# %%
# Finite shot statistics, modeled as Gaussian noise on each primitive.
cfg = kr.KrylovConfig(method="qkud", epsilon=0.1, max_iter=4, stop_delta=0.0)
clean, _ = lcu.run_lcu(cfg, h, psi0, cache)
for sigma in (1e-6, 1e-4, 1e-3):
    noisy, _ = lcu.run_lcu(cfg, h, psi0, cache, noise_sigma=sigma, seed=1)
    print(f"sigma {sigma:.0e}: |dE| = {abs(noisy.final.e_min - clean.final.e_min):.2e}")

# %%
# Tables round-trip through JSON for measure-once, recombine-later work.
back = lcu.PrimitiveTable.from_json(table.to_json())
print("round trip exact:", back.entries == table.entries)
