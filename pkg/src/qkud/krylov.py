"""QKUD and QRTE Krylov subspaces and the iterative ground-state solve.

QKUD builds each new vector as ``(X + X^dagger) / (2 eps)`` applied to the
previous one, with ``X = i exp(-i eps H)``. That operator is exactly
``sin(eps H) / eps``, which tends to ``H`` with an ``O(eps^2)`` error. QRTE
uses ``exp(-i dt H)`` instead, whose first-order content is only ``O(dt)``
accurate.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import hamiltonian as ham
from .geneig import DEFAULT_THRESHOLD, PSD_TOL, RegularizedSolution, solve_gevp
from .linalg import (
    SpectralCache,
    as_statevector,
    basis_state,
    evolve,
    hermitian_deviation,
    hermitian_eigendecompose,
    phase_combination,
)

log = logging.getLogger(__name__)

CHEMICAL_ACCURACY = 1.6e-3
EXHAUSTION_PATIENCE = 3


class NonHermitianHamiltonian(ValueError):
    pass


class ZeroInitialState(ValueError):
    pass


class Method(str, enum.Enum):
    QKUD = "qkud"
    QRTE = "qrte"


class Status(str, enum.Enum):
    CONVERGED_BY_DELTA = "ConvergedByDelta"
    MAX_ITER_REACHED = "MaxIterReached"
    SUBSPACE_EXHAUSTED = "SubspaceExhausted"


@dataclass(frozen=True)
class KrylovConfig:
    method: Method = Method.QKUD
    epsilon: float = 0.1
    delta_t: float = 0.1
    max_iter: int = 20
    stop_delta: float = 1e-9
    gevp_threshold: float = DEFAULT_THRESHOLD
    normalize_vectors: bool = True
    psi0_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if self.method is Method.QKUD and not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.method is Method.QRTE and not self.delta_t > 0:
            raise ValueError("delta_t must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.stop_delta < 0:
            raise ValueError("stop_delta must be non-negative")
        if not self.gevp_threshold > 0:
            raise ValueError("gevp_threshold must be positive")

    @property
    def parameter(self) -> float:
        return self.epsilon if self.method is Method.QKUD else self.delta_t


@dataclass(frozen=True)
class ConvergenceRow:
    iter: int
    e_min: float
    e_exact_gap: float | None
    cond_s: float
    kept_dim: int


@dataclass
class ConvergenceRecord:
    rows: list[ConvergenceRow] = field(default_factory=list)
    status: Status | None = None
    e_exact: float | None = None

    def append(self, row: ConvergenceRow) -> None:
        if self.rows and row.iter <= self.rows[-1].iter:
            raise ValueError("rows must be strictly increasing in iter")
        if row.kept_dim > row.iter + 1:
            raise ValueError("kept_dim cannot exceed iter + 1")
        self.rows.append(row)

    @property
    def final(self) -> ConvergenceRow:
        return self.rows[-1]

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.e_min for r in self.rows])


@dataclass
class KrylovSubspace:
    vectors: list[np.ndarray]
    scales: list[float]
    M: np.ndarray
    S: np.ndarray
    hermitian_deviation: float = 0.0


def spectral_cache(h: ham.PauliSum) -> SpectralCache:
    return hermitian_eigendecompose(ham.to_dense(h))


def qkud_step(prev: np.ndarray, epsilon: float, cache: SpectralCache) -> np.ndarray:
    """Apply ``(X + X^dagger) / (2 eps)`` with ``X = i exp(-i eps H)``."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    pair = [(1j, epsilon), (-1j, -epsilon)]
    return phase_combination(cache, pair, prev) / (2 * epsilon)


def qrte_step(prev: np.ndarray, delta_t: float, cache: SpectralCache) -> np.ndarray:
    if not delta_t > 0:
        raise ValueError("delta_t must be positive")
    return evolve(cache, delta_t, prev)


def _assemble(vectors, hvectors) -> tuple[np.ndarray, np.ndarray, float]:
    v = np.column_stack(vectors)
    hv = np.column_stack(hvectors)
    m = v.conj().T @ hv
    s = v.conj().T @ v
    dev = max(hermitian_deviation(m), hermitian_deviation(s))
    return (m + m.conj().T) / 2, (s + s.conj().T) / 2, dev


def assemble_matrices(vectors: list[np.ndarray], h: ham.PauliSum) -> tuple[np.ndarray, np.ndarray]:
    """Subspace matrices ``M_ij = <i|H|j>`` and ``S_ij = <i|j>``, Hermitized."""
    if not vectors:
        raise ValueError("no vectors to assemble")
    dims = {v.shape for v in vectors}
    if len(dims) != 1:
        raise ValueError(f"vectors have mismatched shapes {sorted(dims)}")
    hv = ham.apply(h, np.column_stack(vectors))
    m, s, dev = _assemble(vectors, list(hv.T))
    log.debug("hermitization deviation %.3e", dev)
    return m, s


def iterate(
    matrices_at: Callable[[int], tuple[np.ndarray, np.ndarray]],
    config: KrylovConfig,
    e_exact: float | None = None,
    psd_tol: float | None = PSD_TOL,
) -> tuple[ConvergenceRecord, tuple[np.ndarray, np.ndarray]]:
    """Drive the grow-and-solve loop.

    ``matrices_at(n)`` returns ``(M, S)`` over the first ``n + 1`` Krylov
    vectors. Iteration 0 is the reference state alone.
    """
    record = ConvergenceRecord(e_exact=e_exact)
    best_kept = 0
    stagnant = 0
    for n in range(config.max_iter + 1):
        m, s = matrices_at(n)
        if config.normalize_vectors:
            m, s = _rescale(m, s)
        sol: RegularizedSolution = solve_gevp(m, s, config.gevp_threshold, psd_tol)
        e = sol.lowest
        gap = None if e_exact is None else e - e_exact
        record.append(ConvergenceRow(n, e, gap, sol.cond_s, sol.kept_dim))
        if n == 0:
            best_kept = sol.kept_dim
            continue
        if abs(e - record.rows[-2].e_min) < config.stop_delta:
            record.status = Status.CONVERGED_BY_DELTA
            break
        if sol.kept_dim > best_kept:
            best_kept = sol.kept_dim
            stagnant = 0
        else:
            stagnant += 1
            if stagnant >= EXHAUSTION_PATIENCE:
                record.status = Status.SUBSPACE_EXHAUSTED
                break
    else:
        record.status = Status.MAX_ITER_REACHED
    if e_exact is not None and record.final.e_min - e_exact > CHEMICAL_ACCURACY:
        log.warning(
            "final energy %.8f is %.2e above the exact ground energy; the reference "
            "state may not overlap the ground state",
            record.final.e_min,
            record.final.e_min - e_exact,
        )
    return record, (m, s)


def _rescale(m: np.ndarray, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # unit diagonal in S; zero vectors are left alone so the solver drops them
    d = np.sqrt(np.real(np.diag(s)))
    d = np.where(d > 0, 1 / np.where(d > 0, d, 1), 1.0)
    return m * np.outer(d, d), s * np.outer(d, d)


def run(
    config: KrylovConfig,
    h: ham.PauliSum,
    psi0: np.ndarray | None = None,
    cache: SpectralCache | None = None,
) -> tuple[ConvergenceRecord, KrylovSubspace]:
    """Grow the subspace one vector per iteration until a stopping rule fires.

    Stops when ``|E_n - E_{n-1}| < stop_delta``, when ``max_iter`` vectors
    have been added, or when the retained dimension has not grown for three
    iterations. Each row reports its gap to the exact ground energy of the
    whole Hilbert space.
    """
    if not h.is_hermitian():
        raise NonHermitianHamiltonian("Hamiltonian has complex coefficients")
    if cache is None:
        cache = spectral_cache(h)
    if psi0 is None:
        psi0 = basis_state(h.dim, config.psi0_index)
    psi0 = as_statevector(psi0, h.dim)
    nrm = np.linalg.norm(psi0)
    if nrm == 0:
        raise ZeroInitialState("initial state is the zero vector")
    psi0 = psi0 / nrm

    if config.method is Method.QKUD:
        def step(v):
            return qkud_step(v, config.epsilon, cache)
    else:
        def step(v):
            return qrte_step(v, config.delta_t, cache)

    vectors = [psi0]
    hvectors = [ham.apply(h, psi0)]
    scales = [1.0]
    dev = 0.0

    def matrices_at(n):
        nonlocal dev
        while len(vectors) <= n:
            w = step(vectors[-1])
            if config.normalize_vectors:
                scale = float(np.linalg.norm(w))
                if scale > 0:
                    w = w / scale
            else:
                scale = 1.0
            vectors.append(w)
            scales.append(scale)
            hvectors.append(ham.apply(h, w))
        m, s, dev = _assemble(vectors, hvectors)
        return m, s

    record, _ = iterate(matrices_at, config, e_exact=float(cache.eigvals[0]))
    m, s, dev = _assemble(vectors, hvectors)
    return record, KrylovSubspace(vectors, scales, m, s, dev)


def general_unitary_decomposition_apply(a: np.ndarray, epsilon: float, v: np.ndarray) -> np.ndarray:
    """Approximate ``A v`` for arbitrary square ``A`` by four unitaries.

    With ``S = (A + A^dagger)/2`` and ``P = (A - A^dagger)/2`` the result is
    ``(X + X^dagger + Y1 - Y2) v / (2 eps)`` where ``X = i exp(-i eps S)``,
    ``Y1 = exp(eps P)`` and ``Y2 = exp(-eps P)``. The error is ``O(eps^2)``.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    v = as_statevector(v, a.shape[0])
    herm = (a + a.conj().T) / 2
    anti = (a - a.conj().T) / 2
    herm_cache = hermitian_eigendecompose(herm)
    # i P is Hermitian, so exp(+-eps P) = exp(-+i eps (iP)) comes from its cache
    gen_cache = hermitian_eigendecompose(1j * anti)
    xs = phase_combination(herm_cache, [(1j, epsilon), (-1j, -epsilon)], v)
    ys = phase_combination(gen_cache, [(1.0, epsilon), (-1.0, -epsilon)], v)
    return (xs + ys) / (2 * epsilon)
