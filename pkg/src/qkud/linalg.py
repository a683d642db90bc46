"""Statevectors and exact matrix functions through a cached eigendecomposition.

Statevectors are plain complex ``numpy`` arrays. Every unitary used by the
Krylov builders is applied as ``U diag(phase) U^dagger v`` from a
:class:`SpectralCache`, so there is no Trotter error anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

DENSE_DIM_LIMIT = 1 << 12
HERMITIAN_TOL = 1e-12


class NotHermitian(ValueError):
    pass


class ConvergenceFailure(RuntimeError):
    pass


class NonFiniteFunction(ValueError):
    pass


def basis_state(dim: int, index: int) -> np.ndarray:
    if not 0 <= index < dim:
        raise ValueError(f"basis index {index} outside [0, {dim})")
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def plus_state(n_qubits: int) -> np.ndarray:
    dim = 1 << n_qubits
    return np.full(dim, 1 / np.sqrt(dim), dtype=complex)


def as_statevector(v, dim: int | None = None) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1:
        raise ValueError("a statevector must be one-dimensional")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"statevector has dimension {v.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(v)):
        raise ValueError("statevector has non-finite amplitudes")
    return v


def norm(v: np.ndarray) -> float:
    return float(np.linalg.norm(v))


def normalized(v: np.ndarray) -> np.ndarray:
    nv = norm(v)
    if nv == 0:
        raise ValueError("cannot normalize the zero vector")
    return v / nv


def inner(u: np.ndarray, v: np.ndarray) -> complex:
    """<u|v>, conjugate-linear in ``u``."""
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return complex(np.vdot(u, v))


def hermitian_deviation(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


@dataclass(frozen=True)
class SpectralCache:
    """Eigenpairs of a Hermitian matrix, eigenvalues ascending.

    ``eigvecs`` holds the eigenvectors as columns.
    """

    eigvals: np.ndarray
    eigvecs: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigvals.shape[0]

    @property
    def source_dim(self) -> int:
        return self.dim

    def coords(self, v: np.ndarray) -> np.ndarray:
        if v.shape[0] != self.dim:
            raise ValueError(f"vector dimension {v.shape[0]} does not match cache dimension {self.dim}")
        return self.eigvecs.conj().T @ v

    def expand(self, c: np.ndarray) -> np.ndarray:
        return self.eigvecs @ c

    def apply_diagonal(self, d: np.ndarray, v: np.ndarray) -> np.ndarray:
        """U diag(d) U^dagger v for a vector or a block of column vectors."""
        c = self.coords(v)
        if c.ndim == 2:
            return self.expand(d[:, None] * c)
        return self.expand(d * c)

    def matrix(self) -> np.ndarray:
        return (self.eigvecs * self.eigvals) @ self.eigvecs.conj().T


def hermitian_eigendecompose(h: np.ndarray, dim_limit: int = DENSE_DIM_LIMIT) -> SpectralCache:
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("expected a square matrix")
    if h.shape[0] > dim_limit:
        raise ValueError(f"dimension {h.shape[0]} exceeds dense limit {dim_limit}")
    scale = max(1.0, float(np.max(np.abs(h)))) if h.size else 1.0
    dev = hermitian_deviation(h)
    if dev > HERMITIAN_TOL * scale:
        raise NotHermitian(f"asymmetry {dev:.3e} exceeds tolerance")
    try:
        w, u = np.linalg.eigh((h + h.conj().T) / 2)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return SpectralCache(w, u)


def evolve(cache: SpectralCache, theta: float, v: np.ndarray) -> np.ndarray:
    """exp(-i theta H) v."""
    if theta == 0:
        if v.shape[0] != cache.dim:
            raise ValueError("dimension mismatch")
        return np.array(v, dtype=complex)
    return cache.apply_diagonal(np.exp(-1j * theta * cache.eigvals), v)


def phase_combination(
    cache: SpectralCache, terms: Sequence[tuple[complex, float]], v: np.ndarray
) -> np.ndarray:
    """sum_k coeff_k exp(-i theta_k H) v, combined in the eigenbasis.

    Summing the phases before transforming back keeps cancellations between
    nearly equal unitaries exact; two separate ``evolve`` calls would lose
    about ``eps_machine / theta`` relative accuracy.
    """
    d = np.zeros(cache.dim, dtype=complex)
    for coeff, theta in terms:
        d += coeff * np.exp(-1j * theta * cache.eigvals)
    return cache.apply_diagonal(d, v)


def apply_func(cache: SpectralCache, f: Callable[[np.ndarray], np.ndarray], v: np.ndarray) -> np.ndarray:
    fvals = np.asarray(f(cache.eigvals))
    if fvals.shape == ():
        fvals = np.full(cache.dim, fvals)
    if not np.all(np.isfinite(fvals)):
        raise NonFiniteFunction("function is not finite on the spectrum")
    return cache.apply_diagonal(fvals.astype(complex), v)
