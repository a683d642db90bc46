"""Regularized generalized eigenproblem M c = E S c by canonical orthogonalization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_THRESHOLD = 1e-12
PSD_TOL = 1e-12


class GevpFailure(np.linalg.LinAlgError):
    pass


class EmptyRetainedSubspace(GevpFailure):
    pass


class NotPSD(GevpFailure):
    pass


@dataclass(frozen=True)
class RegularizedSolution:
    eigvals: np.ndarray
    eigvecs: np.ndarray
    kept_dim: int
    discarded: int
    cond_s: float

    @property
    def lowest(self) -> float:
        return float(self.eigvals[0])


def solve_gevp(
    m: np.ndarray,
    s: np.ndarray,
    threshold: float = DEFAULT_THRESHOLD,
    psd_tol: float | None = PSD_TOL,
) -> RegularizedSolution:
    """Solve ``M c = E S c`` after discarding near-null overlap directions.

    Overlap eigenvalues below ``threshold * sigma_max`` are dropped. The kept
    directions are whitened with ``W = V diag(sigma^-1/2)`` and the standard
    problem ``W^dagger M W`` is diagonalized. Eigenvectors are returned in
    the original (non-orthogonal) basis.

    Raises
    ------
    NotPSD
        If ``S`` has an eigenvalue below ``-psd_tol * max(1, sigma_max)``.
        Pass ``psd_tol=None`` for overlaps known to carry noise; negative
        eigenvalues are then clipped and discarded like any other.
    EmptyRetainedSubspace
        If no direction survives the threshold.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    m = np.asarray(m, dtype=complex)
    s = np.asarray(s, dtype=complex)
    if m.shape != s.shape or m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"M and S must be square with equal shape, got {m.shape} and {s.shape}")
    n = m.shape[0]
    m = (m + m.conj().T) / 2
    s = (s + s.conj().T) / 2
    sigma, v = np.linalg.eigh(s)
    sigma_max = float(sigma[-1]) if n else 0.0
    if n and psd_tol is not None and sigma[0] < -psd_tol * max(1.0, sigma_max):
        raise NotPSD(f"overlap eigenvalue {sigma[0]:.3e} is negative")
    sigma = np.clip(sigma, 0.0, None)
    keep = sigma > threshold * sigma_max if sigma_max > 0 else np.zeros(n, dtype=bool)
    if not np.any(keep):
        raise EmptyRetainedSubspace("every overlap eigenvalue is below the threshold")
    sk = sigma[keep]
    w = v[:, keep] / np.sqrt(sk)
    hw = w.conj().T @ m @ w
    e, y = np.linalg.eigh((hw + hw.conj().T) / 2)
    kept = int(keep.sum())
    return RegularizedSolution(
        eigvals=e,
        eigvecs=w @ y,
        kept_dim=kept,
        discarded=n - kept,
        cond_s=float(sk.max() / sk.min()),
    )
