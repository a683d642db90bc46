"""Hardware-style QKUD: binomial expansion of (X + X^dagger)^n and classical recombination.

Instead of holding Krylov vectors, a device measures primitives

    G(m, n; O) = <psi0| exp(i m eps H) O exp(i n eps H) |psi0>,   O in {H, 1}

and ``M``/``S`` are rebuilt from them with binomial weights and powers of
``i``. The recombination cancels almost everything at small ``eps``: an
order-6 block at ``eps = 0.05`` amplifies rounding in the primitives by about
``eps^-12 ~ 4e15`` on a unit-spectrum Hamiltonian. Primitives and the weighted
sums therefore live in a private mpmath context at ``WORK_DPS`` digits, and
the ``(2 eps)^-(j+k)`` prefactor is applied once per element after the
integer-weighted sum. Results are rounded to complex128 only at the end.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from . import hamiltonian as ham
from .geneig import PSD_TOL
from .krylov import ConvergenceRecord, KrylovConfig, Method, iterate, spectral_cache
from .linalg import SpectralCache, as_statevector, basis_state

MAX_ORDER = 30
WORK_DPS = 50
# leaves roughly 16 significant digits after the worst admissible cancellation
DEFAULT_MAX_CANCELLATION = 10.0 ** (WORK_DPS - 16)

_I_POW = (1, 1j, -1, -1j)
_MP = mpmath.MPContext()
_MP.dps = WORK_DPS


class MissingPrimitive(KeyError):
    pass


class PrecisionLoss(ArithmeticError):
    pass


class Observable(str, enum.Enum):
    HAMILTONIAN = "HAMILTONIAN"
    IDENTITY = "IDENTITY"


@dataclass(frozen=True)
class FrequencyCoefficient:
    """One term ``coeff * exp(-i freq eps H)`` of ``(X + X^dagger)^order``.

    The ``(2 eps)^-order`` prefactor is not included in ``coeff``.
    """

    freq: int
    coeff: complex
    order: int


def binomial_phase_coeffs(order: int) -> list[FrequencyCoefficient]:
    if order < 0 or order > MAX_ORDER:
        raise ValueError(f"order must lie in [0, {MAX_ORDER}]")
    return [
        FrequencyCoefficient(order - 2 * k, math.comb(order, k) * _I_POW[(order - 2 * k) % 4], order)
        for k in range(order + 1)
    ]


@dataclass(frozen=True, order=True)
class PrimitiveKey:
    m: int
    n: int
    obs: Observable

    def conjugate(self) -> "PrimitiveKey":
        return PrimitiveKey(-self.m, -self.n, self.obs)

    def canonical(self) -> tuple["PrimitiveKey", bool]:
        """Stored representative and whether the value must be conjugated."""
        if (self.m, self.n) >= (-self.m, -self.n):
            return self, False
        return self.conjugate(), True


def primitive_keys(max_order: int) -> list[PrimitiveKey]:
    """All ``(m, n, obs)`` with ``|m|, |n| <= max_order``, before deduplication."""
    r = range(-max_order, max_order + 1)
    return [PrimitiveKey(m, n, obs) for obs in Observable for m in r for n in r]


def _mpc(value):
    if isinstance(value, _MP.mpc):
        return value
    if isinstance(value, (_MP.mpf, str)):
        return _MP.mpc(value)
    value = complex(value)
    return _MP.mpc(value.real, value.imag)


def _fmt(x) -> str:
    # enough digits to round-trip the working precision
    return mpmath.libmp.to_str(x._mpf_, mpmath.libmp.repr_dps(_MP.prec))


@dataclass
class PrimitiveTable:
    """Measured primitives, stored once per conjugate pair.

    Missing partners are recovered through ``G(m, n) = conj(G(-m, -n))``,
    which holds because both observables commute with ``H``. Values are
    ``mpc`` numbers at ``WORK_DPS`` digits.
    """

    epsilon: float
    entries: dict[PrimitiveKey, mpmath.mpc] = field(default_factory=dict)
    noise_sigma: float = 0.0

    def __setitem__(self, key: PrimitiveKey, value) -> None:
        value = _mpc(value)
        if not _MP.isfinite(value):
            raise ValueError(f"non-finite primitive for {key}")
        ckey, conj = key.canonical()
        if ckey == ckey.conjugate():
            value = _MP.mpc(value.real)
        self.entries[ckey] = value.conjugate() if conj else value

    def __getitem__(self, key: PrimitiveKey) -> mpmath.mpc:
        ckey, conj = key.canonical()
        try:
            value = self.entries[ckey]
        except KeyError:
            raise MissingPrimitive(key) from None
        return value.conjugate() if conj else value

    def __contains__(self, key: PrimitiveKey) -> bool:
        return key.canonical()[0] in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def max_order(self) -> int:
        return max((max(abs(k.m), abs(k.n)) for k in self.entries), default=0)

    def to_json(self) -> str:
        """JSON document ``{epsilon, noise_sigma, entries: [{m, n, obs, re, im}]}``.

        Numbers are written with enough digits to round-trip the working
        precision; read them back with :meth:`from_json`.
        """
        rows = [
            '  {"m": %d, "n": %d, "obs": %s, "re": %s, "im": %s}'
            % (k.m, k.n, json.dumps(k.obs.value), _fmt(v.real), _fmt(v.imag))
            for k, v in sorted(self.entries.items())
        ]
        head = '{"epsilon": %s, "noise_sigma": %s, "entries": [' % (
            json.dumps(self.epsilon),
            json.dumps(self.noise_sigma),
        )
        return head + ("\n" + ",\n".join(rows) + "\n" if rows else "") + "]}\n"

    @classmethod
    def from_json(cls, text: str) -> "PrimitiveTable":
        doc = json.loads(text, parse_float=str, parse_int=str)
        table = cls(float(doc["epsilon"]), noise_sigma=float(doc.get("noise_sigma", 0.0)))
        for row in doc["entries"]:
            key = PrimitiveKey(int(row["m"]), int(row["n"]), Observable(row["obs"]))
            value = _MP.mpc(_MP.mpf(row["re"]), _MP.mpf(row["im"]))
            table[key] = value
        return table


def _spectral_weights(cache: SpectralCache, psi0: np.ndarray) -> list:
    c = cache.coords(psi0)
    return [_MP.mpf(float(x.real)) ** 2 + _MP.mpf(float(x.imag)) ** 2 for x in c]


def _spectrum(cache: SpectralCache) -> list:
    return [_MP.mpf(float(x)) for x in cache.eigvals]


def _primitive(weights, lam, total_freq: int, epsilon: float, obs: Observable) -> mpmath.mpc:
    phase = total_freq * _MP.mpf(epsilon)
    if obs is Observable.HAMILTONIAN:
        return _MP.mpc(_MP.fsum(w * x * _MP.expj(phase * x) for w, x in zip(weights, lam)))
    return _MP.mpc(_MP.fsum(w * _MP.expj(phase * x) for w, x in zip(weights, lam)))


def measure_primitive(
    key: PrimitiveKey,
    epsilon: float,
    cache: SpectralCache,
    psi0: np.ndarray,
    h: ham.PauliSum,
) -> mpmath.mpc:
    """Exact value of ``<psi0| e^{i m eps H} O e^{i n eps H} |psi0>``.

    Both unitaries and the observable are diagonal in the cached eigenbasis,
    where the value is ``sum_k |c_k|^2 O(lam_k) exp(i (m + n) eps lam_k)``.
    The sum is taken at ``WORK_DPS`` digits.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if h.dim != cache.dim:
        raise ValueError("Hamiltonian and spectral cache dimensions differ")
    psi0 = as_statevector(psi0, cache.dim)
    return _primitive(_spectral_weights(cache, psi0), _spectrum(cache), key.m + key.n, epsilon, key.obs)


def build_primitive_table(
    max_order: int,
    epsilon: float,
    cache: SpectralCache,
    psi0: np.ndarray,
    h: ham.PauliSum,
) -> PrimitiveTable:
    """Measure every canonical primitive with ``|m|, |n| <= max_order``."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if max_order < 0 or max_order > MAX_ORDER:
        raise ValueError(f"max_order must lie in [0, {MAX_ORDER}]")
    if h.dim != cache.dim:
        raise ValueError("Hamiltonian and spectral cache dimensions differ")
    psi0 = as_statevector(psi0, cache.dim)
    weights = _spectral_weights(cache, psi0)
    lam = _spectrum(cache)
    table = PrimitiveTable(epsilon)
    # the value depends on m + n only
    by_freq = {}
    for key in primitive_keys(max_order):
        ckey, _ = key.canonical()
        if ckey not in table.entries:
            f = (ckey.m + ckey.n, ckey.obs)
            if f not in by_freq:
                by_freq[f] = _primitive(weights, lam, f[0], epsilon, ckey.obs)
            table[ckey] = by_freq[f]
    return table


def _weights(order: int) -> np.ndarray:
    return np.array([_mpc(c.coeff) for c in binomial_phase_coeffs(order)], dtype=object)


def _block(table: PrimitiveTable, j: int, k: int, obs: Observable) -> np.ndarray:
    return np.array(
        [[table[PrimitiveKey(j - 2 * a, -(k - 2 * b), obs)] for b in range(k + 1)] for a in range(j + 1)],
        dtype=object,
    )


def _elements(max_order: int, epsilon: float, table: PrimitiveTable):
    dim = max_order + 1
    m = np.zeros((dim, dim), dtype=complex)
    s = np.zeros((dim, dim), dtype=complex)
    s_mag = np.zeros((dim, dim))
    two_eps = 2 * _MP.mpf(epsilon)
    for j in range(dim):
        wj = np.conj(_weights(j))
        for k in range(j, dim):
            wjk = np.outer(wj, _weights(k))
            pref = two_eps ** -(j + k)
            m_terms = wjk * _block(table, j, k, Observable.HAMILTONIAN)
            s_terms = wjk * _block(table, j, k, Observable.IDENTITY)
            m[j, k] = complex(pref * _MP.fsum(m_terms.flat))
            s[j, k] = complex(pref * _MP.fsum(s_terms.flat))
            s_mag[j, k] = float(pref * _MP.fsum(abs(t) for t in s_terms.flat))
            m[k, j] = m[j, k].conjugate()
            s[k, j] = s[j, k].conjugate()
            s_mag[k, j] = s_mag[j, k]
    return m, s, s_mag


def _checked(m, s, s_mag, max_cancellation):
    diag = np.sqrt(np.clip(np.real(np.diag(s)), 0.0, None))
    scale = np.outer(diag, diag)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(scale > 0, s_mag / scale, np.inf)
    worst = float(np.max(ratio))
    if worst > max_cancellation:
        raise PrecisionLoss(
            f"recombination amplifies rounding by {worst:.2e} (bound {max_cancellation:.2e}); "
            "increase epsilon or lower the order"
        )
    return (m + m.conj().T) / 2, (s + s.conj().T) / 2


def cancellation_ratio(max_order: int, epsilon: float, table: PrimitiveTable) -> float:
    """Worst rounding amplification of the recombination, ``sum|terms| / sqrt(S_jj S_kk)``."""
    _, s, s_mag = _elements(max_order, epsilon, table)
    diag = np.sqrt(np.clip(np.real(np.diag(s)), 0.0, None))
    scale = np.outer(diag, diag)
    with np.errstate(divide="ignore", invalid="ignore"):
        return float(np.max(np.where(scale > 0, s_mag / scale, np.inf)))


def assemble_matrices_lcu(
    max_order: int,
    epsilon: float,
    table: PrimitiveTable,
    max_cancellation: float = DEFAULT_MAX_CANCELLATION,
) -> tuple[np.ndarray, np.ndarray]:
    """Rebuild QKUD ``M`` and ``S`` over orders ``0..max_order`` from primitives.

    ``max_cancellation`` bounds :func:`cancellation_ratio`; beyond it the
    rounding in the primitives would swamp the result and
    :class:`PrecisionLoss` is raised instead.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if max_order < 0 or max_order > MAX_ORDER:
        raise ValueError(f"max_order must lie in [0, {MAX_ORDER}]")
    if not math.isclose(epsilon, table.epsilon, rel_tol=1e-15):
        raise ValueError(f"table was measured at epsilon={table.epsilon}, not {epsilon}")
    return _checked(*_elements(max_order, epsilon, table), max_cancellation)


def inject_shot_noise(table: PrimitiveTable, sigma: float, seed: int) -> PrimitiveTable:
    """Add i.i.d. Gaussian noise of width ``sigma`` to the real and imaginary part of each primitive."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        return PrimitiveTable(table.epsilon, dict(table.entries), table.noise_sigma)
    out = PrimitiveTable(table.epsilon, noise_sigma=float(np.hypot(table.noise_sigma, sigma)))
    rng = np.random.default_rng(seed)
    for key in sorted(table.entries):
        dre, dim_ = rng.normal(0.0, sigma, size=2)
        # assignment re-closes the table: self-conjugate keys stay real
        out[key] = table.entries[key] + _MP.mpc(float(dre), float(dim_))
    return out


def run_lcu(
    config: KrylovConfig,
    h: ham.PauliSum,
    psi0: np.ndarray | None = None,
    cache: SpectralCache | None = None,
    noise_sigma: float = 0.0,
    seed: int = 0,
    max_cancellation: float = DEFAULT_MAX_CANCELLATION,
) -> tuple[ConvergenceRecord, PrimitiveTable]:
    """QKUD solve driven purely by a primitive table.

    The table is measured once up to ``config.max_iter`` and optionally
    perturbed; iteration ``n`` recombines the leading ``(n+1) x (n+1)`` block.
    With noise, negative overlap eigenvalues are clipped rather than raised.
    """
    if Method(config.method) is not Method.QKUD:
        raise ValueError("the primitive path is only defined for QKUD")
    if not h.is_hermitian():
        raise ValueError("Hamiltonian has complex coefficients")
    if cache is None:
        cache = spectral_cache(h)
    if psi0 is None:
        psi0 = basis_state(h.dim, config.psi0_index)
    psi0 = as_statevector(psi0, h.dim)
    nrm = np.linalg.norm(psi0)
    if nrm == 0:
        raise ValueError("initial state is the zero vector")
    table = build_primitive_table(config.max_iter, config.epsilon, cache, psi0 / nrm, h)
    if noise_sigma > 0:
        table = inject_shot_noise(table, noise_sigma, seed)

    m_all, s_all, mag_all = _elements(config.max_iter, config.epsilon, table)

    def matrices_at(n):
        block = slice(0, n + 1)
        return _checked(m_all[block, block], s_all[block, block], mag_all[block, block], max_cancellation)

    # a noisy overlap is legitimately indefinite; clip instead of rejecting
    psd_tol = None if noise_sigma > 0 else PSD_TOL
    record, _ = iterate(matrices_at, config, e_exact=float(cache.eigvals[0]), psd_tol=psd_tol)
    return record, table
