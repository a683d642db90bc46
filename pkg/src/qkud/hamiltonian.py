"""Pauli-sum Hamiltonians.

Words are big-endian: the leftmost character acts on qubit 0, which is the
most significant bit of a statevector index. This matches ``np.kron`` order,
so ``to_dense("XZ") == kron(X, Z)``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, TextIO

import numpy as np

DENSE_LIMIT = 12
DROP_TOL = 1e-15
HERMITIAN_COEFF_TOL = 1e-14
HERMITIAN_MATRIX_TOL = 1e-12

_PAULI_CHARS = frozenset("IXYZ")


class HamiltonianError(ValueError):
    pass


class MalformedLine(HamiltonianError):
    pass


class InconsistentWordLength(HamiltonianError):
    pass


class EmptyHamiltonian(HamiltonianError):
    pass


class DimensionTooLarge(HamiltonianError):
    pass


class NotHermitian(HamiltonianError):
    pass


@dataclass(frozen=True)
class PauliTerm:
    coeff: complex
    word: str


@dataclass(frozen=True)
class PauliSum:
    """Canonical weighted sum of Pauli words.

    Construct through :meth:`from_terms` to get merged, sorted terms; the
    plain constructor trusts its input.
    """

    n_qubits: int
    terms: tuple[PauliTerm, ...] = field(default_factory=tuple)

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[complex, str]], n_qubits: int | None = None) -> "PauliSum":
        merged: dict[str, complex] = {}
        for coeff, word in terms:
            word = word.strip().upper()
            if not word or set(word) - _PAULI_CHARS:
                raise MalformedLine(f"invalid Pauli word {word!r}")
            if n_qubits is None:
                n_qubits = len(word)
            elif len(word) != n_qubits:
                raise InconsistentWordLength(
                    f"word {word!r} has length {len(word)}, expected {n_qubits}"
                )
            merged[word] = merged.get(word, 0j) + complex(coeff)
        if n_qubits is None:
            raise EmptyHamiltonian("no terms given")
        kept = tuple(
            PauliTerm(c, w) for w, c in sorted(merged.items()) if abs(c) >= DROP_TOL
        )
        return cls(n_qubits, kept)

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def is_hermitian(self) -> bool:
        return all(abs(t.coeff.imag) <= HERMITIAN_COEFF_TOL for t in self.terms)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if other.n_qubits != self.n_qubits:
            raise InconsistentWordLength("cannot add sums over different qubit counts")
        pairs = [(t.coeff, t.word) for t in self.terms + other.terms]
        return PauliSum.from_terms(pairs, self.n_qubits)

    def scaled(self, factor: complex) -> "PauliSum":
        return PauliSum.from_terms(((factor * t.coeff, t.word) for t in self.terms), self.n_qubits)

    @cached_property
    def _compiled(self) -> list[tuple[np.ndarray, np.ndarray]]:
        # per term: (target index for each source index, coeff * phase per source index)
        idx = np.arange(self.dim, dtype=np.int64)
        out = []
        for term in self.terms:
            xmask = zmask = 0
            n_y = 0
            for q, ch in enumerate(term.word):
                bit = 1 << (self.n_qubits - 1 - q)
                if ch in "XY":
                    xmask |= bit
                if ch in "ZY":
                    zmask |= bit
                if ch == "Y":
                    n_y += 1
            # Y = i X Z, so the Z sign is taken on the source bit
            parity = np.zeros(self.dim, dtype=np.int64)
            masked = idx & zmask
            while np.any(masked):
                parity ^= masked & 1
                masked >>= 1
            weight = term.coeff * (1j ** n_y) * (1 - 2 * parity)
            out.append((idx ^ xmask, weight.astype(complex)))
        return out


def parse_pauli_file(text: str | TextIO) -> PauliSum:
    """Parse ``<real> <imag> <word>`` lines into a canonical PauliSum.

    ``#`` starts a comment; blank lines are skipped. Duplicate words are
    merged by adding coefficients.
    """
    if not isinstance(text, str):
        text = text.read()
    pairs = []
    n_qubits = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) != 3:
            raise MalformedLine(f"line {lineno}: expected 3 tokens, got {len(tokens)}")
        try:
            coeff = complex(float(tokens[0]), float(tokens[1]))
        except ValueError as exc:
            raise MalformedLine(f"line {lineno}: non-numeric coefficient") from exc
        word = tokens[2].upper()
        if set(word) - _PAULI_CHARS:
            raise MalformedLine(f"line {lineno}: invalid Pauli word {tokens[2]!r}")
        if n_qubits is None:
            n_qubits = len(word)
        elif len(word) != n_qubits:
            raise InconsistentWordLength(
                f"line {lineno}: word length {len(word)} differs from {n_qubits}"
            )
        pairs.append((coeff, word))
    if not pairs:
        raise EmptyHamiltonian("no terms found")
    return PauliSum.from_terms(pairs, n_qubits)


def serialize_pauli(h: PauliSum) -> str:
    buf = io.StringIO()
    for t in sorted(h.terms, key=lambda t: t.word):
        buf.write(f"{t.coeff.real!r} {t.coeff.imag!r} {t.word}\n")
    return buf.getvalue()


def _word(n: int, ops: dict[int, str]) -> str:
    return "".join(ops.get(q, "I") for q in range(n))


def build_tfim(n: int, J: float, h: float) -> PauliSum:
    """Open-chain transverse-field Ising model, -J sum Z_i Z_{i+1} - h sum X_i."""
    if n < 2:
        raise ValueError("tfim needs at least 2 sites")
    terms = [(-J, _word(n, {i: "Z", i + 1: "Z"})) for i in range(n - 1)]
    terms += [(-h, _word(n, {i: "X"})) for i in range(n)]
    return PauliSum.from_terms(terms, n)


def spin_orbital(site: int, spin: int) -> int:
    """Qubit index of (site, spin) with spin 0 = up, 1 = down."""
    return 2 * site + spin


def _hopping_terms(p: int, q: int, n: int, amplitude: float) -> list[tuple[complex, str]]:
    # a_p^dag a_q + h.c. = (X_p Z..Z X_q + Y_p Z..Z Y_q) / 2 for p < q
    p, q = min(p, q), max(p, q)
    string = {k: "Z" for k in range(p + 1, q)}
    return [
        (amplitude / 2, _word(n, {**string, p: "X", q: "X"})),
        (amplitude / 2, _word(n, {**string, p: "Y", q: "Y"})),
    ]


def build_hubbard_chain(n_sites: int, t: float, U: float) -> PauliSum:
    """Jordan-Wigner image of the open-chain Fermi-Hubbard model.

    Spin orbitals are ordered site-major, up before down. Occupied modes
    are |1>, so the number operator is (I - Z) / 2.
    """
    if n_sites < 2:
        raise ValueError("hubbard chain needs at least 2 sites")
    n = 2 * n_sites
    terms: list[tuple[complex, str]] = []
    for i in range(n_sites - 1):
        for s in (0, 1):
            terms += _hopping_terms(spin_orbital(i, s), spin_orbital(i + 1, s), n, -t)
    for i in range(n_sites):
        up, dn = spin_orbital(i, 0), spin_orbital(i, 1)
        terms += [
            (U / 4, "I" * n),
            (-U / 4, _word(n, {up: "Z"})),
            (-U / 4, _word(n, {dn: "Z"})),
            (U / 4, _word(n, {up: "Z", dn: "Z"})),
        ]
    return PauliSum.from_terms(terms, n)


def apply(h: PauliSum, v: np.ndarray) -> np.ndarray:
    """Return H v term by term, never forming the dense matrix.

    ``v`` may be a single vector or a ``(dim, k)`` block of column vectors.
    """
    v = np.asarray(v)
    if v.shape[0] != h.dim:
        raise ValueError(f"vector dimension {v.shape[0]} does not match 2**{h.n_qubits}")
    out = np.zeros(v.shape, dtype=complex)
    for target, weight in h._compiled:
        if v.ndim == 1:
            out[target] += weight * v
        else:
            out[target] += weight[:, None] * v
    return out


def to_dense(h: PauliSum, dense_limit: int = DENSE_LIMIT) -> np.ndarray:
    if h.n_qubits > dense_limit:
        raise DimensionTooLarge(f"{h.n_qubits} qubits exceeds dense limit {dense_limit}")
    mat = np.zeros((h.dim, h.dim), dtype=complex)
    cols = np.arange(h.dim)
    for target, weight in h._compiled:
        mat[target, cols] += weight
    asym = np.max(np.abs(mat - mat.conj().T)) if h.dim else 0.0
    if asym > HERMITIAN_MATRIX_TOL:
        raise NotHermitian(f"matrix asymmetry {asym:.3e} exceeds {HERMITIAN_MATRIX_TOL}")
    return (mat + mat.conj().T) / 2
