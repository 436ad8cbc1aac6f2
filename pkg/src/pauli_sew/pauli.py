"""Bit-packed Pauli strings, Pauli-basis decompositions and Pauli weights.

Qubit 0 is the most significant tensor factor everywhere in this package, so a
computational basis index ``r`` stores qubit ``q`` in bit ``n - 1 - q``.  The
X/Z masks of a :class:`PauliString` use the same bit positions, which lets the
masks act directly on basis indices.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Mapping

import numpy as np

from ._config import check_qubits

_LETTERS = "IXYZ"
# letter -> (x bit, z bit)
_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}

HERMITIAN_TOL = 1e-9
_I_POWERS = np.array([1, 1j, -1, -1j])


class NonHermitianError(ValueError):
    """Raised when real Pauli coefficients are requested for a non-Hermitian operator."""


class PartialTableWarning(UserWarning):
    """A weight was requested from a table that does not cover all Pauli strings."""


@dataclass(frozen=True)
class PauliString:
    """An n-qubit Pauli word stored as a pair of bit masks.

    Letter on qubit ``q`` is read from bit ``n - 1 - q`` of ``x`` and ``z``:
    (0,0) -> I, (1,0) -> X, (1,1) -> Y, (0,1) -> Z.
    """

    n: int
    x: int = 0
    z: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("qubit count must be non-negative")
        full = (1 << self.n) - 1
        if self.x & ~full or self.z & ~full:
            raise ValueError(f"masks exceed {self.n} qubits")

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        x = z = 0
        n = len(label)
        for q, ch in enumerate(label.upper()):
            try:
                xb, zb = _LETTER_BITS[ch]
            except KeyError:
                raise ValueError(f"invalid Pauli letter {ch!r} in {label!r}") from None
            bit = n - 1 - q
            x |= xb << bit
            z |= zb << bit
        return cls(n, x, z)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> "PauliString":
        """``letter`` on ``qubit`` and identity elsewhere."""
        if not 0 <= qubit < n:
            raise ValueError(f"qubit {qubit} out of range for n={n}")
        xb, zb = _LETTER_BITS[letter.upper()]
        bit = n - 1 - qubit
        return cls(n, xb << bit, zb << bit)

    def letter(self, qubit: int) -> str:
        bit = self.n - 1 - qubit
        xb = (self.x >> bit) & 1
        zb = (self.z >> bit) & 1
        return "IZXY"[2 * xb + zb]

    @property
    def label(self) -> str:
        return "".join(self.letter(q) for q in range(self.n))

    def __str__(self) -> str:
        return self.label

    def __repr__(self) -> str:
        return f"PauliString({self.label!r})"

    @property
    def mask(self) -> int:
        return self.x | self.z

    @property
    def degree(self) -> int:
        return self.mask.bit_count()

    @property
    def support(self) -> frozenset[int]:
        m = self.mask
        return frozenset(q for q in range(self.n) if (m >> (self.n - 1 - q)) & 1)

    @property
    def num_y(self) -> int:
        return (self.x & self.z).bit_count()

    def sort_key(self) -> tuple[int, ...]:
        """Lexicographic key with I < X < Y < Z and qubit 0 most significant."""
        return tuple(_LETTERS.index(self.letter(q)) for q in range(self.n))

    def commutes(self, other: "PauliString") -> bool:
        return ((self.x & other.z).bit_count() + (self.z & other.x).bit_count()) % 2 == 0

    def restrict(self, qubits: Iterable[int]) -> "PauliString":
        """Sub-string on ``qubits`` (in the given order) as a ``len(qubits)``-qubit word."""
        qubits = list(qubits)
        return PauliString.from_label("".join(self.letter(q) for q in qubits))

    def tensor(self, other: "PauliString") -> "PauliString":
        return PauliString(self.n + other.n, (self.x << other.n) | other.x, (self.z << other.n) | other.z)

    def matrix(self) -> np.ndarray:
        return pauli_matrix(self)


def _popcount_array(values: np.ndarray) -> np.ndarray:
    values = values.astype(np.int64)
    count = np.zeros_like(values)
    while np.any(values):
        count += values & 1
        values >>= 1
    return count


@lru_cache(maxsize=None)
def _popcounts(n: int) -> np.ndarray:
    return _popcount_array(np.arange(1 << n))


@lru_cache(maxsize=None)
def sign_matrix(n: int) -> np.ndarray:
    """``H[z, s] = (-1)^{popcount(z & s)}`` as a dense float array."""
    r = np.arange(1 << n)
    parity = _popcounts(n)[r[:, None] & r[None, :]] & 1
    out = 1.0 - 2.0 * parity
    out.setflags(write=False)
    return out


def pauli_matrix(p: PauliString) -> np.ndarray:
    """Dense ``2^n x 2^n`` matrix of a Pauli string."""
    check_qubits(p.n)
    dim = 1 << p.n
    s = np.arange(dim)
    phase = 1j ** (p.x & p.z).bit_count()
    signs = 1.0 - 2.0 * (_popcounts(p.n)[s & p.z] & 1)
    out = np.zeros((dim, dim), dtype=complex)
    out[s ^ p.x, s] = phase * signs
    return out


def _num_qubits(matrix: np.ndarray) -> int:
    dim = matrix.shape[0]
    if matrix.ndim != 2 or matrix.shape[1] != dim or dim & (dim - 1):
        raise ValueError(f"expected a 2^n x 2^n matrix, got shape {matrix.shape}")
    return dim.bit_length() - 1


def pauli_coefficient(matrix: np.ndarray, p: PauliString) -> complex:
    """``Tr(P M) / 2^n`` using the one-nonzero-per-row structure of ``P``."""
    n = _num_qubits(matrix)
    if p.n != n:
        raise ValueError(f"Pauli on {p.n} qubits does not match a {n}-qubit matrix")
    s = np.arange(1 << n)
    signs = 1.0 - 2.0 * (_popcounts(n)[s & p.z] & 1)
    total = np.dot(signs, matrix[s, s ^ p.x])
    return complex(1j ** (p.x & p.z).bit_count() * total / (1 << n))


def pauli_spectrum(matrix: np.ndarray) -> np.ndarray:
    """All ``4^n`` coefficients ``Tr(P M)/2^n`` as an array indexed ``[x_mask, z_mask]``."""
    n = _num_qubits(matrix)
    dim = 1 << n
    s = np.arange(dim)
    xs = np.arange(dim)
    # v[x, s] = M[s, s ^ x]
    v = matrix[s[None, :], s[None, :] ^ xs[:, None]]
    out = v @ sign_matrix(n).T
    phase = _I_POWERS[_popcounts(n)[xs[:, None] & xs[None, :]] % 4]
    return phase * out / dim


def real_spectrum(matrix: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    spec = pauli_spectrum(matrix)
    imag = np.max(np.abs(spec.imag)) if spec.size else 0.0
    if imag > tol:
        raise NonHermitianError(f"imaginary Pauli residue {imag:.3e} exceeds {tol:g}")
    return spec.real.copy()


def degree_grid(n: int) -> np.ndarray:
    """``deg[x, z] = popcount(x | z)``, aligned with :func:`pauli_spectrum`."""
    r = np.arange(1 << n)
    return _popcounts(n)[r[:, None] | r[None, :]]


def support_mask_grid(n: int) -> np.ndarray:
    r = np.arange(1 << n)
    return r[:, None] | r[None, :]


def qubits_to_mask(n: int, qubits: Iterable[int]) -> int:
    mask = 0
    for q in qubits:
        mask |= 1 << (n - 1 - q)
    return mask


@dataclass(frozen=True)
class CoefficientTable:
    """Sparse map from Pauli strings to coefficients.

    ``family`` is the set of strings the table claims to cover; ``None`` means
    every n-qubit string (missing keys are exact zeros).  Entries inside a
    finite family are stored even when zero, so "estimated as zero" and "never
    estimated" stay distinguishable.
    """

    n: int
    entries: Mapping[PauliString, float]
    accuracy: float = 0.0
    family: frozenset[PauliString] | None = None
    is_real: bool = True

    def __post_init__(self):
        for p in self.entries:
            if p.n != self.n:
                raise ValueError(f"entry {p} does not have {self.n} qubits")

    @property
    def complete(self) -> bool:
        return self.family is None

    def __getitem__(self, p: PauliString | str) -> float:
        if isinstance(p, str):
            p = PauliString.from_label(p)
        return self.entries.get(p, 0.0)

    def __len__(self) -> int:
        return len(self.entries)

    def items(self):
        return sorted(self.entries.items(), key=lambda kv: kv[0].sort_key())

    def covers(self, p: PauliString) -> bool:
        return self.family is None or p in self.family

    def total_weight(self) -> float:
        return float(sum(abs(v) ** 2 for v in self.entries.values()))

    def nonzero_support(self, tol: float = 0.0) -> frozenset[int]:
        out: set[int] = set()
        for p, v in self.entries.items():
            if abs(v) > tol:
                out |= p.support
        return frozenset(out)

    def to_dict(self) -> dict[str, float]:
        return {p.label: float(v) for p, v in self.items()}

    @classmethod
    def from_dict(cls, n: int, entries: Mapping[str, float], accuracy: float = 0.0,
                  complete: bool = False) -> "CoefficientTable":
        parsed = {PauliString.from_label(k): float(v) for k, v in entries.items()}
        family = None if complete else frozenset(parsed)
        return cls(n, parsed, accuracy=accuracy, family=family)

    @classmethod
    def from_spectrum(cls, spectrum: np.ndarray, zero_tol: float = 0.0) -> "CoefficientTable":
        """Complete table from a dense ``[x, z]`` spectrum, dropping exact (or tiny) zeros."""
        dim = spectrum.shape[0]
        n = dim.bit_length() - 1
        xs, zs = np.nonzero(np.abs(spectrum) > zero_tol)
        entries = {PauliString(n, int(x), int(z)): spectrum[x, z].item() for x, z in zip(xs, zs)}
        return cls(n, entries, is_real=not np.iscomplexobj(spectrum))


def decompose(matrix: np.ndarray, family: Iterable[PauliString] | None = None,
              real: bool = True, tol: float = HERMITIAN_TOL) -> CoefficientTable:
    """Pauli coefficients ``Tr(P M)/2^n`` for every ``P`` in ``family`` (all strings if None).

    With ``real=True`` the imaginary parts must vanish to ``tol``; pass
    ``real=False`` for non-Hermitian operators to keep complex coefficients.
    """
    n = _num_qubits(matrix)
    if family is None:
        spec = pauli_spectrum(matrix)
        if real:
            imag = np.max(np.abs(spec.imag))
            if imag > tol:
                raise NonHermitianError(f"imaginary Pauli residue {imag:.3e} exceeds {tol:g}")
            spec = spec.real
        return CoefficientTable.from_spectrum(spec)

    family = list(family)
    entries: dict[PauliString, complex | float] = {}
    for p in family:
        c = pauli_coefficient(matrix, p)
        if real:
            if abs(c.imag) > tol:
                raise NonHermitianError(f"coefficient of {p} has imaginary part {c.imag:.3e}")
            entries[p] = c.real
        else:
            entries[p] = c
    return CoefficientTable(n, entries, family=frozenset(family), is_real=real)


def reconstruct(table: CoefficientTable) -> np.ndarray:
    """``sum_P table[P] * P`` as a dense matrix."""
    check_qubits(table.n)
    dim = 1 << table.n
    out = np.zeros((dim, dim), dtype=complex)
    s = np.arange(dim)
    for p, c in table.entries.items():
        if c == 0:
            continue
        signs = 1.0 - 2.0 * (_popcounts(table.n)[s & p.z] & 1)
        out[s ^ p.x, s] += c * (1j ** (p.x & p.z).bit_count()) * signs
    return out


def operator_on_qubits(table: CoefficientTable, qubits: Iterable[int]) -> np.ndarray:
    """Dense operator of ``table`` on the ordered sub-register ``qubits``.

    Every entry must act trivially outside ``qubits``.
    """
    qubits = list(qubits)
    allowed = set(qubits)
    local: dict[PauliString, float] = {}
    for p, c in table.entries.items():
        if not p.support <= allowed:
            if c != 0:
                raise ValueError(f"entry {p} acts outside qubits {sorted(allowed)}")
            continue
        local[p.restrict(qubits)] = c
    return reconstruct(CoefficientTable(len(qubits), local, family=frozenset(local)))


def enumerate_low_degree(n: int, ell: int) -> list[PauliString]:
    """All n-qubit strings of degree <= ell, in lexicographic (I<X<Y<Z) order."""
    if not 0 <= ell <= n:
        raise ValueError(f"need 0 <= ell <= n, got ell={ell}, n={n}")
    out = []

    def rec(prefix: list[str], remaining: int):
        if len(prefix) == n:
            out.append(PauliString.from_label("".join(prefix)))
            return
        for ch in _LETTERS:
            if ch == "I":
                rec(prefix + [ch], remaining)
            elif remaining > 0:
                rec(prefix + [ch], remaining - 1)

    rec([], ell)
    return out


def low_degree_count(n: int, ell: int) -> int:
    return sum(3 ** k * math.comb(n, k) for k in range(ell + 1))


def enumerate_supports(n: int, ell: int) -> list[tuple[int, ...]]:
    """All ``ell``-subsets of ``range(n)`` in lexicographic order."""
    if not 0 <= ell <= n:
        raise ValueError(f"need 0 <= ell <= n, got ell={ell}, n={n}")
    return list(itertools.combinations(range(n), ell))


def paulis_on_support(n: int, support: Iterable[int]) -> list[PauliString]:
    """The ``4^|s|`` strings acting trivially outside ``support`` (identity included)."""
    support = sorted(set(support))
    if any(not 0 <= q < n for q in support):
        raise ValueError(f"support {support} out of range for n={n}")
    out = []
    for letters in itertools.product(_LETTERS, repeat=len(support)):
        word = ["I"] * n
        for q, ch in zip(support, letters):
            word[q] = ch
        out.append(PauliString.from_label("".join(word)))
    return out


def weight(table: CoefficientTable, selector: Callable[[PauliString], bool] | None = None,
           partial_ok: bool = False) -> float:
    """Sum of squared coefficients over strings satisfying ``selector`` (all if None)."""
    if not table.complete and not partial_ok:
        warnings.warn("weight requested from a table that does not cover every Pauli string; "
                      "unestimated strings count as zero", PartialTableWarning, stacklevel=2)
    return float(sum(abs(v) ** 2 for p, v in table.entries.items()
                     if selector is None or selector(p)))
