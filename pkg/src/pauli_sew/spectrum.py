"""Heisenberg-evolved observables ``C^dag P_i C`` and their Pauli spectra.

Includes large-CZ removal error, degree concentration curves, ancilla
restriction, and the single-output Choi matrix.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable

import numpy as np

from .circuit import QacCircuit, clean_ancilla_extract, light_cone, remove_large_cz, to_unitary
from .linalg import embed_operator, reduce_operator
from .metrics import frobenius_distance
from .pauli import (
    HERMITIAN_TOL,
    CoefficientTable,
    PauliString,
    _popcounts,
    degree_grid,
    pauli_matrix,
    pauli_spectrum,
    qubits_to_mask,
    real_spectrum,
    support_mask_grid,
)

SUPPORT_CHECK_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian operator on ``n`` qubits acting trivially outside ``support``."""

    n: int
    matrix: np.ndarray
    support: frozenset[int]

    def __post_init__(self):
        dim = 1 << self.n
        if self.matrix.shape != (dim, dim):
            raise ValueError(f"matrix shape {self.matrix.shape} does not match n={self.n}")
        herm = np.max(np.abs(self.matrix - self.matrix.conj().T))
        if herm > HERMITIAN_TOL:
            raise ValueError(f"observable is not Hermitian (deviation {herm:.2e})")
        object.__setattr__(self, "support", frozenset(self.support))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, support: Iterable[int] | None = None) -> "Observable":
        n = matrix.shape[0].bit_length() - 1
        return cls(n, matrix, frozenset(range(n)) if support is None else frozenset(support))

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(sorted(self.support))

    @cached_property
    def local_matrix(self) -> np.ndarray:
        """The factor on ``support`` (sorted); ``matrix = local (x) I``."""
        return reduce_operator(self.matrix, self.qubits, self.n)

    @cached_property
    def local_spectrum(self) -> np.ndarray:
        """Real Pauli coefficients on the support register, indexed ``[x, z]``."""
        return real_spectrum(self.local_matrix)

    @cached_property
    def full_spectrum(self) -> np.ndarray:
        """Real coefficients over every n-qubit string; dense, ``4^n`` entries."""
        return real_spectrum(self.matrix)

    def _lift(self, local_mask: np.ndarray) -> np.ndarray:
        k = len(self.qubits)
        out = np.zeros_like(local_mask)
        for j, q in enumerate(self.qubits):
            out |= ((local_mask >> (k - 1 - j)) & 1) << (self.n - 1 - q)
        return out

    @cached_property
    def table(self) -> CoefficientTable:
        """Complete table of nonzero coefficients."""
        spec = self.local_spectrum
        xs, zs = np.nonzero(spec)
        gx, gz = self._lift(xs), self._lift(zs)
        entries = {PauliString(self.n, int(x), int(z)): float(spec[a, b])
                   for x, z, a, b in zip(gx, gz, xs, zs)}
        return CoefficientTable(self.n, entries)

    def coefficient(self, q: PauliString) -> float:
        if q.n != self.n:
            raise ValueError("qubit count mismatch")
        if not q.support <= self.support:
            return 0.0
        lq = q.restrict(self.qubits)
        return float(self.local_spectrum[lq.x, lq.z])

    def total_weight(self) -> float:
        return float(np.sum(self.local_spectrum ** 2))


def _check_confined(matrix: np.ndarray, support: Iterable[int], n: int) -> float:
    support = sorted(support)
    rebuilt = embed_operator(reduce_operator(matrix, support, n), support, n)
    return frobenius_distance(matrix, rebuilt)


def heisenberg_observable(circuit: QacCircuit, pauli: str, qubit: int,
                          unitary: np.ndarray | None = None) -> Observable:
    """``C^dag P_qubit C`` on all ``n + a`` qubits, supported on the light-cone of ``qubit``."""
    pauli = pauli.upper()
    if pauli not in ("X", "Y", "Z"):
        raise ValueError(f"expected X, Y or Z, got {pauli!r}")
    total = circuit.num_qubits
    u = to_unitary(circuit) if unitary is None else unitary
    p = PauliString.single(total, qubit, pauli)
    # P is a signed permutation, so P @ U is a row shuffle
    o = u.conj().T @ (pauli_matrix(p) @ u)
    o = (o + o.conj().T) / 2
    cone = light_cone(circuit, qubit)
    residual = _check_confined(o, cone, total)
    if residual > SUPPORT_CHECK_TOL:
        raise RuntimeError(f"observable leaks outside its light-cone (mass {residual:.3e})")
    return Observable(total, o, cone)


def weight_above_degree(obs: Observable, k: int) -> float:
    spec = obs.local_spectrum
    deg = degree_grid(len(obs.qubits))
    return float(np.sum(spec[deg > k] ** 2))


def weight_outside_support(obs: Observable, qubits: Iterable[int]) -> float:
    """Mass on strings acting non-trivially on some qubit outside ``qubits``."""
    keep = set(qubits)
    local_keep = [j for j, q in enumerate(obs.qubits) if q in keep]
    k = len(obs.qubits)
    mask = qubits_to_mask(k, local_keep)
    grid = support_mask_grid(k)
    spec = obs.local_spectrum
    return float(np.sum(spec[(grid & ~mask) != 0] ** 2))


@dataclass(frozen=True, eq=False)
class RemovalResult:
    measured: float
    bound: float
    m: int
    observable: Observable
    truncated: Observable

    def __iter__(self):
        yield self.measured
        yield self.bound


def removal_bound(m: int, kappa: int) -> float:
    return 9.0 * m * m / 2.0 ** kappa


def removal_error(circuit: QacCircuit, kappa: int, pauli: str, qubit: int) -> RemovalResult:
    """Measured ``D_F(O, O*)`` after dropping CZ gates wider than ``kappa``, with ``9 m^2 / 2^kappa``."""
    pruned, m = remove_large_cz(circuit, kappa)
    o = heisenberg_observable(circuit, pauli, qubit)
    o_star = heisenberg_observable(pruned, pauli, qubit)
    measured = frobenius_distance(o.matrix, o_star.matrix)
    return RemovalResult(measured, removal_bound(m, kappa), m, o, o_star)


def advisory_concentration_bound(s: int, d: int, k: int) -> float:
    """``s^2 2^{-k^{1/d}}`` with constant 1; for plotting only."""
    if s == 0 or d == 0:
        return 0.0
    return float(s * s * 2.0 ** (-(k ** (1.0 / d))))


def concentration_curve(circuit: QacCircuit, pauli: str, qubit: int,
                        obs: Observable | None = None) -> list[tuple[int, float, float]]:
    """Rows ``(k, W^{>k}, advisory bound)`` for ``k = 0..n+a``."""
    obs = obs or heisenberg_observable(circuit, pauli, qubit)
    k_sup = len(obs.qubits)
    spec2 = obs.local_spectrum ** 2
    deg = degree_grid(k_sup)
    per_degree = np.bincount(deg.ravel(), weights=spec2.ravel(), minlength=k_sup + 1)
    # tail sums of per-degree mass give W^{>k}
    rows = []
    for k in range(circuit.num_qubits + 1):
        tail = float(per_degree[k + 1:].sum()) if k < k_sup else 0.0
        rows.append((k, tail, advisory_concentration_bound(circuit.size, circuit.depth, k)))
    return rows


def ancilla_block_indices(n: int, a: int) -> np.ndarray:
    return np.arange(1 << n) << a


def ancilla_restrict(obs: Observable, a: int) -> Observable:
    """``(I (x) <0^a|) O (I (x) |0^a>)`` with ancillas as the last ``a`` qubits."""
    if a < 1:
        raise ValueError("need at least one ancilla")
    n = obs.n - a
    idx = ancilla_block_indices(n, a)
    block = obs.matrix[np.ix_(idx, idx)]
    return Observable(n, block, frozenset(q for q in obs.support if q < n))


def ancilla_coefficient_discrepancy(obs: Observable, a: int) -> float:
    """Max over n-qubit ``S`` of ``|R(S) - sum_{T in {I,Z}^a} O(S (x) T)|``."""
    n = obs.n - a
    restricted = ancilla_restrict(obs, a)
    full = obs.full_spectrum.reshape(1 << n, 1 << a, 1 << n, 1 << a)
    summed = full[:, 0, :, :].sum(axis=-1)
    return float(np.max(np.abs(restricted.full_spectrum - summed)))


def _selector_grid(n: int, selector: Callable[[PauliString], bool] | Iterable[PauliString] | None) -> np.ndarray:
    dim = 1 << n
    if selector is None:
        return np.ones((dim, dim), dtype=bool)
    grid = np.zeros((dim, dim), dtype=bool)
    if callable(selector):
        for x in range(dim):
            for z in range(dim):
                grid[x, z] = bool(selector(PauliString(n, x, z)))
    else:
        for p in selector:
            if p.n != n:
                raise ValueError("selector strings must be n-qubit")
            grid[p.x, p.z] = True
    return grid


@dataclass(frozen=True)
class AncillaWeightCheck:
    lhs: float
    rhs: float
    rhs_iz: float
    a: int

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + 1e-9


def ancilla_weight_check(circuit: QacCircuit, selector=None, pauli: str = "Z",
                         qubit: int = 0) -> AncillaWeightCheck:
    """Compare ``W^{in S}`` of the restricted observable with ``2^a`` times the unrestricted weight.

    ``rhs`` sums over ``S (x) P^a`` (every ancilla string); ``rhs_iz`` over
    ``S (x) {I,Z}^a``, which is never larger and still bounds ``lhs``.
    """
    n, a = circuit.n, circuit.a
    if not 0 <= qubit < n:
        raise ValueError("the measured qubit must be computational")
    if a > 0:
        clean_ancilla_extract(circuit)
    obs = heisenberg_observable(circuit, pauli, qubit)
    grid = _selector_grid(n, selector)
    if a == 0:
        w = float(np.sum(obs.full_spectrum[grid] ** 2))
        return AncillaWeightCheck(w, w, w, 0)
    restricted = ancilla_restrict(obs, a)
    lhs = float(np.sum(restricted.full_spectrum[grid] ** 2))
    full2 = (obs.full_spectrum ** 2).reshape(1 << n, 1 << a, 1 << n, 1 << a)
    per_s = full2.sum(axis=(1, 3))
    per_s_iz = full2[:, 0, :, :].sum(axis=-1)
    factor = 2.0 ** a
    return AncillaWeightCheck(lhs, factor * float(per_s[grid].sum()),
                              factor * float(per_s_iz[grid].sum()), a)


def choi_single_output(circuit: QacCircuit) -> np.ndarray:
    """Choi matrix of ``rho -> Tr_{0..n-2}(C rho C^dag)``, keeping the last computational qubit.

    Input register first, output qubit last: ``Phi = sum_{x,y} |x><y| (x) E(|x><y|)``.
    """
    if circuit.a:
        raise ValueError("Choi matrix is defined for ancilla-free circuits")
    n = circuit.n
    u = to_unitary(circuit).reshape(1 << (n - 1), 2, 1 << n)
    k = u.transpose(2, 1, 0).reshape(1 << (n + 1), 1 << (n - 1))
    return k @ k.conj().T


def verify_choi_heisenberg(circuit: QacCircuit, pauli: str) -> float:
    """Max over n-qubit ``Q`` of ``|O(Q) - 2 (-1)^{#Y(Q)} Phi(Q (x) P)|`` for the output qubit."""
    n = circuit.n
    obs = heisenberg_observable(circuit, pauli, n - 1)
    phi_spec = pauli_spectrum(choi_single_output(circuit))
    p = PauliString.single(1, 0, pauli)
    dim = 1 << n
    r = np.arange(dim)
    xq, zq = np.meshgrid(r, r, indexing="ij")
    vals = phi_spec[(xq << 1) | p.x, (zq << 1) | p.z]
    ny = _popcounts(n)[xq & zq]
    predicted = 2.0 * np.where(ny % 2, -1.0, 1.0) * vals
    return float(np.max(np.abs(obs.full_spectrum - predicted)))
