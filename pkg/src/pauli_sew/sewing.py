"""Sew per-qubit learned observables into a 2n-qubit unitary close to ``C (x) C^dag``.

Register 1 is qubits ``0..n-1`` and register 2 is ``n..2n-1``.  Block ``i`` is
``W_i = 1/2 I + 1/2 sum_P O_{P_i} (x) P_{n+i}``, projected to the nearest unitary
on its support.  For ``order = [o_0, ..., o_{n-1}]`` the sewn unitary is
``SWAP^n W_{o_0} ... W_{o_{n-1}}``: the last listed block acts first.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import networkx as nx
import numpy as np

from .circuit import PAULIS, QacCircuit, to_unitary
from .estimator import EstimatorConfig
from .learner import LearnedObservable, learn_observable, learned_distance
from .linalg import apply_operator, embed_operator
from .metrics import avg_gate_fidelity_distance, frobenius_distance, project_to_unitary
from .spectrum import heisenberg_observable

PAULI_LETTERS = ("X", "Y", "Z")


@dataclass(frozen=True, eq=False)
class Block:
    """Block ``i`` as a local matrix on ``qubits`` (register-2 qubit ``n+i`` last)."""

    i: int
    n: int
    qubits: tuple[int, ...]
    raw: np.ndarray

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self.qubits)

    def full(self) -> np.ndarray:
        return embed_operator(self.raw, self.qubits, 2 * self.n)

    def projected(self) -> np.ndarray:
        """Nearest unitary to the local block; raises ``RankDeficientError``."""
        return project_to_unitary(self.raw)

    def projected_full(self) -> np.ndarray:
        return embed_operator(self.projected(), self.qubits, 2 * self.n)


def build_block(learned: dict[str, LearnedObservable] | Sequence[LearnedObservable], i: int, n: int) -> Block:
    """``1/2 I (x) I + 1/2 sum_P O_P (x) P_{n+i}`` on its support.

    ``learned`` maps each of X, Y, Z to its learned observable (a missing letter
    counts as the zero observable).
    """
    if not isinstance(learned, dict):
        learned = {obs.pauli: obs for obs in learned}
    union: set[int] = set()
    for letter, obs in learned.items():
        if obs.n != n:
            raise ValueError(f"learned observable for {letter} has {obs.n} qubits, expected {n}")
        union |= set(obs.support)
    reg1 = sorted(union)
    local = np.eye(1 << (len(reg1) + 1), dtype=complex) / 2
    for letter in PAULI_LETTERS:
        obs = learned.get(letter)
        if obs is None:
            continue
        local = local + np.kron(obs.local_matrix(reg1), PAULIS[letter]) / 2
    return Block(i, n, tuple(reg1) + (n + i,), local)


def swap_registers(matrix: np.ndarray, n: int) -> np.ndarray:
    """``SWAP^n @ matrix``: exchange qubit ``j`` with ``n + j`` for every ``j``."""
    r = np.arange(1 << (2 * n))
    low = (1 << n) - 1
    perm = ((r & low) << n) | (r >> n)
    return matrix[perm]


def swap_registers_unitary(n: int) -> np.ndarray:
    return swap_registers(np.eye(1 << (2 * n), dtype=complex), n)


def sew(blocks: Sequence[Block], order: Sequence[int] | None, n: int) -> np.ndarray:
    """``SWAP^n * prod_{i in order} P(W_i)`` with the last entry of ``order`` applied first."""
    by_index = {b.i: b for b in blocks}
    order = list(range(n)) if order is None else list(order)
    if sorted(order) != sorted(by_index):
        raise ValueError("order must be a permutation of the block indices")
    m = np.eye(1 << (2 * n), dtype=complex)
    for i in reversed(order):
        b = by_index[i]
        m = apply_operator(m, b.projected(), b.qubits, 2 * n)
    return swap_registers(m, n)


def sewing_error_bound(errors: Sequence[float]) -> float:
    errors = list(errors)
    if any(e < 0 for e in errors):
        raise ValueError("errors must be non-negative")
    return 0.5 * float(sum(errors))


def coloring_order(supports: Sequence[frozenset[int] | set[int]]) -> tuple[dict[int, int], list[list[int]]]:
    """Greedy largest-first coloring of the overlap graph; classes in increasing color."""
    g = nx.Graph()
    g.add_nodes_from(range(len(supports)))
    for i in range(len(supports)):
        for j in range(i + 1, len(supports)):
            if set(supports[i]) & set(supports[j]):
                g.add_edge(i, j)
    colors = nx.greedy_color(g, strategy="largest_first") if len(supports) else {}
    chi = max(colors.values(), default=-1) + 1
    classes = [sorted(i for i, c in colors.items() if c == k) for k in range(chi)]
    return dict(sorted(colors.items())), classes


def order_from_classes(classes: Sequence[Sequence[int]]) -> list[int]:
    return [i for cls in classes for i in cls]


@dataclass(frozen=True, eq=False)
class SewReport:
    n: int
    c_sew: np.ndarray
    blocks: list[Block]
    per_observable_errors: dict[tuple[int, str], float]
    bound: float
    measured_d_avg: float | None
    measured_d_f: float | None
    coloring: dict[int, int]
    classes: list[list[int]]
    order: list[int]
    learned: list[LearnedObservable] = field(default_factory=list)

    @property
    def chi(self) -> int:
        return len(self.classes)

    @property
    def schedule_depth(self) -> int:
        return self.chi

    def summary(self) -> dict:
        return {
            "n": self.n,
            "bound": self.bound,
            "measured_d_avg": self.measured_d_avg,
            "measured_d_f": self.measured_d_f,
            "chi": self.chi,
            "coloring": {str(k): v for k, v in self.coloring.items()},
            "order": self.order,
            "product_convention": "SWAP^n * W[order[0]] * ... * W[order[-1]] (last applied first)",
            "errors": {f"{p}{i}": e for (i, p), e in sorted(self.per_observable_errors.items())},
            "supports": {str(b.i): list(b.qubits) for b in self.blocks},
        }


def target_unitary(u: np.ndarray) -> np.ndarray:
    """``C (x) C^dag`` on the doubled register."""
    return np.kron(u, u.conj().T)


def sew_learned(learned: Sequence[LearnedObservable], n: int, order: Sequence[int] | None = None,
                reference: QacCircuit | None = None) -> SewReport:
    """Sew ``3n`` learned observables; measure against the reference circuit when given."""
    grouped: dict[int, dict[str, LearnedObservable]] = {i: {} for i in range(n)}
    for obs in learned:
        if obs.qubit is None or obs.pauli is None:
            raise ValueError("learned observables must record their qubit and Pauli")
        grouped[obs.qubit][obs.pauli] = obs
    blocks = [build_block(grouped[i], i, n) for i in range(n)]
    coloring, classes = coloring_order([b.support for b in blocks])
    order = order_from_classes(classes) if order is None else list(order)
    c_sew = sew(blocks, order, n)

    errors: dict[tuple[int, str], float] = {}
    d_avg = d_f = None
    if reference is not None:
        u = to_unitary(reference)
        for obs in learned:
            true = heisenberg_observable(reference, obs.pauli, obs.qubit, unitary=u)
            errors[(obs.qubit, obs.pauli)] = learned_distance(obs, true)
        target = target_unitary(u)
        d_avg = avg_gate_fidelity_distance(c_sew, target)
        d_f = frobenius_distance(c_sew, target)
    else:
        for obs in learned:
            errors[(obs.qubit, obs.pauli)] = float("nan") if obs.error_bound is None else obs.error_bound
    values = list(errors.values())
    bound = float("nan") if any(np.isnan(values)) else sewing_error_bound(values)
    return SewReport(n, c_sew, blocks, errors, bound, d_avg, d_f, coloring, classes, order, list(learned))


def learn_all(circuit: QacCircuit, config: EstimatorConfig) -> list[LearnedObservable]:
    u = to_unitary(circuit)
    out = []
    for i in range(circuit.n):
        for p in PAULI_LETTERS:
            obs = heisenberg_observable(circuit, p, i, unitary=u)
            out.append(learn_observable(circuit, p, i, config, obs=obs))
    return out


def end_to_end_learn(circuit: QacCircuit, ell: int, config: EstimatorConfig | None = None,
                     order: Sequence[int] | None = None) -> SewReport:
    """Learn all ``3n`` observables, sew them, and measure against ``C (x) C^dag``."""
    if circuit.a:
        raise ValueError("end-to-end learning expects an ancilla-free circuit")
    config = config or EstimatorConfig(mode="exact", ell=ell)
    if config.ell != ell:
        config = EstimatorConfig(config.mode, ell, config.eta, config.delta, config.seed, config.shots_override)
    learned = learn_all(circuit, config)
    return sew_learned(learned, circuit.n, order=order, reference=circuit)
