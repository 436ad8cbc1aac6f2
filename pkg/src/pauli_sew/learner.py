"""Low-support truncation of an estimated low-degree coefficient table."""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .circuit import QacCircuit
from .estimator import EstimatorConfig, estimate_all_low_degree
from .linalg import reduce_operator
from .metrics import frobenius_distance
from .pauli import CoefficientTable, enumerate_supports, operator_on_qubits, reconstruct
from .spectrum import Observable

TIE_RTOL = 1e-12


@dataclass(frozen=True)
class LearnedObservable:
    table: CoefficientTable
    support: tuple[int, ...]
    eta: float
    error_bound: float | None = None
    pauli: str | None = None
    qubit: int | None = None

    def __post_init__(self):
        s = set(self.support)
        for p, v in self.table.entries.items():
            if v != 0 and not p.support <= s:
                raise ValueError(f"entry {p} lies outside support {self.support}")

    @property
    def n(self) -> int:
        return self.table.n

    def matrix(self) -> np.ndarray:
        return reconstruct(self.table)

    def local_matrix(self, qubits=None) -> np.ndarray:
        """Dense operator on ``qubits`` (default: the learned support)."""
        return operator_on_qubits(self.table, self.support if qubits is None else qubits)

    def to_dict(self) -> dict:
        return {"n": self.n, "pauli": self.pauli, "qubit": self.qubit,
                "support": list(self.support),
                "entries": {p.label: float(v) for p, v in self.table.items()},
                "eta": self.eta, "bound": self.error_bound}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "LearnedObservable":
        table = CoefficientTable.from_dict(int(data["n"]), data["entries"], accuracy=float(data["eta"]))
        return cls(table, tuple(data["support"]), float(data["eta"]), data.get("bound"),
                   data.get("pauli"), data.get("qubit"))


def support_weights(table: CoefficientTable, ell: int) -> dict[tuple[int, ...], float]:
    """``sum_{supp(Q) in s} table(Q)^2`` for every ``ell``-subset ``s``."""
    n = table.n
    if ell > n:
        raise ValueError(f"ell={ell} exceeds n={n}")
    supports = enumerate_supports(n, ell)
    masks = np.array([sum(1 << (n - 1 - q) for q in s) for s in supports], dtype=np.int64)
    w = np.zeros(len(supports))
    for p, v in table.entries.items():
        if v == 0:
            continue
        # Q contributes to every support containing supp(Q)
        w[(masks & p.mask) == p.mask] += abs(v) ** 2
    return dict(zip(supports, w.tolist()))


def max_weight_support(table: CoefficientTable, ell: int) -> tuple[int, ...]:
    """Heaviest ``ell``-subset; near-ties go to the lexicographically smallest set."""
    weights = support_weights(table, ell)
    top = max(weights.values())
    # supports come out in lexicographic order, so the first near-maximal one wins
    for s, w in weights.items():
        if w >= top - TIE_RTOL * max(top, 1.0):
            return s
    raise AssertionError("unreachable")


def truncate_to_support(table: CoefficientTable, support, eta: float | None = None) -> LearnedObservable:
    keep = frozenset(support)
    entries = {p: v for p, v in table.entries.items() if p.support <= keep}
    family = frozenset(entries) if table.family is not None else None
    out = CoefficientTable(table.n, entries, accuracy=table.accuracy, family=family)
    return LearnedObservable(out, tuple(sorted(keep)), table.accuracy if eta is None else eta)


def learning_error_bound(ell: int, eta: float, eps_star: float = 0.0) -> float:
    if ell < 0 or eta < 0 or eps_star < 0:
        raise ValueError("inputs must be non-negative")
    return 2.0 * 4 ** ell * eta ** 2 + eps_star


def proof_eta(n: int, ell: int, b: float = 2.0) -> float:
    """Accuracy with ``eta^2 = 1 / (n^b 4^ell)``."""
    return float(1.0 / np.sqrt(n ** b * 4 ** ell))


def learn_observable(circuit: QacCircuit, pauli: str, qubit: int, config: EstimatorConfig,
                     eps_star: float | None = None, obs: Observable | None = None) -> LearnedObservable:
    """Estimate degree-``ell`` coefficients, keep the heaviest ``ell``-support, zero the rest."""
    table = estimate_all_low_degree(circuit, pauli, qubit, config, obs=obs)
    support = max_weight_support(table, config.ell)
    learned = truncate_to_support(table, support, eta=config.eta if config.mode == "sampled" else 0.0)
    bound = None
    if eps_star is not None:
        bound = learning_error_bound(config.ell, learned.eta, eps_star)
    return LearnedObservable(learned.table, learned.support, learned.eta, bound, pauli.upper(), qubit)


def learned_distance(learned: LearnedObservable, obs: Observable) -> float:
    """``D_F`` between the learned and true observables, computed on their joint support."""
    qubits = sorted(set(learned.support) | obs.support)
    true_local = reduce_operator(obs.matrix, qubits, obs.n)
    return frobenius_distance(learned.local_matrix(qubits), true_local)


def truncation_residual(obs: Observable, ell: int, support) -> float:
    """Exact mass of ``O`` outside ``{Q : |Q| <= ell, supp(Q) in support}``."""
    keep = set(support)
    total = 0.0
    for p, v in obs.table.entries.items():
        if p.degree > ell or not p.support <= keep:
            total += v * v
    return total

