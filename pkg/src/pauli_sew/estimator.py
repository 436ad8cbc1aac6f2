"""Pauli-coefficient estimation for Heisenberg-evolved observables.

Sampled mode follows a prepare-and-measure access model: prepare a uniformly
random product eigenstate ``|q>`` of ``Q`` (eigenvalue ``lam_q``), run the
circuit, measure ``P_i``, and average ``lam_q * outcome``.  Since
``Q = sum_q lam_q |q><q|``, the mean is ``Tr(Q O) / 2^n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .circuit import QacCircuit
from .linalg import apply_operator
from .pauli import CoefficientTable, PauliString, _popcounts, enumerate_low_degree, low_degree_count
from .spectrum import Observable, heisenberg_observable

Mode = Literal["exact", "sampled"]
_PAULI_CODES = {"X": 1, "Y": 2, "Z": 3}

_S = 1 / np.sqrt(2)
# columns: +1 eigenstate, -1 eigenstate
EIGENBASES = {
    "I": np.eye(2, dtype=complex),
    "Z": np.eye(2, dtype=complex),
    "X": np.array([[_S, _S], [_S, -_S]], dtype=complex),
    "Y": np.array([[_S, _S], [1j * _S, -1j * _S]], dtype=complex),
}


@dataclass(frozen=True)
class EstimatorConfig:
    mode: Mode = "exact"
    ell: int = 2
    eta: float = 0.05
    delta: float = 0.05
    seed: int = 0
    shots_override: int | None = None

    def __post_init__(self):
        if self.mode not in ("exact", "sampled"):
            raise ValueError(f"mode must be 'exact' or 'sampled', got {self.mode!r}")
        if not 0 < self.eta <= 1:
            raise ValueError("eta must lie in (0, 1]")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.ell < 0:
            raise ValueError("ell must be non-negative")
        if self.shots_override is not None and self.shots_override < 1:
            raise ValueError("shots_override must be positive")

    def shots(self, n: int) -> int:
        if self.shots_override is not None:
            return self.shots_override
        return hoeffding_shots(self.eta, self.delta, low_degree_count(n, self.ell))


def sample_count(ell: int, eps: float, delta: float, n: int) -> int:
    """Shadow-tomography copy count ``ceil(3^ell / eps^2 * ln(n^ell / delta))``, constant 1."""
    if eps <= 0 or not 0 < delta < 1 or n < 1 or ell < 0:
        raise ValueError("need eps > 0, 0 < delta < 1, n >= 1, ell >= 0")
    return math.ceil(3 ** ell / eps ** 2 * math.log(n ** ell / delta))


def hoeffding_shots(eta: float, delta: float, family_size: int) -> int:
    """Shots per coefficient so all ``family_size`` means are within ``eta`` w.p. ``1 - delta``.

    Each shot is ``+-1`` (range 2); Hoeffding plus a union bound.
    """
    return math.ceil(2.0 / eta ** 2 * math.log(2.0 * family_size / delta))


def exact_coefficient(circuit: QacCircuit, pauli: str, qubit: int, q: PauliString,
                      obs: Observable | None = None) -> float:
    obs = obs or heisenberg_observable(circuit, pauli, qubit)
    return obs.coefficient(q)


def input_expectations(obs: Observable, q: PauliString) -> np.ndarray:
    """``<q|O|q>`` for every product eigenstate of ``Q``, indexed like basis states.

    Bit ``n-1-j`` of the index selects the -1 (bit set) or +1 eigenvector on qubit ``j``;
    identity qubits use the computational basis.
    """
    n = obs.n
    m = obs.matrix
    for j in range(n):
        if q.letter(j) in ("I", "Z"):
            continue
        b = EIGENBASES[q.letter(j)]
        m = apply_operator(m, b.conj().T, [j], n)
        m = apply_operator(m.conj().T, b.conj().T, [j], n).conj().T
    return np.real(np.diag(m))


def input_eigenvalues(q: PauliString) -> np.ndarray:
    r = np.arange(1 << q.n)
    return 1.0 - 2.0 * (_popcounts(q.n)[r & q.mask] & 1)


def coefficient_rng(seed: int, pauli: str, qubit: int, q: PauliString) -> np.random.Generator:
    """Independent stream per coefficient, so evaluation order never matters."""
    return np.random.default_rng(np.random.SeedSequence(
        [int(seed), int(qubit), _PAULI_CODES[pauli.upper()], q.x, q.z, q.n]))


def shot_values(obs: Observable, q: PauliString, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Per-shot products ``lam_q * outcome``, each exactly +1 or -1."""
    dim = 1 << obs.n
    e = input_expectations(obs, q)
    lam = input_eigenvalues(q)
    inputs = rng.integers(dim, size=shots)
    p_plus = np.clip((1.0 + e[inputs]) / 2.0, 0.0, 1.0)
    outcome = np.where(rng.random(shots) < p_plus, 1.0, -1.0)
    return lam[inputs] * outcome


def _sample_from_observable(obs: Observable, q: PauliString, shots: int, rng: np.random.Generator) -> float:
    # multinomial over inputs then binomial outcomes: same law as per-shot sampling
    dim = 1 << obs.n
    e = input_expectations(obs, q)
    lam = input_eigenvalues(q)
    counts = rng.multinomial(shots, np.full(dim, 1.0 / dim))
    plus = rng.binomial(counts, np.clip((1.0 + e) / 2.0, 0.0, 1.0))
    return float(np.dot(lam, 2 * plus - counts) / shots)


def sample_coefficient(circuit: QacCircuit, pauli: str, qubit: int, q: PauliString,
                       shots: int, seed: int = 0, obs: Observable | None = None) -> float:
    if shots < 1:
        raise ValueError("shots must be positive")
    obs = obs or heisenberg_observable(circuit, pauli, qubit)
    if q.n != obs.n:
        raise ValueError("Pauli string does not match the circuit register")
    return _sample_from_observable(obs, q, shots, coefficient_rng(seed, pauli, qubit, q))


def estimate_all_low_degree(circuit: QacCircuit, pauli: str, qubit: int,
                            config: EstimatorConfig, obs: Observable | None = None) -> CoefficientTable:
    """Table over every string of degree ``<= ell`` (zeros included)."""
    n = circuit.num_qubits
    if config.ell > n:
        raise ValueError(f"ell={config.ell} exceeds {n} qubits")
    obs = obs or heisenberg_observable(circuit, pauli, qubit)
    family = enumerate_low_degree(n, config.ell)
    if config.mode == "exact":
        entries = {q: obs.coefficient(q) for q in family}
        accuracy = 0.0
    else:
        shots = config.shots(n)
        entries = {q: _sample_from_observable(obs, q, shots, coefficient_rng(config.seed, pauli, qubit, q))
                   for q in family}
        accuracy = config.eta
    return CoefficientTable(n, entries, accuracy=accuracy, family=frozenset(family))
