"""Layered circuits of single-qubit gates and multi-qubit CZ gates.

A :class:`QacCircuit` is a list of layers applied first-to-last; every layer
holds gates on pairwise-disjoint qubits.  Computational qubits are
``0..n-1`` and ancillas ``n..n+a-1``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from ._config import check_qubits
from .linalg import apply_operator, haar_unitary, is_unitary
from .pauli import CoefficientTable, PauliString

UNITARY_TOL = 1e-9

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PAULIS = {"I": np.eye(2, dtype=complex), "X": X, "Y": Y, "Z": Z}


class NotCleanError(ValueError):
    """The ancilla register is not returned to |0...0>."""

    def __init__(self, residual: float, tol: float):
        super().__init__(f"ancilla residual {residual:.3e} exceeds tolerance {tol:g}")
        self.residual = residual


@dataclass(frozen=True, eq=False)
class SingleQubitGate:
    qubit: int
    u: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=complex)
        if u.shape != (2, 2) or not is_unitary(u, UNITARY_TOL):
            raise ValueError(f"gate on qubit {self.qubit} is not a 2x2 unitary")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.qubit,)

    def adjoint(self) -> "SingleQubitGate":
        return SingleQubitGate(self.qubit, self.u.conj().T)

    def __eq__(self, other):
        return (isinstance(other, SingleQubitGate) and self.qubit == other.qubit
                and np.array_equal(self.u, other.u))

    def __hash__(self):
        return hash((self.qubit, self.u.tobytes()))


@dataclass(frozen=True)
class MultiCZ:
    qubits: tuple[int, ...]

    def __post_init__(self):
        qs = tuple(sorted(int(q) for q in self.qubits))
        if len(qs) < 2:
            raise ValueError("a multi-qubit CZ needs at least two qubits")
        if len(set(qs)) != len(qs):
            raise ValueError(f"repeated qubit in CZ {qs}")
        object.__setattr__(self, "qubits", qs)

    @property
    def width(self) -> int:
        return len(self.qubits)

    def adjoint(self) -> "MultiCZ":
        return self


Gate = Union[SingleQubitGate, MultiCZ]


@dataclass(frozen=True)
class QacCircuit:
    n: int
    a: int = 0
    layers: tuple[tuple[Gate, ...], ...] = ()

    def __post_init__(self):
        layers = tuple(tuple(layer) for layer in self.layers)
        total = self.n + self.a
        for t, layer in enumerate(layers):
            seen: set[int] = set()
            for g in layer:
                if any(not 0 <= q < total for q in g.qubits):
                    raise ValueError(f"gate {g} in layer {t} is out of range")
                if seen & set(g.qubits):
                    raise ValueError(f"overlapping gates in layer {t}")
                seen |= set(g.qubits)
        object.__setattr__(self, "layers", layers)

    @property
    def num_qubits(self) -> int:
        return self.n + self.a

    @property
    def gates(self) -> list[Gate]:
        return [g for layer in self.layers for g in layer]

    @property
    def size(self) -> int:
        """Number of multi-qubit CZ gates."""
        return sum(isinstance(g, MultiCZ) for g in self.gates)

    @property
    def depth(self) -> int:
        """Number of layers holding at least one multi-qubit CZ."""
        return sum(any(isinstance(g, MultiCZ) for g in layer) for layer in self.layers)

    @property
    def cz_widths(self) -> list[int]:
        return [g.width for g in self.gates if isinstance(g, MultiCZ)]

    def adjoint(self) -> "QacCircuit":
        layers = tuple(tuple(g.adjoint() for g in layer) for layer in reversed(self.layers))
        return QacCircuit(self.n, self.a, layers)

    def then(self, other: "QacCircuit") -> "QacCircuit":
        """``other`` applied after ``self``."""
        if (other.n, other.a) != (self.n, self.a):
            raise ValueError("register mismatch")
        return QacCircuit(self.n, self.a, self.layers + other.layers)

    def to_dict(self) -> dict:
        layers = []
        for layer in self.layers:
            out = []
            for g in layer:
                if isinstance(g, MultiCZ):
                    out.append({"type": "cz", "qs": list(g.qubits)})
                else:
                    u = [[float(v.real), float(v.imag)] for v in g.u.reshape(-1)]
                    out.append({"type": "sq", "q": g.qubit, "u": u})
            layers.append(out)
        return {"n": self.n, "a": self.a, "layers": layers}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "QacCircuit":
        layers = []
        for layer in data["layers"]:
            gates: list[Gate] = []
            for g in layer:
                if g["type"] == "cz":
                    gates.append(MultiCZ(tuple(g["qs"])))
                elif g["type"] == "sq":
                    u = np.array([complex(re, im) for re, im in g["u"]]).reshape(2, 2)
                    gates.append(SingleQubitGate(int(g["q"]), u))
                else:
                    raise ValueError(f"unknown gate type {g['type']!r}")
            layers.append(tuple(gates))
        return cls(int(data["n"]), int(data.get("a", 0)), tuple(layers))

    @classmethod
    def from_json(cls, text: str) -> "QacCircuit":
        return cls.from_dict(json.loads(text))


class CircuitBuilder:
    """Appends gates in time order, placing each as early as its qubits allow.

    Gates never move past an earlier gate on a shared qubit, so the built
    circuit has the same unitary as the append sequence.
    """

    def __init__(self, n: int, a: int = 0):
        self.n, self.a = n, a
        self._layers: list[list[Gate]] = []
        self._frontier = [0] * (n + a)

    def add(self, gate: Gate) -> "CircuitBuilder":
        t = max(self._frontier[q] for q in gate.qubits)
        while len(self._layers) <= t:
            self._layers.append([])
        self._layers[t].append(gate)
        for q in gate.qubits:
            self._frontier[q] = t + 1
        return self

    def sq(self, qubit: int, u: np.ndarray) -> "CircuitBuilder":
        return self.add(SingleQubitGate(qubit, u))

    def cz(self, *qubits: int) -> "CircuitBuilder":
        return self.add(MultiCZ(tuple(qubits)))

    def barrier(self) -> "CircuitBuilder":
        top = max(self._frontier, default=0)
        self._frontier = [top] * len(self._frontier)
        return self

    def extend(self, circuit: QacCircuit) -> "CircuitBuilder":
        for g in circuit.gates:
            self.add(g)
        return self

    def build(self) -> QacCircuit:
        return QacCircuit(self.n, self.a, tuple(tuple(layer) for layer in self._layers))


def cz_diagonal(qubits: Iterable[int], num_qubits: int) -> np.ndarray:
    r = np.arange(1 << num_qubits)
    mask = 0
    for q in qubits:
        mask |= 1 << (num_qubits - 1 - q)
    return np.where((r & mask) == mask, -1.0, 1.0)


def apply_gate(states: np.ndarray, gate: Gate, num_qubits: int) -> np.ndarray:
    if isinstance(gate, MultiCZ):
        diag = cz_diagonal(gate.qubits, num_qubits)
        return diag[:, None] * states if states.ndim == 2 else diag * states
    return apply_operator(states, gate.u, [gate.qubit], num_qubits)


def apply_circuit(circuit: QacCircuit, states: np.ndarray) -> np.ndarray:
    """Evolve state vector(s) (columns) through the circuit."""
    check_qubits(circuit.num_qubits)
    out = np.array(states, dtype=complex)
    for layer in circuit.layers:
        for g in layer:
            out = apply_gate(out, g, circuit.num_qubits)
    return out


def to_unitary(circuit: QacCircuit) -> np.ndarray:
    """Dense unitary; the first layer is the rightmost factor."""
    check_qubits(circuit.num_qubits)
    return apply_circuit(circuit, np.eye(1 << circuit.num_qubits, dtype=complex))


def czk_unitary(k: int) -> np.ndarray:
    return np.diag(cz_diagonal(range(k), k)).astype(complex)


def czk_pauli_coefficients(k: int) -> CoefficientTable:
    """Closed-form Pauli coefficients of the k-qubit CZ gate over {I, Z}^k."""
    if k < 1:
        raise ValueError("k must be at least 1")
    c = 2.0 ** (-k + 1)
    entries: dict[PauliString, float] = {}
    for z in range(1 << k):
        deg = z.bit_count()
        if deg == 0:
            value = 1.0 - c
        elif deg % 2:
            value = c
        else:
            value = -c
        entries[PauliString(k, 0, z)] = value
    return CoefficientTable(k, entries)


def remove_large_cz(circuit: QacCircuit, kappa: int) -> tuple[QacCircuit, int]:
    """Drop every CZ wider than ``kappa``; returns the pruned circuit and the count removed."""
    if kappa < 2:
        raise ValueError("kappa must be at least 2")
    removed = 0
    layers = []
    for layer in circuit.layers:
        kept = []
        for g in layer:
            if isinstance(g, MultiCZ) and g.width > kappa:
                removed += 1
            else:
                kept.append(g)
        layers.append(tuple(kept))
    return QacCircuit(circuit.n, circuit.a, tuple(layers)), removed


def light_cone(circuit: QacCircuit, qubit: int) -> frozenset[int]:
    """Qubits in the backward light-cone of ``qubit`` measured after the circuit."""
    if not 0 <= qubit < circuit.num_qubits:
        raise ValueError(f"qubit {qubit} out of range")
    cone = {qubit}
    for layer in reversed(circuit.layers):
        for g in layer:
            if cone.intersection(g.qubits):
                cone.update(g.qubits)
    return frozenset(cone)


def random_su2(rng: np.random.Generator) -> np.ndarray:
    return haar_unitary(2, rng)


def random_circuit(n: int, d: int, kappa_max: int, gate_density: float = 0.5,
                   seed: int | np.random.Generator = 0, a: int = 0,
                   min_width: int = 2) -> QacCircuit:
    """Alternating Haar single-qubit layers and ``d`` CZ layers.

    Each CZ layer shuffles the qubits and, walking the shuffled order, opens a
    gate with probability ``gate_density`` whose width is uniform in
    ``[min_width, kappa_max]`` (clipped to the qubits left).
    """
    total = n + a
    if kappa_max > total:
        raise ValueError(f"kappa_max={kappa_max} exceeds {total} qubits")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    b = CircuitBuilder(n, a)

    def su2_layer():
        for q in range(total):
            b.sq(q, random_su2(rng))
        b.barrier()

    su2_layer()
    for _ in range(d):
        order = rng.permutation(total)
        pos = 0
        while pos < total:
            left = total - pos
            if kappa_max >= min_width and left >= min_width and rng.random() < gate_density:
                width = int(rng.integers(min_width, min(kappa_max, left) + 1))
                b.cz(*(int(q) for q in order[pos:pos + width]))
                pos += width
            else:
                pos += 1
        b.barrier()
        su2_layer()
    return b.build()


def build_grover_phase(x: str | Sequence[int]) -> QacCircuit:
    """X-conjugated full-width CZ: phase -1 on |x> and +1 on every other basis state.

    For a single qubit the full-width CZ degenerates to a Z gate.
    """
    bits = [int(c) for c in x]
    n = len(bits)
    if n < 1:
        raise ValueError("x must have at least one bit")
    flips = [q for q, bit in enumerate(bits) if bit == 0]
    b = CircuitBuilder(n)
    for q in flips:
        b.sq(q, X)
    if n == 1:
        b.sq(0, Z)
    else:
        b.cz(*range(n))
    for q in flips:
        b.sq(q, X)
    return b.build()


def clean_ancilla_extract(circuit: QacCircuit, tol: float = 1e-8) -> np.ndarray:
    """The n-qubit unitary ``A`` with ``C (I (x) |0^a>) = A (x) |0^a>``.

    Raises :class:`NotCleanError` when the columns leak out of the ancilla-zero block.
    """
    u = to_unitary(circuit)
    if circuit.a == 0:
        return u
    cols = np.arange(1 << circuit.n) << circuit.a
    block = u[:, cols]
    kept = block[cols, :]
    leak = np.delete(block, cols, axis=0)
    residual = float(np.linalg.norm(leak))
    if residual > tol:
        raise NotCleanError(residual, tol)
    return kept


def random_clean_circuit(n: int, a: int, seed: int = 0, dressed: bool = True,
                         diagonal_gates: int | None = None) -> QacCircuit:
    """Compute-uncompute circuit ``V G V`` that provably returns the ancillas to |0>.

    ``V`` copies computational qubit ``j`` onto ancilla ``n+j`` with a CX built
    from ``H``-conjugated CZ; ``G`` is a random diagonal circuit of CZ gates and
    Z-rotations over all qubits.  With ``dressed`` the whole block is wrapped
    in Haar layers on the computational qubits, which keeps it clean.
    """
    if a > n:
        raise ValueError("each ancilla copies one computational qubit, so a <= n")
    rng = np.random.default_rng(seed)
    total = n + a
    if a == 0:
        return random_circuit(n, 1, min(n, 3) if n >= 2 else 1, 0.7, rng)
    b = CircuitBuilder(n, a)

    def dress():
        for q in range(n):
            b.sq(q, random_su2(rng))
        b.barrier()

    def copy():
        for j in range(a):
            b.sq(n + j, H)
        for j in range(a):
            b.cz(j, n + j)
        for j in range(a):
            b.sq(n + j, H)
        b.barrier()

    if dressed:
        dress()
    copy()
    count = diagonal_gates if diagonal_gates is not None else int(rng.integers(1, 2 * total + 1))
    for _ in range(count):
        if rng.random() < 0.5 and total >= 2:
            width = int(rng.integers(2, total + 1))
            b.cz(*(int(q) for q in rng.choice(total, size=width, replace=False)))
        else:
            theta = rng.uniform(0, 2 * np.pi)
            b.sq(int(rng.integers(total)), np.diag([1.0, np.exp(1j * theta)]))
    b.barrier()
    copy()
    if dressed:
        dress()
    return b.build()
