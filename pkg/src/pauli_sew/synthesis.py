"""Compile sewn blocks into explicit shallow circuits by brute-force net search.

A block on ``l`` register-1 qubits plus one register-2 qubit is matched against
candidates ``L^dag S L``, where ``S`` swaps the target qubit with the
register-2 qubit and ``L`` runs over circuits with a fixed CZ architecture and
single-qubit gates drawn from an Euler-angle net.  Gates of ``L`` outside the
backward light-cone of the target qubit cancel in ``L^dag S L`` and are not
enumerated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Sequence

import numpy as np

from .circuit import H, CircuitBuilder, MultiCZ, QacCircuit, SingleQubitGate, cz_diagonal, to_unitary
from .linalg import embed_operator
from .metrics import frobenius_distance, phase_invariant_distance
from .sewing import Block, SewReport, order_from_classes, swap_registers

MAX_ELL = 4
MAX_D = 2
DEFAULT_MAX_CANDIDATES = 5_000_000
DEFAULT_CHUNK_ELEMENTS = 1 << 22


class CapExceededError(ValueError):
    """Requested architecture space is beyond the brute-force limits."""


class SearchBudgetExceeded(RuntimeError):
    """Candidate count exceeds the configured budget."""


class ColoringConflict(ValueError):
    """Two blocks of the same color overlap."""


@dataclass(frozen=True)
class Architecture:
    ell: int
    d: int
    layers: tuple[tuple[tuple[int, ...], ...], ...]

    def __post_init__(self):
        if len(self.layers) != self.d:
            raise ValueError("layer count must equal d")
        for layer in self.layers:
            used: set[int] = set()
            for gate in layer:
                if used & set(gate) or any(not 0 <= q < self.ell for q in gate) or len(gate) < 2:
                    raise ValueError(f"invalid layer {layer}")
                used |= set(gate)

    @property
    def gate_count(self) -> int:
        return sum(len(layer) for layer in self.layers)

    def slots(self, target: int) -> list[tuple[int, int]]:
        """``(sq-layer index, qubit)`` pairs inside the backward light-cone of ``target``."""
        cone = {target}
        out = [(self.d, target)]
        for t in range(self.d - 1, -1, -1):
            for gate in self.layers[t]:
                if cone & set(gate):
                    cone |= set(gate)
            out.extend((t, q) for q in sorted(cone))
        return sorted(out)


def _layer_families(ell: int, kappa: int) -> list[tuple[tuple[int, ...], ...]]:
    out: list[tuple[tuple[int, ...], ...]] = []

    def rec(free: list[int], acc: list[tuple[int, ...]]):
        if not free:
            out.append(tuple(acc))
            return
        first, rest = free[0], free[1:]
        rec(rest, acc)
        for size in range(1, min(kappa, len(free))):
            for partners in combinations(rest, size):
                remaining = [q for q in rest if q not in partners]
                rec(remaining, acc + [(first,) + partners])

    rec(list(range(ell)), [])
    return sorted(out, key=lambda fam: (len(fam), fam))


def check_caps(ell: int, d: int, kappa: int) -> None:
    if ell > MAX_ELL or d > MAX_D:
        raise CapExceededError(f"brute force is capped at ell <= {MAX_ELL}, d <= {MAX_D}")
    if ell >= 2 and not 2 <= kappa <= ell:
        raise CapExceededError(f"kappa must lie in [2, ell], got {kappa}")
    if ell < 1 or d < 0:
        raise ValueError("need ell >= 1 and d >= 0")


def enumerate_architectures(ell: int, d: int, kappa: int) -> list[Architecture]:
    """Every d-tuple of per-layer disjoint CZ families with widths in ``[2, kappa]``."""
    check_caps(ell, d, kappa)
    fams = _layer_families(ell, kappa) if ell >= 2 else [()]
    return [Architecture(ell, d, layers) for layers in product(fams, repeat=d)]


def rz(a: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * a), np.exp(0.5j * a)])


def ry(b: float) -> np.ndarray:
    c, s = math.cos(b / 2), math.sin(b / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def euler_step(eps: float) -> float:
    """Grid step for which every SU(2) element lies within phase-invariant distance ``eps``."""
    return 4.0 * math.acos(max(-1.0, 1.0 - eps / 2.0)) / 3.0


def _phase_key(u: np.ndarray) -> bytes:
    flat = u.reshape(-1)
    k = int(np.argmax(np.abs(flat) > 1e-9))
    v = flat * (abs(flat[k]) / flat[k])
    return np.round(v, 9).tobytes()


def su2_net(eps: float) -> np.ndarray:
    """ZYZ Euler grid anchored at zero angles, deduplicated up to global phase.

    With step ``h`` each angle is within ``h/2`` of the grid, so the rotation
    angle to the nearest point is at most ``3h/2`` and ``2 - |Tr U^dag V| <= eps``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    h = euler_step(eps)
    n_az = max(1, math.ceil(2 * math.pi / h))
    n_pol = math.ceil(math.pi / h) + 1
    az = 2 * math.pi * np.arange(n_az) / n_az
    pol = np.linspace(0.0, math.pi, n_pol)
    seen: dict[bytes, np.ndarray] = {}
    for b in pol:
        for a in az:
            for g in az:
                u = rz(a) @ ry(b) @ rz(g)
                seen.setdefault(_phase_key(u), u)
    return np.array(list(seen.values()))


def nearest_net_point(u: np.ndarray, net: np.ndarray) -> tuple[int, float]:
    overlaps = np.abs(np.einsum("kab,ab->k", net.conj(), u))
    k = int(np.argmax(overlaps))
    return k, float(2.0 - overlaps[k])


def swap_permutation(ell: int, target: int) -> np.ndarray:
    """Basis permutation of the swap between local qubit ``target`` and the last qubit."""
    total = ell + 1
    r = np.arange(1 << total)
    tb = total - 1 - target
    bit_t = (r >> tb) & 1
    bit_l = r & 1
    return r ^ ((bit_t ^ bit_l) << tb) ^ (bit_t ^ bit_l)


def _apply_1q_batch(mats: np.ndarray, gates: np.ndarray, qubit: int, ell: int) -> np.ndarray:
    b, dim, _ = mats.shape
    t = mats.reshape((b,) + (2,) * ell + (dim,))
    t = np.moveaxis(t, 1 + qubit, 1)
    t = np.einsum("kij,kj...->ki...", gates, t)
    t = np.moveaxis(t, 1, 1 + qubit)
    return t.reshape(b, dim, dim)


@dataclass(frozen=True, eq=False)
class NetCircuit:
    """``L`` on ``ell`` local qubits: sq layer 0, CZ layer 1, ..., sq layer d."""

    architecture: Architecture
    gates: dict[tuple[int, int], np.ndarray]
    target: int
    distance: float
    candidates: int = 0

    def circuit(self) -> QacCircuit:
        arch = self.architecture
        b = CircuitBuilder(arch.ell)
        for t in range(arch.d + 1):
            for q in range(arch.ell):
                if (t, q) in self.gates:
                    b.sq(q, self.gates[(t, q)])
            b.barrier()
            if t < arch.d:
                for gate in arch.layers[t]:
                    b.cz(*gate)
                b.barrier()
        return b.build()

    def block_unitary(self) -> np.ndarray:
        """``(L^dag (x) I) S (L (x) I)`` on ``ell + 1`` qubits."""
        lx = np.kron(to_unitary(self.circuit()), np.eye(2))
        perm = swap_permutation(self.architecture.ell, self.target)
        return lx.conj().T @ lx[perm]


def count_candidates(ell: int, d: int, kappa: int, net_size: int, target: int = 0) -> int:
    return sum(net_size ** len(a.slots(target)) for a in enumerate_architectures(ell, d, kappa))


def nearest_net_circuit(w: np.ndarray, ell: int, d: int, kappa: int, eps: float, target: int = 0,
                        net: np.ndarray | None = None, max_candidates: int = DEFAULT_MAX_CANDIDATES,
                        chunk_elements: int = DEFAULT_CHUNK_ELEMENTS) -> NetCircuit:
    """Exhaustive argmin of ``D_F(W, L^dag S L)``; ties go to the first candidate enumerated.

    ``W`` lives on ``ell + 1`` qubits with the register-2 qubit last; ``target``
    is the local register-1 qubit swapped with it.
    """
    check_caps(ell, d, kappa)
    dim_total = 1 << (ell + 1)
    if w.shape != (dim_total, dim_total):
        raise ValueError(f"W must be {dim_total}x{dim_total} for ell={ell}")
    if not 0 <= target < ell:
        raise ValueError("target must be a register-1 qubit")
    net = su2_net(eps) if net is None else net
    archs = enumerate_architectures(ell, d, kappa)
    total = sum(len(net) ** len(a.slots(target)) for a in archs)
    if total > max_candidates:
        raise SearchBudgetExceeded(f"{total} candidates exceed the budget of {max_candidates}")

    dim = 1 << ell
    perm = swap_permutation(ell, target)
    w_dag = w.conj().T
    w_norm = float(np.vdot(w, w).real)
    chunk = max(1, chunk_elements // (dim_total * dim_total))
    best = (math.inf, None, None)
    for arch in archs:
        slots = arch.slots(target)
        shape = [len(net)] * len(slots)
        count = int(np.prod(shape)) if slots else 1
        cz_diags = []
        for layer in arch.layers:
            v = np.ones(dim)
            for gate in layer:
                v = v * cz_diagonal(gate, ell)
            cz_diags.append(v)
        for start in range(0, count, chunk):
            stop = min(count, start + chunk)
            idx = np.unravel_index(np.arange(start, stop), shape) if slots else ()
            mats = np.broadcast_to(np.eye(dim, dtype=complex), (stop - start, dim, dim)).copy()
            for t in range(arch.d + 1):
                for s_pos, (layer, q) in enumerate(slots):
                    if layer == t:
                        mats = _apply_1q_batch(mats, net[idx[s_pos]], q, ell)
                if t < arch.d:
                    mats = cz_diags[t][None, :, None] * mats
            lx = np.einsum("kab,cd->kacbd", mats, np.eye(2)).reshape(-1, dim_total, dim_total)
            overlap = np.einsum("kab,kab->k", lx @ w_dag, lx[:, perm, :].conj()).real
            # ||W - V||^2 = ||W||^2 + dim - 2 Re Tr(W^dag V)
            dist = (w_norm + dim_total - 2.0 * overlap) / dim_total
            k = int(np.argmin(dist))
            if dist[k] < best[0]:
                choice = tuple(int(i[k]) for i in idx) if slots else ()
                best = (float(dist[k]), arch, choice)
    value, arch, choice = best
    gates = {slot: net[c] for slot, c in zip(arch.slots(target), choice)}
    return NetCircuit(arch, gates, target, max(0.0, value), total)


@dataclass(frozen=True, eq=False)
class CompiledBlock:
    """``L``, then the ``(i, n+i)`` swap as three CZs, then ``L^dag``, on global qubits."""

    i: int
    n: int
    qubits: tuple[int, ...]
    net_circuit: NetCircuit
    distance: float
    sq_layers: list[dict[int, np.ndarray]]
    cz_layers: list[list[tuple[int, ...]]]

    @property
    def depth(self) -> int:
        return len(self.cz_layers)

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self.qubits)

    def circuit(self) -> QacCircuit:
        return _layers_to_circuit(2 * self.n, self.sq_layers, self.cz_layers)

    def local_unitary(self) -> np.ndarray:
        return self.net_circuit.block_unitary()


def _layers_to_circuit(num_qubits: int, sq_layers, cz_layers) -> QacCircuit:
    layers = []
    for t, sq in enumerate(sq_layers):
        if sq:
            layers.append(tuple(SingleQubitGate(q, u) for q, u in sorted(sq.items())))
        if t < len(cz_layers) and cz_layers[t]:
            layers.append(tuple(MultiCZ(g) for g in cz_layers[t]))
    return QacCircuit(num_qubits, 0, tuple(layers))


def _merge(first: dict[int, np.ndarray], then: dict[int, np.ndarray]) -> dict[int, np.ndarray]:
    """Single-qubit layer ``then`` applied after ``first``."""
    out = dict(first)
    for q, u in then.items():
        out[q] = u @ out[q] if q in out else u
    return out


def _compact(sq_layers: list[dict[int, np.ndarray]], cz_layers: list[list[tuple[int, ...]]]):
    """Drop empty CZ layers, multiplying the neighbouring single-qubit layers together."""
    out_sq = [dict(sq_layers[0])]
    out_cz: list[list[tuple[int, ...]]] = []
    for t, cz in enumerate(cz_layers):
        nxt = sq_layers[t + 1]
        if cz:
            out_cz.append(list(cz))
            out_sq.append(dict(nxt))
        else:
            out_sq[-1] = _merge(out_sq[-1], nxt)
    return out_sq, out_cz


def compile_block(block: Block, d: int, kappa: int, eps: float, net: np.ndarray | None = None,
                  max_candidates: int = DEFAULT_MAX_CANDIDATES) -> CompiledBlock:
    """Net-search the projected block and lay it out on the 2n-qubit register."""
    n, i = block.n, block.i
    reg1 = list(block.qubits[:-1])
    w = block.projected()
    if i not in reg1:
        # the target qubit must be in register 1 for the swap form; extend trivially
        new_reg1 = sorted(reg1 + [i])
        positions = [new_reg1.index(q) for q in reg1] + [len(new_reg1)]
        w = embed_operator(w, positions, len(new_reg1) + 1)
        reg1 = new_reg1
    ell = len(reg1)
    target = reg1.index(i)
    kap = min(kappa, ell) if ell >= 2 else 2
    found = nearest_net_circuit(w, ell, d, kap, eps, target=target, net=net, max_candidates=max_candidates)

    glob = {j: q for j, q in enumerate(reg1)}
    a, b = i, n + i
    arch = found.architecture
    l_sq = [{glob[q]: u for (t, q), u in found.gates.items() if t == layer} for layer in range(arch.d + 1)]
    l_cz = [[tuple(glob[q] for q in g) for g in layer] for layer in arch.layers]
    # L^dag: layers reversed, gates adjoint
    dag_sq = [{q: u.conj().T for q, u in layer.items()} for layer in reversed(l_sq)]
    dag_cz = list(reversed(l_cz))
    # SWAP(a, b) = CX(a->b) CX(b->a) CX(a->b), with CX(c->t) = H_t CZ H_t
    swap_sq = [{b: H}, {a: H, b: H}, {a: H, b: H}, {b: H}]
    sq = [dict(layer) for layer in l_sq[:-1]] + [_merge(l_sq[-1], swap_sq[0])]
    cz = [list(layer) for layer in l_cz]
    for k in range(3):
        cz.append([(a, b)])
        sq.append(dict(swap_sq[k + 1]))
    sq[-1] = _merge(sq[-1], dag_sq[0])
    sq.extend(dag_sq[1:])
    cz.extend(dag_cz)
    sq, cz = _compact(sq, cz)
    return CompiledBlock(i, n, tuple(reg1) + (n + i,), found, found.distance, sq, cz)


@dataclass(frozen=True, eq=False)
class Schedule:
    circuit: QacCircuit
    block_section_depth: int
    swap_depth: int
    chi: int
    max_block_depth: int

    @property
    def depth(self) -> int:
        return self.circuit.depth


def swap_all_layers(n: int) -> tuple[list[dict[int, np.ndarray]], list[list[tuple[int, ...]]]]:
    """``SWAP^n`` as three parallel CZ layers with Hadamard conjugations."""
    lo = list(range(n))
    hi = [n + j for j in lo]
    sq = [{q: H for q in hi}, {q: H for q in lo + hi}, {q: H for q in lo + hi}, {q: H for q in hi}]
    cz = [[(j, n + j) for j in lo] for _ in range(3)]
    return sq, cz


def synthesize_schedule(blocks: Sequence[CompiledBlock], classes: Sequence[Sequence[int]]) -> Schedule:
    """Blocks of one color share layers; colors run last-to-first, then ``SWAP^n``.

    The emitted unitary equals ``SWAP^n`` times the compiled blocks multiplied
    in the order given by concatenating ``classes`` (last block acts first).
    """
    by_index = {b.i: b for b in blocks}
    if not blocks:
        raise ValueError("no blocks to schedule")
    n = blocks[0].n
    listed = [i for cls in classes for i in cls]
    if sorted(listed) != sorted(by_index):
        raise ValueError("classes must partition the block indices")
    sq_all: list[dict[int, np.ndarray]] = [{}]
    cz_all: list[list[tuple[int, ...]]] = []
    section_depth = 0
    for cls in reversed(classes):
        members = [by_index[i] for i in cls]
        used: set[int] = set()
        for m in members:
            if used & m.support:
                raise ColoringConflict(f"blocks in class {list(cls)} overlap")
            used |= m.support
        depth = max(m.depth for m in members)
        section_depth += depth
        for m in members:
            sq_all[-1] = _merge(sq_all[-1], m.sq_layers[0])
        for t in range(depth):
            layer_cz: list[tuple[int, ...]] = []
            layer_sq: dict[int, np.ndarray] = {}
            for m in members:
                if t < m.depth:
                    layer_cz.extend(m.cz_layers[t])
                    layer_sq.update(m.sq_layers[t + 1])
            cz_all.append(layer_cz)
            sq_all.append(layer_sq)
    swap_sq, swap_cz = swap_all_layers(n)
    sq_all[-1] = _merge(sq_all[-1], swap_sq[0])
    cz_all.extend(swap_cz)
    sq_all.extend(dict(s) for s in swap_sq[1:])
    circuit = _layers_to_circuit(2 * n, sq_all, cz_all)
    return Schedule(circuit, section_depth, 3, len(classes), max(b.depth for b in blocks))


def compiled_product(blocks: Sequence[CompiledBlock], order: Sequence[int]) -> np.ndarray:
    """``SWAP^n * prod_{i in order}`` of the compiled block unitaries (last applied first)."""
    by_index = {b.i: b for b in blocks}
    n = blocks[0].n
    m = np.eye(1 << (2 * n), dtype=complex)
    for i in reversed(list(order)):
        b = by_index[i]
        m = embed_operator(b.local_unitary(), b.qubits, 2 * n) @ m
    return swap_registers(m, n)


@dataclass(frozen=True, eq=False)
class SynthesisResult:
    schedule: Schedule
    blocks: list[CompiledBlock]
    block_errors: dict[int, float]
    d_f_vs_sewn: float
    hybrid_bound: float
    schedule_vs_product: float
    extra: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "depth": self.schedule.depth,
            "block_section_depth": self.schedule.block_section_depth,
            "swap_depth": self.schedule.swap_depth,
            "chi": self.schedule.chi,
            "max_block_depth": self.schedule.max_block_depth,
            "block_errors": {str(k): v for k, v in sorted(self.block_errors.items())},
            "d_f_vs_sewn": self.d_f_vs_sewn,
            "hybrid_bound": self.hybrid_bound,
            "schedule_vs_product": self.schedule_vs_product,
        }


def synthesize(report: SewReport, d: int = 1, kappa: int = 2, eps: float = 0.75,
               max_candidates: int = DEFAULT_MAX_CANDIDATES) -> SynthesisResult:
    """Compile every block of a sewing report and schedule them by color."""
    net = su2_net(eps)
    compiled = [compile_block(b, d, kappa, eps, net=net, max_candidates=max_candidates) for b in report.blocks]
    schedule = synthesize_schedule(compiled, report.classes)
    order = order_from_classes(report.classes)
    product_u = compiled_product(compiled, order)
    emitted = to_unitary(schedule.circuit)
    errors = {b.i: b.distance for b in compiled}
    return SynthesisResult(
        schedule, compiled, errors,
        d_f_vs_sewn=frobenius_distance(emitted, report.c_sew),
        hybrid_bound=report.n * max(errors.values()),
        schedule_vs_product=frobenius_distance(emitted, product_u),
        extra={"phase_invariant_vs_sewn": phase_invariant_distance(emitted, report.c_sew)},
    )
