"""Small dense tensor helpers shared by the simulator and the sewing code."""
from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.stats import unitary_group

from ._config import check_qubits


def apply_operator(states: np.ndarray, op: np.ndarray, qubits: Sequence[int], num_qubits: int) -> np.ndarray:
    """Left-multiply ``states`` (shape ``(2^N,)`` or ``(2^N, cols)``) by ``op`` acting on ``qubits``.

    ``op`` is ``2^k x 2^k`` with ``qubits[0]`` as its most significant factor.
    """
    qubits = list(qubits)
    k = len(qubits)
    vector = states.ndim == 1
    cols = 1 if vector else states.shape[1]
    t = states.reshape([2] * num_qubits + [cols])
    g = op.reshape([2] * (2 * k))
    out = np.tensordot(g, t, axes=(list(range(k, 2 * k)), qubits))
    out = np.moveaxis(out, list(range(k)), qubits)
    out = out.reshape(1 << num_qubits, cols)
    return out[:, 0] if vector else out


def embed_operator(op: np.ndarray, qubits: Sequence[int], num_qubits: int) -> np.ndarray:
    """``op`` on ``qubits`` tensored with identity on the rest, as a dense matrix."""
    check_qubits(num_qubits)
    eye = np.eye(1 << num_qubits, dtype=complex)
    return apply_operator(eye, op, qubits, num_qubits)


def reduce_operator(matrix: np.ndarray, qubits: Sequence[int], num_qubits: int) -> np.ndarray:
    """Normalized partial trace ``Tr_rest(M) / 2^{N-k}`` onto the ordered ``qubits``."""
    qubits = list(qubits)
    rest = [q for q in range(num_qubits) if q not in qubits]
    k = len(qubits)
    t = matrix.reshape([2] * (2 * num_qubits))
    order = qubits + rest
    t = t.transpose(order + [num_qubits + q for q in order])
    t = t.reshape(1 << k, 1 << len(rest), 1 << k, 1 << len(rest))
    return np.einsum("arbr->ab", t) / (1 << len(rest))


def permute_qubits(matrix: np.ndarray, perm: Sequence[int], num_qubits: int) -> np.ndarray:
    """Relabel qubits of an operator: output qubit ``perm[q]`` carries input qubit ``q``."""
    t = matrix.reshape([2] * (2 * num_qubits))
    axes = [0] * num_qubits
    for q, target in enumerate(perm):
        axes[target] = q
    t = t.transpose(axes + [num_qubits + a for a in axes])
    return t.reshape(matrix.shape)


def is_unitary(matrix: np.ndarray, tol: float = 1e-9) -> bool:
    eye = np.eye(matrix.shape[0])
    return bool(np.max(np.abs(matrix.conj().T @ matrix - eye)) < tol)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    return np.asarray(unitary_group.rvs(dim, random_state=rng), dtype=complex).reshape(dim, dim)
