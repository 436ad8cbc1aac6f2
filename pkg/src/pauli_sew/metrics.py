"""Distances between unitaries and nearest-unitary projection.

Every distance here is a squared-norm quantity: ``d_f`` is the normalized
squared Frobenius distance, not its square root.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .linalg import embed_operator, reduce_operator
from .pauli import qubits_to_mask

RANK_TOL = 1e-10
UNITARY_INPUT_TOL = 1e-6
SUPPORT_TOL = 1e-8


class RankDeficientError(ValueError):
    """Nearest unitary is not unique because a singular value is (numerically) zero."""


class SupportViolation(ValueError):
    """An operator acts non-trivially outside the support it was claimed to live on."""


@dataclass(frozen=True)
class DistanceReport:
    d_f: float
    d_p: float
    d_avg: float

    def to_dict(self) -> dict[str, float]:
        return {"d_f": self.d_f, "d_p": self.d_p, "d_avg": self.d_avg}


def _check_pair(u: np.ndarray, v: np.ndarray) -> int:
    if u.shape != v.shape or u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"shape mismatch: {u.shape} vs {v.shape}")
    return u.shape[0]


def _check_unitary(u: np.ndarray, name: str) -> None:
    err = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if err > UNITARY_INPUT_TOL:
        raise ValueError(f"{name} is not unitary (deviation {err:.2e})")


def frobenius_distance(u: np.ndarray, v: np.ndarray) -> float:
    dim = _check_pair(u, v)
    diff = u - v
    return float(np.vdot(diff, diff).real / dim)


def _overlap(u: np.ndarray, v: np.ndarray) -> complex:
    # Tr(U^dag V)
    return complex(np.vdot(u, v))


def phase_invariant_distance(u: np.ndarray, v: np.ndarray) -> float:
    dim = _check_pair(u, v)
    _check_unitary(u, "U")
    _check_unitary(v, "V")
    return float(max(0.0, 2.0 - 2.0 * abs(_overlap(u, v)) / dim))


def avg_gate_fidelity_distance(u: np.ndarray, v: np.ndarray) -> float:
    dim = _check_pair(u, v)
    _check_unitary(u, "U")
    _check_unitary(v, "V")
    f = abs(_overlap(u, v)) ** 2 / dim ** 2
    return float(max(0.0, dim / (dim + 1) * (1.0 - f)))


def distance_report(u: np.ndarray, v: np.ndarray) -> DistanceReport:
    return DistanceReport(frobenius_distance(u, v), phase_invariant_distance(u, v),
                          avg_gate_fidelity_distance(u, v))


def haar_states(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` Haar-random pure states as columns, from normalized complex Gaussians."""
    psi = rng.standard_normal((dim, count)) + 1j * rng.standard_normal((dim, count))
    return psi / np.linalg.norm(psi, axis=0)


def d_avg_monte_carlo(u: np.ndarray, v: np.ndarray, samples: int = 10_000,
                      seed: int = 0, batch: int = 4096) -> tuple[float, float]:
    """Sample mean and standard error of ``1 - |<psi|U^dag V|psi>|^2`` over Haar states."""
    dim = _check_pair(u, v)
    if samples < 100:
        raise ValueError("need at least 100 samples")
    rng = np.random.default_rng(seed)
    w = u.conj().T @ v
    values = []
    left = samples
    while left:
        k = min(batch, left)
        psi = haar_states(dim, k, rng)
        amp = np.einsum("ik,ik->k", psi.conj(), w @ psi)
        values.append(1.0 - np.abs(amp) ** 2)
        left -= k
    vals = np.concatenate(values)
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(samples))


def project_to_unitary(a: np.ndarray) -> np.ndarray:
    """Closest unitary in Frobenius norm, ``U V^dag`` from ``A = U S V^dag``."""
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got {a.shape}")
    u, s, vh = np.linalg.svd(a)
    if s.min() < RANK_TOL:
        raise RankDeficientError(f"smallest singular value {s.min():.3e} below {RANK_TOL:g}")
    return u @ vh


def off_support_mass(a: np.ndarray, support: Iterable[int], total_qubits: int) -> float:
    """Squared Pauli mass of ``A`` on strings touching qubits outside ``support``."""
    from .pauli import pauli_spectrum, support_mask_grid

    spec = pauli_spectrum(a)
    outside = support_mask_grid(total_qubits) & ~qubits_to_mask(total_qubits, support)
    return float(np.sum(np.abs(spec[outside != 0]) ** 2))


def factor_on_support(a: np.ndarray, support: Iterable[int], total_qubits: int,
                      tol: float = SUPPORT_TOL) -> np.ndarray:
    """``A_s`` with ``A = A_s (x) I_rest``; raises :class:`SupportViolation` otherwise.

    The residual ``||A - A_s (x) I||_F^2 / 2^N`` equals the off-support Pauli mass.
    """
    support = sorted(set(support))
    local = reduce_operator(a, support, total_qubits)
    rebuilt = embed_operator(local, support, total_qubits)
    residual = frobenius_distance(a, rebuilt)
    if residual > tol:
        raise SupportViolation(f"off-support mass {residual:.3e} exceeds {tol:g}")
    return local


def project_to_unitary_on_support(a: np.ndarray, support: Iterable[int], total_qubits: int) -> np.ndarray:
    """Nearest unitary computed on the non-trivial support only, then re-embedded."""
    support = sorted(set(support))
    local = factor_on_support(a, support, total_qubits)
    return embed_operator(project_to_unitary(local), support, total_qubits)
