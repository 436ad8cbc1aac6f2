"""Process-wide limits and tolerances."""
from __future__ import annotations

import os

DEFAULT_MAX_QUBITS = 12
_max_qubits = DEFAULT_MAX_QUBITS


class DimensionError(ValueError):
    """Dense simulation requested beyond the configured qubit limit."""


def max_qubits() -> int:
    return _max_qubits


def set_max_qubits(value: int) -> None:
    global _max_qubits
    if value < 1:
        raise ValueError("max qubits must be positive")
    _max_qubits = int(value)


def check_qubits(n: int) -> None:
    if n > _max_qubits:
        raise DimensionError(f"{n} qubits exceeds the dense-simulation limit of {_max_qubits}")


def tolerance(default: float = 1e-9) -> float:
    """Acceptance tolerance, overridable through ``PAULI_SEW_TOL``."""
    raw = os.environ.get("PAULI_SEW_TOL")
    return float(raw) if raw else default
