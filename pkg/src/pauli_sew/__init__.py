"""Learning shallow circuits with many-qubit CZ gates, at exactly simulable scale."""

__version__ = "0.1.0"

from .circuit import CircuitBuilder, MultiCZ, QacCircuit, SingleQubitGate, to_unitary  # noqa: E402
from .pauli import CoefficientTable, PauliString, decompose  # noqa: E402

__all__ = [
    "CircuitBuilder", "CoefficientTable", "MultiCZ", "PauliString", "QacCircuit",
    "SingleQubitGate", "__version__", "decompose", "to_unitary",
]
