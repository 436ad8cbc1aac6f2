import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pauli_sew.circuit import (H, X, Z, CircuitBuilder, MultiCZ, NotCleanError, QacCircuit,
                               SingleQubitGate, build_grover_phase, clean_ancilla_extract,
                               czk_pauli_coefficients, czk_unitary, light_cone, random_circuit,
                               random_clean_circuit, remove_large_cz, to_unitary)
from pauli_sew.linalg import haar_unitary, is_unitary
from pauli_sew.pauli import decompose

from conftest import seeds, small_circuits


def test_empty_circuit_is_identity():
    assert np.allclose(to_unitary(QacCircuit(3)), np.eye(8))


def test_single_cz_matrix():
    c = CircuitBuilder(2).cz(0, 1).build()
    assert np.allclose(to_unitary(c), np.diag([1, 1, 1, -1]))


def test_h_then_cz_matches_hand_product():
    c = CircuitBuilder(2).sq(0, H).cz(0, 1).build()
    expected = np.diag([1, 1, 1, -1]) @ np.kron(H, np.eye(2))
    assert np.allclose(to_unitary(c), expected)


def test_gate_order_first_layer_rightmost(rng):
    a, b = haar_unitary(2, rng), haar_unitary(2, rng)
    c = CircuitBuilder(1).sq(0, a).sq(0, b).build()
    assert len(c.layers) == 2
    assert np.allclose(to_unitary(c), b @ a)


def test_ancilla_is_last_qubit():
    c = CircuitBuilder(1, 1).sq(1, X).build()
    assert np.allclose(to_unitary(c), np.kron(np.eye(2), X))


def test_gate_validation():
    with pytest.raises(ValueError):
        SingleQubitGate(0, np.array([[1, 1], [0, 1]], dtype=complex))
    with pytest.raises(ValueError):
        MultiCZ((0, 0))
    with pytest.raises(ValueError):
        MultiCZ((0,))
    with pytest.raises(ValueError):
        QacCircuit(2, 0, ((MultiCZ((0, 1)), SingleQubitGate(1, X)),))
    with pytest.raises(ValueError):
        QacCircuit(2, 0, ((MultiCZ((0, 2)),),))


def test_builder_splits_collisions_and_metadata():
    c = CircuitBuilder(3).cz(0, 1).cz(1, 2).sq(0, H).build()
    assert len(c.layers) == 2
    assert c.depth == 2 and c.size == 2
    assert c.cz_widths == [2, 2]


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_czk_table_matches_dense(k):
    closed = czk_pauli_coefficients(k)
    dense = decompose(czk_unitary(k))
    for p in set(closed.entries) | set(dense.entries):
        assert closed[p] == pytest.approx(dense[p], abs=1e-12)


def test_czk_examples():
    assert czk_pauli_coefficients(2).to_dict() == pytest.approx({"II": .5, "IZ": .5, "ZI": .5, "ZZ": -.5})
    t3 = czk_pauli_coefficients(3)
    assert t3["III"] == 0.75
    assert t3["ZII"] == t3["IZI"] == t3["IIZ"] == 0.25
    assert t3["ZZI"] == t3["ZIZ"] == t3["IZZ"] == -0.25
    assert t3["ZZZ"] == 0.25
    assert np.allclose(czk_unitary(1), Z)


def test_remove_large_cz_examples():
    c = CircuitBuilder(4).cz(0, 1, 2, 3).build()
    pruned, m = remove_large_cz(c, 3)
    assert m == 1 and pruned.size == 0 and len(pruned.layers) == len(c.layers)
    same, m0 = remove_large_cz(c, 4)
    assert m0 == 0 and same == c
    mixed = CircuitBuilder(10).cz(0, 1).cz(2, 3, 4).cz(5, 6, 7, 8, 9).build()
    pruned, m = remove_large_cz(mixed, 3)
    assert m == 1 and sorted(pruned.cz_widths) == [2, 3]
    with pytest.raises(ValueError):
        remove_large_cz(c, 1)


@given(small_circuits(max_n=6), st.integers(2, 6))
def test_remove_large_cz_properties(c, kappa):
    pruned, m = remove_large_cz(c, kappa)
    assert pruned.size == c.size - m <= c.size
    assert (pruned.n, pruned.a, len(pruned.layers)) == (c.n, c.a, len(c.layers))
    assert all(w <= kappa for w in pruned.cz_widths)
    assert m == sum(w > kappa for w in c.cz_widths)


def test_light_cone_examples():
    assert light_cone(QacCircuit(3), 1) == {1}
    assert light_cone(CircuitBuilder(2).cz(0, 1).build(), 0) == {0, 1}
    c = CircuitBuilder(3).cz(0, 1).barrier().cz(1, 2).build()
    assert light_cone(c, 2) == {0, 1, 2}
    assert light_cone(c, 0) == {0, 1}


def test_random_circuit_determinism_and_density():
    a = random_circuit(4, 2, 3, 0.7, 11)
    b = random_circuit(4, 2, 3, 0.7, 11)
    assert a.to_json() == b.to_json()
    assert random_circuit(4, 3, 3, 0.0, 5).size == 0


def test_random_circuit_structure_sweep():
    for seed in range(100):
        c = random_circuit(6, 2, 4, 0.8, seed)
        assert all(w <= 4 for w in c.cz_widths)
        assert c.depth <= 2
        for layer in c.layers:
            qs = [q for g in layer for q in g.qubits]
            assert len(qs) == len(set(qs))


@given(small_circuits())
def test_to_unitary_is_unitary(c):
    assert is_unitary(to_unitary(c), 1e-9)


@given(small_circuits())
def test_json_round_trip(c):
    back = QacCircuit.from_json(c.to_json())
    assert back == c
    assert np.array_equal(to_unitary(back), to_unitary(c))
    doc = json.loads(c.to_json())
    assert set(doc) >= {"n", "a", "layers"}


@given(small_circuits())
def test_adjoint_inverts(c):
    u = to_unitary(c.then(c.adjoint()))
    assert np.allclose(u, np.eye(u.shape[0]), atol=1e-9)


def test_grover_examples():
    assert build_grover_phase("11").size == 1
    assert np.allclose(to_unitary(build_grover_phase("11")), np.diag([1, 1, 1, -1]))
    assert np.allclose(to_unitary(build_grover_phase("00")), np.diag([-1, 1, 1, 1]))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_grover_exhaustive(n):
    for xi in range(1 << n):
        x = format(xi, f"0{n}b")
        c = build_grover_phase(x)
        u = to_unitary(c)
        assert c.depth == (1 if n > 1 else 0)
        assert np.array_equal(np.abs(u - np.diag(np.diag(u))) > 0, np.zeros_like(u, dtype=bool))
        diag = np.real(np.diag(u))
        assert np.all(np.isin(np.round(diag, 12), [-1.0, 1.0]))
        assert [y for y in range(1 << n) if diag[y] < 0] == [xi]


def test_clean_extract_examples(rng):
    b = haar_unitary(2, rng)
    c = CircuitBuilder(1, 2).sq(0, b).build()
    assert np.allclose(clean_ancilla_extract(c), b)
    assert np.allclose(clean_ancilla_extract(QacCircuit(2, 2)), np.eye(4))
    dirty = CircuitBuilder(1, 1).sq(1, H).build()
    with pytest.raises(NotCleanError) as err:
        clean_ancilla_extract(dirty)
    assert err.value.residual > 0.5


def test_compute_uncompute_fixture_diagonal_action():
    # copy q0 onto the ancilla, apply CZ on (ancilla, q1), uncopy: acts as CZ(q0, q1)
    b = CircuitBuilder(2, 1)
    b.sq(2, H).cz(0, 2).sq(2, H).barrier().cz(2, 1).barrier().sq(2, H).cz(0, 2).sq(2, H)
    a = clean_ancilla_extract(b.build())
    assert np.allclose(a, np.diag([1, 1, 1, -1]))


def test_random_clean_circuit_fixtures():
    c = random_clean_circuit(2, 1, 0)
    u = to_unitary(c)
    cols = np.arange(4) << 1
    leak = np.delete(u[:, cols], cols, axis=0)
    assert np.linalg.norm(leak) < 1e-10
    for seed in range(50):
        n = 2 + seed % 2
        a = 1 + seed % 2
        c = random_clean_circuit(n, a, seed)
        assert c.to_json() == random_clean_circuit(n, a, seed).to_json()
        assert is_unitary(clean_ancilla_extract(c), 1e-9)
    c0 = random_clean_circuit(3, 0, 4)
    assert np.allclose(clean_ancilla_extract(c0), to_unitary(c0))
    with pytest.raises(ValueError):
        random_clean_circuit(1, 2, 0)
