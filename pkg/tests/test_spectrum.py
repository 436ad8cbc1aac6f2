import numpy as np
import pytest
from hypothesis import given, strategies as st

from pauli_sew.circuit import (H, X, CircuitBuilder, QacCircuit, light_cone, random_circuit,
                               random_clean_circuit, remove_large_cz, to_unitary)
from pauli_sew.linalg import haar_unitary, is_unitary
from pauli_sew.metrics import frobenius_distance
from pauli_sew.pauli import PauliString, pauli_matrix
from pauli_sew.spectrum import (Observable, ancilla_coefficient_discrepancy, ancilla_restrict,
                                ancilla_weight_check, choi_single_output, concentration_curve,
                                heisenberg_observable, removal_error, verify_choi_heisenberg,
                                weight_above_degree, weight_outside_support)

from conftest import seeds, small_circuits

P = lambda s: PauliString.from_label(s)


def test_identity_circuit_observable():
    o = heisenberg_observable(QacCircuit(3), "Y", 1)
    assert o.table.to_dict() == {"IYI": 1.0}
    assert o.support == {1}


def test_hadamard_maps_z_to_x():
    c = CircuitBuilder(2).sq(1, H).build()
    o = heisenberg_observable(c, "Z", 1)
    assert np.allclose(o.matrix, pauli_matrix(P("IX")))


def test_cz_maps_x0_to_x0z1():
    c = CircuitBuilder(2).cz(0, 1).build()
    o = heisenberg_observable(c, "X", 0)
    assert o.table.to_dict() == pytest.approx({"XZ": 1.0})
    assert weight_above_degree(o, 1) == pytest.approx(1.0)
    assert weight_above_degree(o, 2) == 0.0


def test_identity_weight_above_one():
    assert weight_above_degree(heisenberg_observable(QacCircuit(3), "X", 2), 1) == 0.0


def test_bad_pauli():
    with pytest.raises(ValueError):
        heisenberg_observable(QacCircuit(1), "I", 0)


@given(small_circuits(max_n=5), st.sampled_from("XYZ"), st.data())
def test_support_confinement_and_parseval(c, pauli, data):
    q = data.draw(st.integers(0, c.n - 1))
    o = heisenberg_observable(c, pauli, q)
    assert o.support == light_cone(c, q)
    assert o.total_weight() == pytest.approx(1.0, abs=1e-9)
    assert all(p.support <= o.support for p in o.table.entries)
    assert weight_outside_support(o, o.support) == 0.0
    assert weight_above_degree(o, len(o.support)) == 0.0
    for p, v in list(o.table.items())[:5]:
        assert v == pytest.approx(np.trace(pauli_matrix(p) @ o.matrix).real / 2 ** c.n, abs=1e-12)


def test_cz2_only_depth_bound():
    for seed in range(10):
        for d in (1, 2):
            c = random_circuit(6, d, 2, 1.0, seed)
            for q in range(6):
                o = heisenberg_observable(c, "Z", q)
                assert weight_above_degree(o, 2 ** d) == 0.0


def test_concentration_curve_examples():
    rows = concentration_curve(QacCircuit(3), "Z", 0)
    assert [r[0] for r in rows] == [0, 1, 2, 3]
    assert all(w == 0 for k, w, _ in rows if k >= 1)
    c = random_circuit(5, 2, 3, 0.8, 2)
    rows = concentration_curve(c, "X", 2)
    ws = [w for _, w, _ in rows]
    assert all(a >= b - 1e-15 for a, b in zip(ws, ws[1:]))
    assert ws[0] == pytest.approx(1.0, abs=1e-9)
    assert ws[-1] == 0.0


def test_removal_error_examples():
    c = random_circuit(4, 2, 2, 0.8, 0)
    r = removal_error(c, 2, "Z", 0)
    assert (r.measured, r.bound, r.m) == (0.0, 0.0, 0)
    rng = np.random.default_rng(5)
    b = CircuitBuilder(3)
    for q in range(3):
        b.sq(q, haar_unitary(2, rng))
    b.cz(0, 1, 2)
    for q in range(3):
        b.sq(q, haar_unitary(2, rng))
    r = removal_error(b.build(), 3 - 1, "X", 1)
    assert r.m == 1 and r.bound == pytest.approx(9 / 4)
    measured, bound = removal_error(b.build(), 3, "X", 1)
    assert bound == 0.0


def test_removal_bound_sweep():
    for seed in range(50):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 7))
        c = random_circuit(n, 2, n, 0.7, rng)
        kappa = int(rng.integers(2, n + 1))
        q = int(rng.integers(n))
        r = removal_error(c, kappa, "XYZ"[seed % 3], q)
        assert r.measured <= r.bound + 1e-12
        # weight lost outside the pruned support is bounded by the removal distance
        assert weight_outside_support(r.observable, r.truncated.support) <= r.measured + 1e-9


def test_ancilla_restrict_examples(rng):
    o3 = (rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    o3 = o3 + o3.conj().T
    for anc, expected in (("I", o3), ("Z", o3), ("X", np.zeros((4, 4)))):
        obs = Observable.from_matrix(np.kron(o3, pauli_matrix(P(anc))))
        r = ancilla_restrict(obs, 1)
        assert r.n == 2
        assert np.allclose(r.matrix, expected)
        assert ancilla_coefficient_discrepancy(obs, 1) < 1e-12
    with pytest.raises(ValueError):
        ancilla_restrict(Observable.from_matrix(o3), 0)


@pytest.mark.parametrize("n,a", [(2, 1), (3, 1), (2, 2), (3, 2)])
def test_ancilla_weight_sweep(n, a):
    for seed in range(12):
        c = random_clean_circuit(n, a, seed)
        obs = heisenberg_observable(c, "XYZ"[seed % 3], seed % n)
        assert ancilla_coefficient_discrepancy(obs, a) < 1e-9
        full = ancilla_weight_check(c, None, "XYZ"[seed % 3], seed % n)
        assert full.holds and full.rhs_iz <= full.rhs + 1e-12
        single = ancilla_weight_check(c, [PauliString.single(n, 0, "Z")], "Z", 0)
        assert single.holds


def test_ancilla_weight_no_ancilla_equal():
    c = random_circuit(3, 1, 2, 1.0, 0)
    chk = ancilla_weight_check(c, lambda p: p.degree >= 1, "X", 0)
    assert chk.lhs == chk.rhs and chk.a == 0


def test_choi_identity_single_qubit():
    phi = choi_single_output(QacCircuit(1))
    epr = np.array([1, 0, 0, 1], dtype=complex)
    assert np.allclose(phi, np.outer(epr, epr))
    assert np.trace(phi).real == pytest.approx(2.0)


@given(small_circuits(max_n=4))
def test_choi_psd_and_trace(c):
    phi = choi_single_output(c)
    assert np.linalg.eigvalsh(phi).min() > -1e-9
    assert np.trace(phi).real == pytest.approx(2 ** c.n)


def test_choi_heisenberg_identity_and_y_sign():
    assert verify_choi_heisenberg(QacCircuit(2), "Z") < 1e-12
    # with C = I, O = Y_out and Phi(Y, Y) carries the transpose sign
    assert verify_choi_heisenberg(QacCircuit(2), "Y") < 1e-12


@given(small_circuits(max_n=3), st.sampled_from("XYZ"))
def test_choi_heisenberg_random(c, pauli):
    assert verify_choi_heisenberg(c, pauli) < 1e-9
