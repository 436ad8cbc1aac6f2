import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pauli_sew.circuit import X, Z, czk_unitary
from pauli_sew.linalg import haar_unitary
from pauli_sew.pauli import (CoefficientTable, NonHermitianError, PartialTableWarning, PauliString,
                             decompose, enumerate_low_degree, enumerate_supports, low_degree_count,
                             pauli_matrix, paulis_on_support, reconstruct, weight)

from conftest import labels


def test_pauli_matrix_examples():
    assert np.allclose(pauli_matrix(PauliString.from_label("Z")), np.diag([1, -1]))
    assert np.allclose(pauli_matrix(PauliString.from_label("II")), np.eye(4))
    xz = pauli_matrix(PauliString.from_label("XZ"))
    assert np.allclose(xz, np.kron(X, Z))
    assert np.allclose(xz @ xz, np.eye(4))


@given(st.integers(1, 4).flatmap(labels))
def test_label_round_trip_and_masks(label):
    p = PauliString.from_label(label)
    assert p.label == label
    assert PauliString(p.n, p.x, p.z) == p
    assert p.degree == len(p.support) == sum(ch != "I" for ch in label)
    assert p.support == frozenset(i for i, ch in enumerate(label) if ch != "I")


@given(st.integers(1, 3).flatmap(labels))
def test_pauli_matrix_hermitian_unitary_traceless(label):
    p = PauliString.from_label(label)
    m = pauli_matrix(p)
    assert np.allclose(m, m.conj().T)
    assert np.allclose(m @ m, np.eye(1 << p.n))
    assert abs(np.trace(m)) == pytest.approx(0.0 if p.degree else 1 << p.n)


def test_bad_label_rejected():
    with pytest.raises(ValueError):
        PauliString.from_label("XQ")


def test_decompose_cz2():
    table = decompose(czk_unitary(2))
    assert table.to_dict() == pytest.approx({"II": 0.5, "IZ": 0.5, "ZI": 0.5, "ZZ": -0.5})
    assert table["XX"] == 0.0


def test_decompose_identity():
    table = decompose(np.eye(8))
    assert table.to_dict() == pytest.approx({"III": 1.0})


def test_decompose_random_unitary_reconstructs(rng):
    u = haar_unitary(4, rng)
    with pytest.raises(NonHermitianError):
        decompose(u)
    table = decompose(u, real=False)
    assert np.linalg.norm(reconstruct(table) - u) ** 2 / 4 < 1e-9
    # Parseval on |coefficients|^2
    assert table.total_weight() == pytest.approx(1.0, abs=1e-9)


def test_decompose_family_matches_full(rng):
    a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    h = a + a.conj().T
    fam = enumerate_low_degree(3, 2)
    part = decompose(h, fam)
    full = decompose(h)
    assert not part.complete and full.complete
    for p in fam:
        assert part[p] == pytest.approx(full[p], abs=1e-12)
        assert part[p] == pytest.approx(np.trace(pauli_matrix(p) @ h).real / 8, abs=1e-12)


@pytest.mark.parametrize("n,ell,size", [(2, 0, 1), (2, 1, 7), (3, 2, 37)])
def test_enumerate_low_degree_counts(n, ell, size):
    fam = enumerate_low_degree(n, ell)
    assert len(fam) == size == low_degree_count(n, ell)
    assert len(set(fam)) == size
    assert all(p.degree <= ell for p in fam)


@given(st.integers(1, 5).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n))))
def test_enumerate_low_degree_formula_and_order(args):
    n, ell = args
    fam = enumerate_low_degree(n, ell)
    assert len(fam) == sum(3 ** k * math.comb(n, k) for k in range(ell + 1))
    assert [p.label for p in fam] == sorted(p.label for p in fam)


def test_enumerate_supports_examples():
    sups = enumerate_supports(3, 2)
    assert sups == [(0, 1), (0, 2), (1, 2)]
    for s in sups:
        ps = paulis_on_support(3, s)
        assert len(ps) == 16
        assert all(p.support <= set(s) and p.degree <= 2 for p in ps)
    assert enumerate_supports(1, 1) == [(0,)]
    assert [p.label for p in paulis_on_support(1, (0,))] == ["I", "X", "Y", "Z"]


def test_weight_examples(rng):
    u = czk_unitary(2)
    table = decompose(u)
    assert weight(table) == pytest.approx(1.0, abs=1e-9)
    assert weight(table, lambda p: p.degree > 1) == pytest.approx(0.25)
    pz = decompose(pauli_matrix(PauliString.from_label("IZI")))
    assert weight(pz, lambda p: p.degree > 1) == 0.0


def test_weight_additivity(rng):
    a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    table = decompose(a + a.conj().T)
    inside = lambda p: p.support <= {0, 2}
    total = weight(table)
    assert weight(table, inside) + weight(table, lambda p: not inside(p)) == pytest.approx(total, rel=1e-12)


def test_weight_partial_table_warns():
    table = CoefficientTable.from_dict(2, {"XI": 0.5})
    with pytest.warns(PartialTableWarning):
        weight(table)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert weight(table, partial_ok=True) == 0.25


@given(st.integers(1, 3).flatmap(labels), st.integers(1, 3).flatmap(labels))
def test_commutation_matches_matrices(a, b):
    if len(a) != len(b):
        b = (b * 3)[:len(a)]
    p, q = PauliString.from_label(a), PauliString.from_label(b)
    ma, mb = pauli_matrix(p), pauli_matrix(q)
    assert p.commutes(q) == np.allclose(ma @ mb, mb @ ma)


def test_table_dict_round_trip():
    t = CoefficientTable.from_dict(2, {"XZ": 0.25, "II": -0.5}, accuracy=0.1)
    assert CoefficientTable.from_dict(2, t.to_dict(), accuracy=0.1).to_dict() == t.to_dict()
    assert t["XZ"] == 0.25 and t["ZZ"] == 0.0
