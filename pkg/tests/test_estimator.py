import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pauli_sew.circuit import CircuitBuilder, QacCircuit, random_circuit
from pauli_sew.estimator import (EstimatorConfig, coefficient_rng, estimate_all_low_degree,
                                 exact_coefficient, hoeffding_shots, sample_coefficient,
                                 sample_count, shot_values)
from pauli_sew.pauli import PauliString, enumerate_low_degree, low_degree_count
from pauli_sew.spectrum import heisenberg_observable

from conftest import seeds, small_circuits

P = lambda s: PauliString.from_label(s)


def test_sample_count_examples():
    assert sample_count(2, 0.1, 0.01, 4) == math.ceil(900 * math.log(1600)) == 6640
    assert sample_count(0, 0.2, 0.05, 7) == math.ceil(25 * math.log(20))


@given(st.integers(1, 4), st.floats(0.01, 0.5), st.floats(0.001, 0.5), st.integers(2, 10))
def test_sample_count_monotone(ell, eps, delta, n):
    base = sample_count(ell, eps, delta, n)
    assert sample_count(ell, eps * 1.5, delta, n) <= base
    assert sample_count(ell, eps, delta / 2, n) >= base
    assert sample_count(ell + 1, eps, delta, n) >= base
    assert sample_count(ell, eps, delta, n + 1) >= base


def test_hoeffding_shots_formula():
    assert hoeffding_shots(0.05, 0.05, 37) == math.ceil(800 * math.log(2 * 37 / 0.05))
    cfg = EstimatorConfig("sampled", 2, 0.05, 0.05)
    assert cfg.shots(3) == hoeffding_shots(0.05, 0.05, low_degree_count(3, 2))
    assert EstimatorConfig("sampled", 2, shots_override=10).shots(3) == 10


def test_config_validation():
    for bad in (dict(mode="noisy"), dict(eta=0.0), dict(eta=1.5), dict(delta=1.0), dict(ell=-1),
                dict(shots_override=0)):
        with pytest.raises(ValueError):
            EstimatorConfig(**bad)


def test_exact_coefficient_examples():
    c = QacCircuit(3)
    assert exact_coefficient(c, "X", 1, P("IXI")) == 1.0
    assert exact_coefficient(c, "X", 1, P("IZI")) == 0.0
    cz = CircuitBuilder(2).cz(0, 1).build()
    assert exact_coefficient(cz, "X", 0, P("XZ")) == pytest.approx(1.0)


@given(small_circuits(max_n=3), st.sampled_from("XYZ"), st.data())
def test_exact_matches_observable_table(c, pauli, data):
    q = data.draw(st.integers(0, c.n - 1))
    obs = heisenberg_observable(c, pauli, q)
    for p in enumerate_low_degree(c.n, min(2, c.n)):
        assert exact_coefficient(c, pauli, q, p) == pytest.approx(obs.table[p], abs=1e-12)


def test_sample_identity_exact_one():
    c = QacCircuit(3)
    assert sample_coefficient(c, "Y", 2, P("IIY"), shots=57, seed=4) == 1.0


def test_sample_anticommuting_near_zero():
    c = QacCircuit(2)
    shots = 2000
    hits = sum(abs(sample_coefficient(c, "X", 0, P("ZI"), shots, seed)) < 4 / math.sqrt(shots)
               for seed in range(100))
    assert hits >= 95


@given(small_circuits(max_n=3), st.sampled_from("XYZ"), seeds, st.data())
def test_shot_values_are_signs(c, pauli, seed, data):
    q = data.draw(st.integers(0, c.n - 1))
    label = data.draw(st.text(alphabet="IXYZ", min_size=c.n, max_size=c.n))
    obs = heisenberg_observable(c, pauli, q)
    vals = shot_values(obs, P(label), 64, np.random.default_rng(seed))
    assert set(np.unique(vals)) <= {-1.0, 1.0}


def test_per_shot_and_count_sampler_both_unbiased():
    rng = np.random.default_rng(0)
    for i in range(20):
        c = random_circuit(3, 2, 3, 0.7, rng)
        labels = [p for p in enumerate_low_degree(3, 3) if p.degree]
        q = labels[int(rng.integers(len(labels)))]
        obs = heisenberg_observable(c, "XYZ"[i % 3], i % 3)
        exact = obs.coefficient(q)
        shots = 1_000_000
        est = sample_coefficient(c, "XYZ"[i % 3], i % 3, q, shots, seed=i, obs=obs)
        stderr = max(np.sqrt(max(1 - exact ** 2, 0.0) / shots), 1e-12)
        assert abs(est - exact) <= 4 * stderr + 1e-12
        per_shot = shot_values(obs, q, 200_000, coefficient_rng(i, "X", 0, q))
        assert abs(per_shot.mean() - exact) <= 4 * per_shot.std(ddof=1) / np.sqrt(len(per_shot)) + 1e-12


def test_sampled_determinism():
    c = random_circuit(3, 1, 2, 1.0, 3)
    cfg = EstimatorConfig("sampled", 2, 0.2, 0.1, seed=9)
    a = estimate_all_low_degree(c, "Z", 1, cfg)
    b = estimate_all_low_degree(c, "Z", 1, cfg)
    assert a.to_dict() == b.to_dict()
    other = estimate_all_low_degree(c, "Z", 1, EstimatorConfig("sampled", 2, 0.2, 0.1, seed=10))
    assert other.to_dict() != a.to_dict()


def test_estimate_exact_identity_indicator():
    table = estimate_all_low_degree(QacCircuit(3), "X", 0, EstimatorConfig("exact", 2))
    assert len(table) == 37 and not table.complete
    assert {k: v for k, v in table.to_dict().items() if v} == {"XII": 1.0}


@given(small_circuits(max_n=4), st.integers(0, 2))
@settings(max_examples=15)
def test_table_size_is_family_size(c, ell):
    ell = min(ell, c.n)
    for mode in ("exact", "sampled"):
        cfg = EstimatorConfig(mode, ell, 0.3, 0.2, shots_override=20)
        t = estimate_all_low_degree(c, "Z", 0, cfg)
        assert len(t) == low_degree_count(c.n, ell)
        assert all(abs(v) <= 1 + 1e-12 for v in t.entries.values())


def test_eta_guarantee_rate():
    c = random_circuit(3, 2, 3, 0.7, 1)
    obs = heisenberg_observable(c, "Z", 1)
    ok = 0
    for seed in range(100):
        cfg = EstimatorConfig("sampled", 2, 0.05, 0.05, seed=seed)
        t = estimate_all_low_degree(c, "Z", 1, cfg, obs=obs)
        ok += max(abs(v - obs.coefficient(p)) for p, v in t.entries.items()) <= 0.05
    assert ok >= 95


def test_ell_exceeds_n():
    with pytest.raises(ValueError):
        estimate_all_low_degree(QacCircuit(2), "Z", 0, EstimatorConfig("exact", 3))
