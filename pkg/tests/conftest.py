import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from pauli_sew.circuit import random_circuit

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**31 - 1)
labels = lambda n: st.text(alphabet="IXYZ", min_size=n, max_size=n)


@st.composite
def small_circuits(draw, max_n=4, max_d=2):
    n = draw(st.integers(1, max_n))
    d = draw(st.integers(0, max_d))
    kappa = draw(st.integers(min(2, n), n)) if n >= 2 else 1
    density = draw(st.sampled_from([0.0, 0.5, 1.0]))
    return random_circuit(n, d, kappa, density, draw(seeds))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
