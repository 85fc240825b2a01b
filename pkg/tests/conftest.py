import numpy as np
import pytest


def random_states(rng, num_qubits, count):
    z = rng.normal(size=(count, 2**num_qubits)) + 1j * rng.normal(size=(count, 2**num_qubits))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def states(rng):
    return lambda num_qubits, count=20: random_states(rng, num_qubits, count)
