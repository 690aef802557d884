import numpy as np
import pytest

from core import DenseUnitary, StructuredJunta

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.diag([1, -1]).astype(complex)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
    dtype=complex,
)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def cnot():
    return DenseUnitary(2, CNOT)


@pytest.fixture
def hadamard():
    return DenseUnitary(1, HADAMARD)


@pytest.fixture
def zz():
    return DenseUnitary(2, np.kron(PAULI_Z, PAULI_Z))


@pytest.fixture
def identity2():
    return DenseUnitary(2, np.eye(4))


def junta(n, support, matrix):
    return StructuredJunta(n, tuple(support), DenseUnitary.from_matrix(matrix))
