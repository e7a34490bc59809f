import math
from functools import reduce

import numpy as np
import pytest

I2 = np.eye(2, dtype=complex)
PAULI = {
    "I": I2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_op(ops_by_qubit, n):
    """Dense operator with qubit 0 as the least-significant index bit."""
    return reduce(np.kron, [ops_by_qubit.get(q, I2) for q in reversed(range(n))])


def dense_rotation(pauli, angle):
    return math.cos(angle / 2) * I2 - 1j * math.sin(angle / 2) * PAULI[pauli]


def dense_cz(a, b, n):
    d = np.array([-1.0 if (i >> a) & 1 and (i >> b) & 1 else 1.0 for i in range(1 << n)])
    return np.diag(d).astype(complex)


def dense_circuit(spec):
    """Brute-force unitary of an RPQC spec, built gate by gate from Kronecker products."""
    n = spec.n_qubits
    u = np.eye(1 << n, dtype=complex)
    if spec.include_initial_sqrt_h:
        for q in range(n):
            u = kron_op({q: dense_rotation("Y", math.pi / 4)}, n) @ u
    for i in range(spec.n_layers):
        for q in range(n):
            u = kron_op({q: dense_rotation(spec.axes[i][q], spec.angles[i, q])}, n) @ u
        for q in range(n - 1):
            u = dense_cz(q, q + 1, n) @ u
    return u


_acceptance_lines = []


def record_acceptance(line):
    _acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
