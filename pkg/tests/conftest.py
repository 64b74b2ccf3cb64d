import math

import numpy as np
import pytest

R2 = 1 / math.sqrt(2)

# Bell states typed in directly, basis |uu>, |ud>, |du>, |dd>
PSI = {
    1: np.array([R2, 0, 0, R2], dtype=complex),
    2: np.array([R2, 0, 0, -R2], dtype=complex),
    3: np.array([0, R2, R2, 0], dtype=complex),
    4: np.array([0, R2, -R2, 0], dtype=complex),
}

SX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
SY = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
SZ = np.array([[1, 0], [0, -1]], dtype=complex) / 2
ID2 = np.eye(2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def random_unitary(n, rng):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
