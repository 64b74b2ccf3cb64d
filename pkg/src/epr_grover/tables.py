"""Published two-spin matrices, typed in by hand.

These are the independent references the simulation is checked against, so
nothing here is computed from the simulator.
"""

import math

import numpy as np

from .linalg import SX, SY, SZ, kron


def yy_unitary(phi1: float, phi2: float) -> np.ndarray:
    """Closed-form ``Y_1(phi1) Y_2(phi2)`` with ``c_k = cos(phi_k/2)``, ``s_k = sin(phi_k/2)``."""
    c1, s1 = math.cos(phi1 / 2), math.sin(phi1 / 2)
    c2, s2 = math.cos(phi2 / 2), math.sin(phi2 / 2)
    return np.array([
        [c1 * c2, c1 * s2, s1 * c2, s1 * s2],
        [-c1 * s2, c1 * c2, -s1 * s2, s1 * c2],
        [-s1 * c2, -s1 * s2, c1 * c2, c1 * s2],
        [s1 * s2, -s1 * c2, -c1 * s2, c1 * c2],
    ], dtype=complex)


SIGN_FLIP_UU = np.diag([-1, 1, 1, 1]).astype(complex)
SIGN_FLIP_PAIR = np.diag([1, -1, -1, 1]).astype(complex)

RHO_0 = kron(SZ, np.eye(2)) / 2 + kron(np.eye(2), SZ) / 2 + kron(SZ, SZ)
RHO_3 = kron(SX, SX) + kron(SY, SY) - kron(SZ, SZ)

RHO_1R = np.array([
    [1, 1, -1, 1],
    [1, 1, -1, 1],
    [-1, -1, 1, -1],
    [1, 1, -1, 1],
], dtype=complex) / 4

RHO_2R = np.array([
    [1, -1, -1, -1],
    [-1, 1, 1, 1],
    [-1, 1, 1, 1],
    [-1, 1, 1, 1],
], dtype=complex) / 4

RHO_3R = np.array([
    [1, 1, 1, -1],
    [1, 1, 1, -1],
    [1, 1, 1, -1],
    [-1, -1, -1, 1],
], dtype=complex) / 4

RHO_4R = np.array([
    [1, -1, 1, 1],
    [-1, 1, -1, -1],
    [1, -1, 1, 1],
    [1, -1, 1, 1],
], dtype=complex) / 4

READOUT_MATRICES = {1: RHO_1R, 2: RHO_2R, 3: RHO_3R, 4: RHO_4R}

# |uu> read out on spin 1 and on spin 2
RHO_SR1 = np.array([
    [1, 0, -2, 0],
    [0, -1, 0, 0],
    [-2, 0, 1, 0],
    [0, 0, 0, -1],
], dtype=complex) / 4

RHO_SR2 = np.array([
    [1, -2, 0, 0],
    [-2, 1, 0, 0],
    [0, 0, -1, 0],
    [0, 0, 0, -1],
], dtype=complex) / 4
