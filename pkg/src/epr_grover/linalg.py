"""Dense complex linear algebra shared by the Grover engine and the NMR simulator.

Operators, state vectors and deviation density matrices are plain complex
numpy arrays.  Two-spin objects use the basis order |uu>, |ud>, |du>, |dd>
(index 0..3), i.e. spin 1 is the most significant tensor factor.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

DEFAULT_TOL = 1e-9
UNITARY_TOL = 1e-12

# single-spin angular momentum matrices (hbar = 1)
SX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
SY = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
SZ = np.array([[1, 0], [0, -1]], dtype=complex) / 2
I2 = np.eye(2, dtype=complex)


class Equivalence(NamedTuple):
    equivalent: bool
    scale: float
    offset: float
    residual: float


class PhaseMatch(NamedTuple):
    equal: bool
    phase: complex
    residual: float


def max_norm(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if np.size(a) else 0.0


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product; ``a`` is the more significant factor."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def adjoint(a: np.ndarray) -> np.ndarray:
    return np.asarray(a, dtype=complex).conj().T


def is_unitary(a: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    return max_norm(adjoint(a) @ a - np.eye(a.shape[0])) <= tol


def is_hermitian(a: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    return max_norm(a - adjoint(a)) <= tol


def basis_state(dim: int, index: int) -> np.ndarray:
    if not 0 <= index < dim:
        raise ValueError(f"basis index {index} out of range for dimension {dim}")
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def spin_operator(single: np.ndarray, spin: int) -> np.ndarray:
    """Embed a 2x2 single-spin operator on ``spin`` (1 or 2) of the pair."""
    if spin == 1:
        return kron(single, I2)
    if spin == 2:
        return kron(I2, single)
    raise ValueError(f"spin must be 1 or 2, got {spin!r}")


def apply(u: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Act with ``u`` on a state vector (u|x>) or a density matrix (u x u^dagger)."""
    u = np.asarray(u, dtype=complex)
    x = np.asarray(x, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"operator must be square, got shape {u.shape}")
    if x.shape[0] != u.shape[1] or (x.ndim == 2 and x.shape[1] != u.shape[0]):
        raise ValueError(f"dimension mismatch: operator {u.shape} vs operand {x.shape}")
    if x.ndim == 1:
        return u @ x
    if x.ndim == 2:
        return u @ x @ adjoint(u)
    raise ValueError(f"operand must be a vector or a matrix, got ndim={x.ndim}")


def equiv_deviation(a: np.ndarray, b: np.ndarray, tol: float = DEFAULT_TOL) -> Equivalence:
    """Test ``a == scale * b + offset * I`` with ``scale > 0``.

    The witness pair is the least-squares projection of ``a`` onto
    span{b, I} under the real Frobenius inner product.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    n = a.shape[0]
    eye = np.eye(n)

    def inner(x, y):
        return float(np.real(np.vdot(x, y)))

    bb, bi, ii = inner(b, b), inner(b, eye), float(n)
    ab, ai = inner(b, a), inner(eye, a)
    det = bb * ii - bi * bi
    if det <= 1e-14 * max(bb * ii, 1.0):
        # b is a multiple of the identity: only the offset is identifiable
        scale, offset = 1.0, (ai - bi) / ii
    else:
        scale = (ab * ii - bi * ai) / det
        offset = (bb * ai - bi * ab) / det
    residual = max_norm(a - (scale * b + offset * eye))
    return Equivalence(bool(scale > 0 and residual <= tol), float(scale), float(offset), residual)


def fidelity(rho: np.ndarray, psi: np.ndarray) -> float:
    """Overlap <psi|rho|psi> after bringing ``rho`` to a unit-trace positive form.

    A positive matrix is divided by its trace.  A traceless (deviation) matrix
    is first lifted by its smallest eigenvalue, which maps a pseudo-pure
    deviation back onto its pure-state projector.  Anything else is evaluated
    as given.
    """
    rho = np.asarray(rho, dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    if rho.shape != (psi.size, psi.size):
        raise ValueError(f"dimension mismatch: {rho.shape} vs {psi.shape}")
    form = rho
    if is_hermitian(rho, 1e-9):
        h = (rho + adjoint(rho)) / 2
        evals = np.linalg.eigvalsh(h)
        tr = float(np.real(np.trace(h)))
        if evals[0] >= -1e-12 and tr > 1e-12:
            form = h / tr
        elif abs(tr) <= 1e-12 and evals[-1] > 1e-12:
            lifted = h - evals[0] * np.eye(h.shape[0])
            form = lifted / np.real(np.trace(lifted))
    return float(np.real(np.vdot(psi, form @ psi)))


def phase_equal(a: np.ndarray, b: np.ndarray, tol: float = DEFAULT_TOL) -> PhaseMatch:
    """Find a unit phase with ``a == phase * b``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    overlap = np.vdot(b, a)
    phase = overlap / abs(overlap) if abs(overlap) > 1e-15 else 1.0 + 0j
    residual = float(np.linalg.norm(a - phase * b))
    return PhaseMatch(residual <= tol, complex(phase), residual)


def operators_phase_equal(a: np.ndarray, b: np.ndarray, tol: float = DEFAULT_TOL) -> PhaseMatch:
    """Phase equality of two operators, checked column by column with one shared phase.

    ``residual`` is the largest column-wise 2-norm mismatch.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    overlap = np.vdot(b, a)  # Frobenius <b, a>
    phase = overlap / abs(overlap) if abs(overlap) > 1e-15 else 1.0 + 0j
    residual = float(np.max(np.linalg.norm(a - phase * b, axis=0)))
    return PhaseMatch(residual <= tol, complex(phase), residual)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from the QR decomposition of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


_PAULI = {"x": 2 * SX, "y": 2 * SY}
AXES = ("x", "-x", "y", "-y")


def rotation(spin, axis: str, angle: float, sign: int = 1) -> np.ndarray:
    """Two-spin rf rotation ``exp(sign * i * angle * I_axis^k)`` for each ``k`` in ``spin``.

    ``spin`` is 1, 2 or a collection of them (a hard pulse).  Uses the closed
    form ``cos(angle/2) + i sin(angle/2) sigma``; ``sign=-1`` selects the
    opposite rotation-sense convention.
    """
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}")
    spins = (spin,) if isinstance(spin, (int, np.integer)) else tuple(spin)
    if not spins or any(k not in (1, 2) for k in spins) or len(set(spins)) != len(spins):
        raise ValueError(f"spins must be a non-empty subset of {{1, 2}}, got {spin!r}")
    theta = sign * (-angle if axis.startswith("-") else angle)
    single = np.cos(theta / 2) * I2 + 1j * np.sin(theta / 2) * _PAULI[axis[-1]]
    factors = [single if k in spins else I2 for k in (1, 2)]
    return kron(factors[0], factors[1])
