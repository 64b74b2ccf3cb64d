"""Generalized Grover iteration ``Q = -I_s U^dagger I_t U`` in arbitrary dimension.

A :class:`SearchSpec` fixes the source basis state ``s``, the marked set ``T``
and the unitary ``U``.  Iterating ``Q`` rotates ``|s>`` inside the plane
spanned by ``|s>`` and ``U^dagger`` applied to the marked component of
``U|s>``; a final ``U`` maps the result onto ``sum_t U_ts |t> / u``.

The pseudo-EPR presets reproduce the two-spin tables: the source is
``|uu>`` (or ``|ud>``), ``U`` is a product of one selective rotation per
spin, and the marked pair is ``{|uu>, |dd>}`` or ``{|ud>, |du>}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .linalg import (
    adjoint,
    basis_state,
    haar_unitary,
    is_unitary,
    rotation,
)

FAMILIES = ("Y", "X")


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SearchSpec:
    """One generalized-search instance.

    ``oracle_sign`` multiplies the marked-set sign flip; the two-spin presets
    use it to reuse one diagonal for both marked pairs.  ``target`` optionally
    pins the labelled output state against which fidelity and phase are
    measured; otherwise the predicted superposition ``U |psi>`` is used.
    """

    dim: int
    source: int
    marked: frozenset
    unitary: np.ndarray = field(repr=False)
    oracle_sign: int = 1
    target: np.ndarray | None = field(default=None, repr=False)
    label: str = ""

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim!r}")
        if not 0 <= self.source < self.dim:
            raise ValueError(f"source {self.source} out of range for dimension {self.dim}")
        marked = frozenset(int(t) for t in self.marked)
        if not marked:
            raise ValueError("marked set must be non-empty")
        if any(not 0 <= t < self.dim for t in marked):
            raise ValueError(f"marked indices {sorted(marked)} out of range for dimension {self.dim}")
        object.__setattr__(self, "marked", marked)
        u = _frozen(self.unitary)
        if u.shape != (self.dim, self.dim):
            raise ValueError(f"unitary has shape {u.shape}, expected ({self.dim}, {self.dim})")
        if not is_unitary(u):
            raise ValueError("unitary fails the unitarity check")
        object.__setattr__(self, "unitary", u)
        if self.oracle_sign not in (1, -1):
            raise ValueError("oracle_sign must be +1 or -1")
        if self.target is not None:
            t = _frozen(self.target)
            if t.shape != (self.dim,) or abs(np.linalg.norm(t) - 1) > 1e-12:
                raise ValueError("target must be a normalized vector of length dim")
            object.__setattr__(self, "target", t)

    @property
    def r(self) -> int:
        return len(self.marked)


class SynthesisResult(NamedTuple):
    state: np.ndarray
    iterations: int
    fidelity_to_target: float
    global_phase: complex


def sign_flip_source(dim: int, s: int) -> np.ndarray:
    """``I - 2|s><s|``."""
    if not 0 <= s < dim:
        raise ValueError(f"source index {s} out of range for dimension {dim}")
    d = np.ones(dim, dtype=complex)
    d[s] = -1
    return np.diag(d)


def sign_flip_marked(dim: int, marked: Iterable[int]) -> np.ndarray:
    """``I - 2 sum_t |t><t|``."""
    marked = set(int(t) for t in marked)
    if not marked:
        raise ValueError("marked set must be non-empty")
    if any(not 0 <= t < dim for t in marked):
        raise ValueError(f"marked indices {sorted(marked)} out of range for dimension {dim}")
    d = np.ones(dim, dtype=complex)
    d[sorted(marked)] = -1
    return np.diag(d)


def marked_operator(spec: SearchSpec) -> np.ndarray:
    return spec.oracle_sign * sign_flip_marked(spec.dim, spec.marked)


def grover_operator(spec: SearchSpec) -> np.ndarray:
    u = spec.unitary
    return -sign_flip_source(spec.dim, spec.source) @ adjoint(u) @ marked_operator(spec) @ u


def coupling_amplitude(spec: SearchSpec) -> float:
    """``u = sqrt(sum_t |U_ts|^2)``."""
    col = spec.unitary[sorted(spec.marked), spec.source]
    return float(np.sqrt(np.sum(np.abs(col) ** 2)))


def predicted_target(spec: SearchSpec) -> np.ndarray:
    """``(1/u) sum_t U_ts U^dagger |t>``, the state Q rotates ``|s>`` towards."""
    u = coupling_amplitude(spec)
    if u <= 0:
        raise ValueError("source is not coupled to the marked set through U (u = 0)")
    v = np.zeros(spec.dim, dtype=complex)
    idx = sorted(spec.marked)
    v[idx] = spec.unitary[idx, spec.source]
    return adjoint(spec.unitary) @ v / u


def target_state(spec: SearchSpec) -> np.ndarray:
    if spec.target is not None:
        return np.array(spec.target)
    return spec.unitary @ predicted_target(spec)


def evolve(spec: SearchSpec, n: int) -> np.ndarray:
    """``U Q^n |s>``."""
    if n < 0:
        raise ValueError(f"iteration count must be non-negative, got {n}")
    q = grover_operator(spec)
    psi = basis_state(spec.dim, spec.source)
    for _ in range(n):
        psi = q @ psi
    return spec.unitary @ psi


def _score(state: np.ndarray, target: np.ndarray) -> tuple[float, complex]:
    overlap = np.vdot(target, state)
    mag = abs(overlap)
    phase = overlap / mag if mag > 1e-15 else 1.0 + 0j
    return float(min(mag**2, 1.0)), complex(phase)


def synthesize(spec: SearchSpec, n: int) -> SynthesisResult:
    state = evolve(spec, n)
    fid, phase = _score(state, target_state(spec))
    return SynthesisResult(state, n, fid, phase)


def fidelity_sweep(spec: SearchSpec, ns: Iterable[int]) -> list[SynthesisResult]:
    """Synthesis results for each ``n`` in ``ns``, sharing one operator build."""
    ns = list(ns)
    q = grover_operator(spec)
    target = target_state(spec)
    results = []
    psi = basis_state(spec.dim, spec.source)
    done = 0
    for n in sorted(set(ns)):
        if n < 0:
            raise ValueError(f"iteration count must be non-negative, got {n}")
        for _ in range(n - done):
            psi = q @ psi
        done = n
        state = spec.unitary @ psi
        fid, phase = _score(state, target)
        results.append(SynthesisResult(state, n, fid, phase))
    by_n = {r.iterations: r for r in results}
    return [by_n[n] for n in ns]


def iteration_estimate(u: float) -> int:
    """Asymptotic iteration count ``pi / (4u)`` rounded to nearest, at least 1.

    Only meaningful for ``u << 1``; :func:`best_iteration` is exact.
    """
    if not 0 < u <= 1:
        raise ValueError(f"coupling amplitude must lie in (0, 1], got {u}")
    return max(1, int(math.floor(math.pi / (4 * u) + 0.5)))


def best_iteration(spec: SearchSpec, n_max: int) -> tuple[int, float]:
    """Smallest ``n`` in ``[0, n_max]`` maximizing fidelity to the target."""
    if n_max < 1:
        raise ValueError(f"n_max must be at least 1, got {n_max}")
    best_n, best_f = 0, -1.0
    for res in fidelity_sweep(spec, range(n_max + 1)):
        # plateau ties within rounding go to the smaller n
        if res.fidelity_to_target > best_f + 1e-12:
            best_n, best_f = res.iterations, res.fidelity_to_target
    return best_n, best_f


def random_spec(dim: int, rng: np.random.Generator, n_marked: int = 1, source: int = 0) -> SearchSpec:
    u = haar_unitary(dim, rng)
    marked = rng.choice(dim, size=n_marked, replace=False)
    return SearchSpec(dim, source, frozenset(int(t) for t in marked), u)


# -- two-spin pseudo-EPR presets -------------------------------------------

_Q = math.pi / 4

# (source, family) -> j -> (spin-1 axis, spin-1 angle, spin-2 angle); spin 2 is always y
PRESET_TABLE = {
    (0, "Y"): {1: ("y", _Q, 3 * _Q), 2: ("y", _Q, -3 * _Q), 3: ("y", _Q, _Q), 4: ("y", -_Q, _Q)},
    (1, "Y"): {1: ("y", -_Q, _Q), 2: ("y", _Q, _Q), 3: ("y", _Q, -3 * _Q), 4: ("y", _Q, 3 * _Q)},
    (0, "X"): {1: ("x", _Q, 3 * _Q), 2: ("x", _Q, -3 * _Q), 3: ("x", _Q, _Q), 4: ("x", _Q, -_Q)},
}

_R2 = 1 / math.sqrt(2)
BELL_STATES = {
    1: np.array([_R2, 0, 0, _R2], dtype=complex),
    2: np.array([_R2, 0, 0, -_R2], dtype=complex),
    3: np.array([0, _R2, _R2, 0], dtype=complex),
    4: np.array([0, _R2, -_R2, 0], dtype=complex),
}
# X-family outputs carry a -/+ i relative phase
PHASED_BELL_STATES = {
    1: np.array([_R2, 0, 0, -1j * _R2]),
    2: np.array([_R2, 0, 0, 1j * _R2]),
    3: np.array([0, _R2, -1j * _R2, 0]),
    4: np.array([0, _R2, 1j * _R2, 0]),
}

STATE_LABELS = {
    ("Y", 1): "(|uu> + |dd>)/sqrt2",
    ("Y", 2): "(|uu> - |dd>)/sqrt2",
    ("Y", 3): "(|ud> + |du>)/sqrt2",
    ("Y", 4): "(|ud> - |du>)/sqrt2",
    ("X", 1): "(|uu> - i|dd>)/sqrt2",
    ("X", 2): "(|uu> + i|dd>)/sqrt2",
    ("X", 3): "(|ud> - i|du>)/sqrt2",
    ("X", 4): "(|ud> + i|du>)/sqrt2",
}

# one diagonal for both marked pairs: diag(1, -1, -1, 1)
PRESET_MARKED_FLIP = np.diag([1, -1, -1, 1]).astype(complex)


def normalize_family(family: str) -> str:
    f = str(family).upper().removesuffix("-FAMILY")
    if f not in FAMILIES:
        raise ValueError(f"family must be one of {FAMILIES}, got {family!r}")
    return f


def preset_rotations(j: int, source_index: int = 0, family: str = "Y") -> list[tuple[int, str, float]]:
    """``U_j`` as selective rotations ``[(spin, axis, angle), ...]``."""
    family = normalize_family(family)
    key = (source_index, family)
    if key not in PRESET_TABLE:
        raise ValueError(f"no preset table for source {source_index} with {family}-family rotations")
    if j not in PRESET_TABLE[key]:
        raise ValueError(f"j must be 1, 2, 3 or 4, got {j!r}")
    axis1, a1, a2 = PRESET_TABLE[key][j]
    return [(1, axis1, a1), (2, "y", a2)]


def preset_unitary(j: int, source_index: int = 0, family: str = "Y", sign: int = 1) -> np.ndarray:
    u = np.eye(4, dtype=complex)
    for spin, axis, angle in preset_rotations(j, source_index, family):
        u = rotation(spin, axis, angle, sign) @ u
    return u


def epr_presets(j: int, source_index: int = 0, family: str = "Y", sign: int = 1) -> SearchSpec:
    """The tabulated pseudo-EPR search instance for target ``j``.

    The marked pair is {|uu>, |dd>} for j in {1, 2} and {|ud>, |du>} for
    j in {3, 4}.  Both pairs use the same sign-flip diagonal
    ``diag(1, -1, -1, 1)``; for the first pair that is ``-I_t``, recorded as
    ``oracle_sign = -1``.  With this choice ``U Q |s> = -|psi_j>`` for every
    source-|uu> preset.
    """
    family = normalize_family(family)
    u = preset_unitary(j, source_index, family, sign)
    marked = frozenset({0, 3}) if j in (1, 2) else frozenset({1, 2})
    oracle_sign = -1 if j in (1, 2) else 1
    target = (BELL_STATES if family == "Y" else PHASED_BELL_STATES)[j]
    return SearchSpec(4, source_index, marked, u, oracle_sign, target, f"psi{j}")


def preset_keys() -> list[tuple[int, str, int]]:
    return [(s, f, j) for (s, f), table in PRESET_TABLE.items() for j in table]
