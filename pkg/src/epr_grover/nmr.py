"""Pulse-level simulation of a heteronuclear two-spin system (13C, 1H).

Rotations follow ``X_k(phi) = exp(+i phi I_x^k)`` and ``Y_k(phi) =
exp(+i phi I_y^k)``; a pulse written ``[phi]_y^k`` is ``Y_k(phi)``.  Delays
evolve under the scalar coupling alone (``mode="coupled"``, doubly rotating
frame) or under the full diagonal Hamiltonian including the Zeeman terms
(``mode="full"``).  Gradient pulses are ideal crushers that remove every
coherence.

Sequences are applied from left to right.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import grover
from .linalg import SZ, apply, kron, rotation, spin_operator

MODES = ("coupled", "full")

IZ1 = spin_operator(SZ, 1)
IZ2 = spin_operator(SZ, 2)
IZZ = kron(SZ, SZ)
_IZ1_DIAG = np.real(np.diag(IZ1))
_IZ2_DIAG = np.real(np.diag(IZ2))
_IZZ_DIAG = np.real(np.diag(IZZ))

# pseudo-pure |uu> deviation: I_z1/2 + I_z2/2 + I_z1 I_z2
RHO_0 = IZ1 / 2 + IZ2 / 2 + IZZ


@dataclass(frozen=True)
class SpinSystem:
    """Chloroform-13C defaults; frequencies and coupling in Hz."""

    nu1: float = 125.76e6
    nu2: float = 500.13e6
    j_coupling: float = 215.0
    gamma_ratio: float = 125.76 / 500.13

    def __post_init__(self):
        if not self.j_coupling > 0:
            raise ValueError(f"j_coupling must be positive, got {self.j_coupling}")
        if self.nu1 < 0 or self.nu2 < 0:
            raise ValueError("resonance frequencies must be non-negative")
        if not self.gamma_ratio > 0:
            raise ValueError(f"gamma_ratio must be positive, got {self.gamma_ratio}")


@dataclass(frozen=True)
class Pulse:
    spins: tuple
    axis: str
    angle: float
    amplitude_error: float = 1.0

    def __post_init__(self):
        spins = (self.spins,) if isinstance(self.spins, int) else tuple(sorted(self.spins))
        object.__setattr__(self, "spins", spins)
        if not math.isfinite(self.angle):
            raise ValueError("pulse angle must be finite")
        if not self.amplitude_error > 0:
            raise ValueError("amplitude_error must be positive")
        rotation(spins, self.axis, 0.0)  # validates spins and axis

    def __str__(self):
        return f"[{self.angle / math.pi:+.4g}pi]_{self.axis}^{','.join(map(str, self.spins))}"


@dataclass(frozen=True)
class Delay:
    """Free evolution, given either as a fraction of 1/J or in seconds.

    With ``refocus_shifts`` the delay ignores Zeeman terms even in full mode.
    """

    fraction_of_inv_j: float | None = None
    seconds: float | None = None
    refocus_shifts: bool = False

    def __post_init__(self):
        if (self.fraction_of_inv_j is None) == (self.seconds is None):
            raise ValueError("give exactly one of fraction_of_inv_j or seconds")
        value = self.fraction_of_inv_j if self.seconds is None else self.seconds
        if not value >= 0:
            raise ValueError("delay duration must be non-negative")

    def duration(self, system: SpinSystem) -> float:
        if self.seconds is not None:
            return self.seconds
        return self.fraction_of_inv_j / system.j_coupling

    def __str__(self):
        if self.seconds is not None:
            return f"{self.seconds:g}s"
        return f"{self.fraction_of_inv_j:g}/J"


@dataclass(frozen=True)
class GradientCrush:
    def __str__(self):
        return "[grad]_z"


SequenceElement = Union[Pulse, Delay, GradientCrush]


@dataclass(frozen=True)
class PulseSequence:
    """Ordered elements plus a bookkeeping phase with no pulse realization."""

    elements: tuple = ()
    phase: complex = 1.0 + 0j

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        for e in self.elements:
            if not isinstance(e, (Pulse, Delay, GradientCrush)):
                raise TypeError(f"not a sequence element: {e!r}")

    def __add__(self, other: "PulseSequence") -> "PulseSequence":
        return PulseSequence(self.elements + other.elements, self.phase * other.phase)

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def __str__(self):
        return " - ".join(str(e) for e in self.elements)


# -- propagators --------------------------------------------------------------


def rotation_pulse(spin, axis: str, angle: float, sign: int = 1) -> np.ndarray:
    """``exp(+i angle I_axis^spin)``; see :func:`epr_grover.linalg.rotation`."""
    return rotation(spin, axis, angle, sign)


def j_evolution(tau: float, system: SpinSystem = SpinSystem()) -> np.ndarray:
    """``exp(-i 2 pi J I_z1 I_z2 tau)``."""
    if tau < 0:
        raise ValueError("tau must be non-negative")
    return np.diag(np.exp(-1j * 2 * np.pi * system.j_coupling * tau * _IZZ_DIAG))


def full_evolution(tau: float, system: SpinSystem = SpinSystem()) -> np.ndarray:
    """``exp(-i H tau)`` with ``H = -2 pi nu1 I_z1 - 2 pi nu2 I_z2 + 2 pi J I_z1 I_z2``."""
    if tau < 0:
        raise ValueError("tau must be non-negative")
    two_pi = 2 * np.pi
    energies = -two_pi * system.nu1 * _IZ1_DIAG - two_pi * system.nu2 * _IZ2_DIAG + two_pi * system.j_coupling * _IZZ_DIAG
    return np.diag(np.exp(-1j * np.mod(energies * tau, 2 * np.pi)))


def gradient_crush(rho: np.ndarray) -> np.ndarray:
    return np.diag(np.diag(np.asarray(rho, dtype=complex)))


def pulse_operator(p: Pulse, sign: int = 1) -> np.ndarray:
    return rotation(p.spins, p.axis, p.angle * p.amplitude_error, sign)


def delay_operator(d: Delay, system: SpinSystem = SpinSystem(), mode: str = "coupled") -> np.ndarray:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    tau = d.duration(system)
    if mode == "full" and not d.refocus_shifts:
        return full_evolution(tau, system)
    return j_evolution(tau, system)


def element_operator(e: SequenceElement, system: SpinSystem = SpinSystem(), mode: str = "coupled", sign: int = 1) -> np.ndarray:
    if isinstance(e, Pulse):
        return pulse_operator(e, sign)
    if isinstance(e, Delay):
        return delay_operator(e, system, mode)
    raise ValueError("a gradient crush has no unitary propagator")


def sequence_propagator(seq: PulseSequence, system: SpinSystem = SpinSystem(), mode: str = "coupled", sign: int = 1) -> np.ndarray:
    """Net unitary of a gradient-free sequence, bookkeeping phase included."""
    u = np.eye(4, dtype=complex)
    for e in seq:
        u = element_operator(e, system, mode, sign) @ u
    return seq.phase * u


def apply_sequence(rho: np.ndarray, seq: PulseSequence, system: SpinSystem = SpinSystem(), mode: str = "coupled", sign: int = 1) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    for e in seq:
        if isinstance(e, GradientCrush):
            rho = gradient_crush(rho)
        else:
            rho = apply(element_operator(e, system, mode, sign), rho)
    return rho


def readout(rho: np.ndarray, pulse: Pulse, sign: int = 1) -> np.ndarray:
    """Apply a single readout rotation, e.g. ``Pulse(1, "y", pi/2)``."""
    if not isinstance(pulse, Pulse):
        raise TypeError("readout takes a single Pulse")
    return apply(pulse_operator(pulse, sign), rho)


# -- states -------------------------------------------------------------------


def equilibrium_deviation(system: SpinSystem = SpinSystem()) -> np.ndarray:
    """``gamma1 I_z1 + gamma2 I_z2`` with gamma2 scaled to 1."""
    return system.gamma_ratio * IZ1 + IZ2


def pseudo_pure_angle(system: SpinSystem = SpinSystem()) -> float:
    """``arccos(gamma1 / (2 gamma2))``, the angle that balances the two populations."""
    x = system.gamma_ratio / 2
    if not -1 <= x <= 1:
        raise ValueError(f"gamma_ratio/2 = {x} outside [-1, 1]")
    return math.acos(x)


# -- compiled sequences ---------------------------------------------------------

HARD = (1, 2)


def refocused_coupling(fraction_of_inv_j: float) -> PulseSequence:
    """``tau/2 - [pi]_x^{1,2} - tau/2 - [-pi]_x^{1,2}``, equivalent to ``[tau]``."""
    half = fraction_of_inv_j / 2
    return PulseSequence((
        Delay(half),
        Pulse(HARD, "x", math.pi),
        Delay(half),
        Pulse(HARD, "x", -math.pi),
    ))


def pseudo_pure_sequence(system: SpinSystem = SpinSystem()) -> PulseSequence:
    """Equilibrium to pseudo-pure |uu> by spatial averaging."""
    alpha = pseudo_pure_angle(system)
    return (
        PulseSequence((Pulse(2, "x", alpha), GradientCrush(), Pulse(1, "x", math.pi / 4)))
        + refocused_coupling(0.5)
        + PulseSequence((Pulse(1, "y", -math.pi / 4), GradientCrush()))
    )


def compile_sign_flip_marked() -> PulseSequence:
    """``[1/J]`` as ``1/2J - [pi]_x^{1,2} - 1/2J - [-pi]_x^{1,2}``; equals diag(1,-1,-1,1) up to phase."""
    return refocused_coupling(1.0)


def compile_sign_flip_source(source_index: int = 0) -> PulseSequence:
    """``I - 2|s><s|`` up to a global phase, for any two-spin basis index.

    ``[1/2J]`` followed by a z rotation on each spin, the z rotation built as
    ``[-pi/2]_y - [beta]_x - [pi/2]_y``.  For ``|uu>`` both betas are -pi/2
    and the pulses merge into hard pulses.
    """
    if source_index not in range(4):
        raise ValueError(f"source_index must be 0..3, got {source_index!r}")
    # m_k = +1 for spin up; beta_k = m_k pi/2 (+ pi when m1 m2 = +1)
    m = (1 if source_index < 2 else -1, 1 if source_index % 2 == 0 else -1)
    betas = [mk * math.pi / 2 + (math.pi if m[0] * m[1] == 1 else 0.0) for mk in m]
    betas = [math.remainder(b, 2 * math.pi) for b in betas]
    if math.isclose(betas[0], betas[1]):
        x_pulses = (Pulse(HARD, "x", betas[0]),)
    else:
        x_pulses = (Pulse(1, "x", betas[0]), Pulse(2, "x", betas[1]))
    return refocused_coupling(0.5) + PulseSequence(
        (Pulse(HARD, "y", -math.pi / 2),) + x_pulses + (Pulse(HARD, "y", math.pi / 2),)
    )


def unitary_pulses(j: int, family: str = "Y", source_index: int = 0, inverse: bool = False) -> PulseSequence:
    rots = grover.preset_rotations(j, source_index, family)
    if inverse:
        return PulseSequence(tuple(Pulse(k, ax, -a) for k, ax, a in reversed(rots)))
    return PulseSequence(tuple(Pulse(k, ax, a) for k, ax, a in rots))


def compile_grover(j: int, n: int, family: str = "Y", source_index: int = 0) -> PulseSequence:
    """``G_j^(n) = U_j Q_j^n`` as pulses; the -1 of each Q is kept in ``phase``."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    u = unitary_pulses(j, family, source_index)
    q = (
        u
        + compile_sign_flip_marked()
        + unitary_pulses(j, family, source_index, inverse=True)
        + compile_sign_flip_source(source_index)
    )
    seq = PulseSequence()
    for _ in range(n):
        seq = seq + q
    seq = seq + u
    return PulseSequence(seq.elements, complex((-1) ** n))


# -- serialization --------------------------------------------------------------


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def element_to_dict(e: SequenceElement) -> dict:
    if isinstance(e, Pulse):
        return {"pulse": {"spins": list(e.spins), "axis": e.axis, "angle_rad": e.angle, "amplitude_error": e.amplitude_error}}
    if isinstance(e, Delay):
        body = {"fraction_of_inv_j": e.fraction_of_inv_j} if e.seconds is None else {"seconds": e.seconds}
        if e.refocus_shifts:
            body["refocus_shifts"] = True
        return {"delay": body}
    return {"gradient": {}}


def element_from_dict(d: dict) -> SequenceElement:
    if len(d) != 1:
        raise ValueError(f"sequence element must have exactly one key, got {sorted(d)}")
    (kind, body), = d.items()
    if kind == "pulse":
        return Pulse(tuple(body["spins"]), body["axis"], float(body["angle_rad"]), float(body.get("amplitude_error", 1.0)))
    if kind == "delay":
        return Delay(
            fraction_of_inv_j=None if "fraction_of_inv_j" not in body else float(body["fraction_of_inv_j"]),
            seconds=None if "seconds" not in body else float(body["seconds"]),
            refocus_shifts=bool(body.get("refocus_shifts", False)),
        )
    if kind == "gradient":
        return GradientCrush()
    raise ValueError(f"unknown sequence element {kind!r}")


def sequence_to_dict(seq: PulseSequence) -> dict:
    return {
        "elements": [element_to_dict(e) for e in seq],
        "global_phase": [seq.phase.real, seq.phase.imag],
    }


def sequence_from_dict(d: dict) -> PulseSequence:
    re, im = d.get("global_phase", [1.0, 0.0])
    return PulseSequence(tuple(element_from_dict(e) for e in d["elements"]), complex(re, im))


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float written to 17 significant digits (round-trip exact)."""
    return _encode(obj, indent, 0) + "\n"


def _encode(obj, indent: int, level: int) -> str:
    if obj is None or isinstance(obj, (bool, str)):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            raise ValueError("non-finite number in output")
        return fmt_float(obj)
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def sequence_dumps(seq: PulseSequence) -> str:
    return dumps(sequence_to_dict(seq))


def sequence_loads(text: str) -> PulseSequence:
    return sequence_from_dict(json.loads(text))
