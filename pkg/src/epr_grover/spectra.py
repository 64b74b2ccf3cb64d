"""Peak tables, reference-phase calibration, state classification and lineshapes.

Each spin shows a doublet.  Spin 1 (carbon) reads the single-quantum
elements (1,3) and (2,4); spin 2 (proton) reads (1,2) and (3,4).  Indices
are 1-based.  Within a doublet the line whose partner spin is up sits at
``+J/2`` from the spin's centre and the other at ``-J/2``; the left/right
placement in a plotted spectrum depends on the axis direction only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .linalg import is_hermitian
from .nmr import RHO_0, Pulse, SpinSystem, readout

# (spin, element, sign of the J/2 offset)
OBSERVABLES = (
    (1, (1, 3), +1),
    (1, (2, 4), -1),
    (2, (1, 2), +1),
    (2, (3, 4), -1),
)

PEAK_THRESHOLD = 1e-6

# raw signs of elements (1,3), (2,4), (1,2), (3,4) after a [pi/2]_y^1 readout
SIGN_FIXTURES = {
    "psi1": (-1, +1, +1, -1),
    "psi2": (-1, +1, -1, +1),
    "psi3": (+1, -1, +1, -1),
    "psi4": (+1, -1, -1, +1),
}


@dataclass(frozen=True)
class Peak:
    spin: int
    element: tuple
    offset_hz: float
    amplitude: complex
    reference_phase: complex = 1.0 + 0j
    calibrated: bool = False

    @property
    def raw_amplitude(self) -> complex:
        return self.amplitude / self.reference_phase


@dataclass(frozen=True)
class PhaseReference:
    spin: int
    phase: complex

    def __post_init__(self):
        if abs(abs(self.phase) - 1) > 1e-12:
            raise ValueError(f"reference phase must have unit modulus, got {self.phase}")


class StateClassification(NamedTuple):
    label: str
    sign_quadruple: tuple


def peak_table(rho: np.ndarray, system: SpinSystem = SpinSystem()) -> list[Peak]:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"peak table needs a 4x4 density matrix, got {rho.shape}")
    if not is_hermitian(rho, 1e-9):
        raise ValueError("density matrix is not Hermitian")
    half_j = system.j_coupling / 2
    return [
        Peak(spin, element, side * half_j, complex(rho[element[0] - 1, element[1] - 1]))
        for spin, element, side in OBSERVABLES
    ]


def make_reference(spin: int, system: SpinSystem = SpinSystem()) -> PhaseReference:
    """Phase that turns the pseudo-pure |uu> reference peak into positive absorption.

    The reference spectrum is |uu> read out with a selective ``[pi/2]_y`` on
    ``spin``; its one line comes from the -1/2 element (1,3) or (1,2).
    """
    if spin not in (1, 2):
        raise ValueError(f"spin must be 1 or 2, got {spin!r}")
    rho = readout(RHO_0, Pulse(spin, "y", math.pi / 2))
    peaks = [p for p in peak_table(rho, system) if p.spin == spin and abs(p.amplitude) > PEAK_THRESHOLD]
    if len(peaks) != 1:
        raise RuntimeError(f"reference spectrum for spin {spin} has {len(peaks)} lines, expected 1")
    a = peaks[0].amplitude
    return PhaseReference(spin, complex(abs(a) / a))


def calibrate(peaks: Iterable[Peak], references: Mapping[int, PhaseReference] | Iterable[PhaseReference]) -> list[Peak]:
    if not isinstance(references, Mapping):
        references = {r.spin: r for r in references}
    out = []
    for p in peaks:
        if p.spin not in references:
            raise ValueError(f"no phase reference for spin {p.spin}")
        ph = references[p.spin].phase
        out.append(replace(p, amplitude=p.amplitude * ph, reference_phase=p.reference_phase * ph, calibrated=True))
    return out


def classify(peaks: Iterable[Peak]) -> StateClassification:
    """Match the sign pattern of the four raw observable elements to a Bell state."""
    by_element = {p.element: p for p in peaks}
    signs = []
    for _, element, _ in OBSERVABLES:
        p = by_element.get(element)
        raw = 0j if p is None else p.raw_amplitude
        if abs(raw) < PEAK_THRESHOLD or abs(raw.real) < PEAK_THRESHOLD:
            signs.append(0)
        else:
            signs.append(1 if raw.real > 0 else -1)
    quad = tuple(signs)
    for label, fixture in SIGN_FIXTURES.items():
        if quad == fixture:
            return StateClassification(label, quad)
    return StateClassification("unknown", quad)


@dataclass(frozen=True)
class Spectrum:
    spin: int
    freq_hz: np.ndarray
    values: np.ndarray

    def to_csv(self) -> str:
        lines = ["freq_hz,real,imag"]
        for f, v in zip(self.freq_hz, self.values):
            lines.append(f"{f:.17g},{v.real:.17g},{v.imag:.17g}")
        return "\n".join(lines) + "\n"


def default_grid(system: SpinSystem = SpinSystem(), n_points: int = 1024) -> tuple[float, float, int]:
    span = 4 * system.j_coupling
    return (-span, span, n_points)


def render(
    peaks: Iterable[Peak],
    system: SpinSystem = SpinSystem(),
    linewidth_hz: float = 2.0,
    grid: tuple[float, float, int] | None = None,
) -> dict[int, Spectrum]:
    """Sum of complex Lorentzians ``a (w/2) / (w/2 + i (f - f_peak))`` per spin.

    Frequencies are offsets from each spin's rotating-frame centre; the real
    part is the absorption spectrum.
    """
    if not linewidth_hz > 0:
        raise ValueError("linewidth must be positive")
    lo, hi, n = default_grid(system) if grid is None else grid
    if int(n) != n or n < 2 or not hi > lo:
        raise ValueError(f"invalid grid {grid!r}")
    f = np.linspace(lo, hi, int(n))
    hw = linewidth_hz / 2
    out = {spin: np.zeros(f.shape, dtype=complex) for spin in (1, 2)}
    for p in peaks:
        out[p.spin] += p.amplitude * hw / (hw + 1j * (f - p.offset_hz))
    return {spin: Spectrum(spin, f, vals) for spin, vals in out.items()}


def peaks_to_records(peaks: Iterable[Peak]) -> list[dict]:
    return [
        {
            "spin": p.spin,
            "element": list(p.element),
            "offset_hz": float(p.offset_hz),
            "re": float(p.amplitude.real),
            "im": float(p.amplitude.imag),
            "calibrated": p.calibrated,
        }
        for p in peaks
    ]
