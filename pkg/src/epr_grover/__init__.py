"""Pseudo-EPR state synthesis on a two-spin NMR system by generalized Grover iteration."""

from .grover import (
    SearchSpec,
    SynthesisResult,
    best_iteration,
    coupling_amplitude,
    epr_presets,
    grover_operator,
    iteration_estimate,
    predicted_target,
    sign_flip_marked,
    sign_flip_source,
    synthesize,
)
from .linalg import adjoint, apply, equiv_deviation, fidelity, kron, phase_equal
from .nmr import (
    Delay,
    GradientCrush,
    Pulse,
    PulseSequence,
    SpinSystem,
    apply_sequence,
    compile_grover,
    compile_sign_flip_marked,
    compile_sign_flip_source,
    equilibrium_deviation,
    full_evolution,
    gradient_crush,
    j_evolution,
    pseudo_pure_sequence,
    readout,
    rotation_pulse,
)
from .spectra import Peak, PhaseReference, calibrate, classify, make_reference, peak_table, render

__version__ = "0.1.0"
