"""Hybrid quantum-classical dynamics: two qubits coupled to a classical oscillator.

Simulation of Hamiltonian hybrid dynamics in canonical phase-space form plus
diagnostics (spectra, Lyapunov exponents, conservation drift) that separate
regular from chaotic behavior.
"""

from .operators import (
    ModelKind,
    build_quantum_hamiltonian,
    pauli,
    qubit_operator,
    tensor_product,
    unitary_evolve,
)
from .phase_space import (
    QuadraticObservable,
    QuantumPhasePoint,
    coords_to_state,
    eval_observable,
    expectation_sigma,
    gradient,
    quantum_norm,
    random_normalized_state,
    state_to_coords,
)
from .hybrid import (
    HybridModel,
    HybridState,
    ObservableFunction,
    conserved_set,
    poisson_bracket,
    total_energy,
    vector_field,
)
from .integrate import (
    IntegrationError,
    IntegratorConfig,
    IntegratorScheme,
    Trajectory,
    integrate,
    step,
)
from .diagnostics import (
    AmplitudeSpectrum,
    ChaosReport,
    DiagnosticThresholds,
    LyapunovEstimate,
    Verdict,
    amplitude_spectrum,
    chaos_report,
    classify,
    conservation_drift,
    dominant_peak_fraction,
    lyapunov_benettin,
    spectral_flatness,
    tone_flatness_baseline,
)

__version__ = "0.1.0"
