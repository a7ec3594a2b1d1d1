"""Canonical phase-space picture of the two-qubit state.

Complex amplitudes map to real canonical pairs through
``c_n = (x_n + i*y_n) / sqrt(2*hbar)``, so a normalized state satisfies
``sum(x^2 + y^2) = 2*hbar``.  Expectation values of Hermitian operators become
quadratic functions of (x, y); their gradients drive the Hamiltonian flow that
reproduces the Schrodinger equation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .operators import hermiticity_defect, qubit_operator

DIM = 4

#: tolerance on sum|c|^2 = 1 when validating explicit initial amplitudes
NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class QuantumPhasePoint:
    """Real canonical coordinates (x, y) of a four-level quantum state."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.shape != (DIM,) or y.shape != (DIM,):
            raise ValueError(f"phase point coordinates must have shape ({DIM},)")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)


def state_to_coords(psi: np.ndarray, hbar: float = 1.0) -> QuantumPhasePoint:
    """Map complex amplitudes to canonical coordinates, x + i*y = sqrt(2*hbar)*psi."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (DIM,):
        raise ValueError(f"state must have {DIM} amplitudes")
    if hbar <= 0:
        raise ValueError("hbar must be positive")
    s = np.sqrt(2.0 * hbar)
    return QuantumPhasePoint(x=s * psi.real, y=s * psi.imag)


def coords_to_state(point: QuantumPhasePoint, hbar: float = 1.0) -> np.ndarray:
    """Inverse of :func:`state_to_coords`."""
    if hbar <= 0:
        raise ValueError("hbar must be positive")
    return (point.x + 1j * point.y) / np.sqrt(2.0 * hbar)


def quantum_norm(point: QuantumPhasePoint) -> float:
    """Phase-space norm sum(x^2 + y^2); equals 2*hbar for a normalized state."""
    return float(np.dot(point.x, point.x) + np.dot(point.y, point.y))


def check_normalized(point: QuantumPhasePoint, hbar: float = 1.0) -> None:
    """Raise unless the underlying amplitudes are normalized within tolerance.

    Enforced when initial conditions are constructed; the flow itself is never
    re-projected, so norm drift stays observable as an integration diagnostic.
    """
    excess = abs(quantum_norm(point) / (2.0 * hbar) - 1.0)
    if excess > NORMALIZATION_TOL:
        raise ValueError(
            f"quantum state is not normalized: sum|c|^2 deviates by {excess:.3e}"
        )


def random_normalized_state(rng: np.random.Generator) -> np.ndarray:
    """Draw a Haar-like random normalized 4-level state from ``rng``."""
    raw = rng.standard_normal(DIM) + 1j * rng.standard_normal(DIM)
    return raw / np.linalg.norm(raw)


@dataclass(frozen=True)
class QuadraticObservable:
    """Hermitian operator viewed as a quadratic form on phase space.

    The matrix splits into ``R + i*S`` with R real symmetric and S real
    antisymmetric; the observable evaluates as
    ``scale/(2*hbar) * (x.R.x + y.R.y - 2*x.S.y)``.
    """

    matrix: np.ndarray
    scale: float = 1.0
    r_part: np.ndarray = field(init=False, repr=False, compare=False)
    s_part: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("observable matrix must be square")
        defect = hermiticity_defect(m)
        if defect > 1e-12:
            raise ValueError(
                f"observable matrix is not Hermitian (max asymmetry {defect:.3e})"
            )
        object.__setattr__(self, "matrix", m)
        # symmetrize so eval/gradient are exactly real even at roundoff level
        object.__setattr__(self, "r_part", 0.5 * (m.real + m.real.T))
        object.__setattr__(self, "s_part", 0.5 * (m.imag - m.imag.T))


def eval_observable(
    obs: QuadraticObservable, point: QuantumPhasePoint, hbar: float = 1.0
) -> float:
    """Expectation value of ``obs`` at ``point``: scale/(2h)*(xRx + yRy - 2xSy)."""
    r, s = obs.r_part, obs.s_part
    x, y = point.x, point.y
    val = x @ (r @ x) + y @ (r @ y) - 2.0 * (x @ (s @ y))
    return float(obs.scale * val / (2.0 * hbar))


def gradient(
    obs: QuadraticObservable, point: QuantumPhasePoint, hbar: float = 1.0
) -> tuple[np.ndarray, np.ndarray]:
    """Partial derivatives of the quadratic form with respect to x and y."""
    r, s = obs.r_part, obs.s_part
    x, y = point.x, point.y
    gx = (r @ x - s @ y) * (obs.scale / hbar)
    gy = (r @ y + s @ x) * (obs.scale / hbar)
    return gx, gy


@lru_cache(maxsize=None)
def sigma_observable(axis: str, qubit: int) -> QuadraticObservable:
    """Cached quadratic form of a single-qubit Pauli acting on the pair."""
    return QuadraticObservable(qubit_operator(axis, qubit))


def expectation_sigma(
    axis: str, qubit: int, point: QuantumPhasePoint, hbar: float = 1.0
) -> float:
    """Expectation of the Pauli ``axis`` on ``qubit`` at a phase point."""
    return eval_observable(sigma_observable(axis, qubit), point, hbar)
