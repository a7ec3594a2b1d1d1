"""Coupled dynamics of the two-qubit system and a classical oscillator.

The full Hamilton function on the product phase space is

    H = H_quantum(x, y) + p^2/(2m) + k*q^2 + q * (c1*hbar*<sz1> + c2*hbar*<sz2>)

Note the oscillator potential is ``k*q^2`` (angular frequency sqrt(2k/m)), not
``k*q^2/2``.  Both canonical sectors evolve under the same Hamilton equations,
which is what makes regular-versus-chaotic questions well posed for the hybrid.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .operators import ModelKind, build_quantum_hamiltonian
from .phase_space import (
    QuadraticObservable,
    QuantumPhasePoint,
    eval_observable,
    expectation_sigma,
    gradient,
    quantum_norm,
)

# diagonal of sigma_z on qubit 1 and qubit 2 in the product basis
_DIAG_Z1 = np.array([1.0, 1.0, -1.0, -1.0])
_DIAG_Z2 = np.array([1.0, -1.0, 1.0, -1.0])


@dataclass(frozen=True)
class HybridModel:
    """Model parameters; defaults are the canonical simulation values."""

    kind: ModelKind = ModelKind.SYMMETRIC
    omega: float = 1.0
    mu: float = 5.0
    beta: float = 1.0
    m: float = 1.0
    k: float = 1.0
    c1: float = 15.0
    c2: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if not isinstance(self.kind, ModelKind):
            object.__setattr__(self, "kind", ModelKind.parse(self.kind))
        for name in ("m", "k", "hbar"):
            if getattr(self, name) <= 0:
                raise ValueError(f"model parameter {name!r} must be positive")
        for name in ("omega", "mu", "beta", "c1", "c2"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"model parameter {name!r} must be finite")


@dataclass(frozen=True)
class HybridState:
    """One point of the hybrid phase space: quantum (x, y) plus classical (q, p)."""

    point: QuantumPhasePoint
    q: float
    p: float

    def as_vector(self) -> np.ndarray:
        """Flatten to (x1..x4, y1..y4, q, p)."""
        return np.concatenate([self.point.x, self.point.y, [self.q, self.p]])

    @classmethod
    def from_vector(cls, vec: np.ndarray) -> "HybridState":
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (10,):
            raise ValueError("hybrid state vector must have 10 components")
        return cls(
            point=QuantumPhasePoint(x=vec[0:4].copy(), y=vec[4:8].copy()),
            q=float(vec[8]),
            p=float(vec[9]),
        )


@dataclass(frozen=True)
class HybridDerivative:
    """Time derivatives of every hybrid coordinate."""

    dx: np.ndarray
    dy: np.ndarray
    dq: float
    dp: float

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.dx, self.dy, [self.dq, self.dp]])


@dataclass(frozen=True)
class ObservableFunction:
    """Labeled real-valued function of a hybrid state.

    ``batch`` optionally evaluates whole (n, 10) state-vector arrays at once;
    the integrator falls back to per-state calls when it is absent.
    """

    label: str
    func: Callable[[HybridState], float]
    batch: Callable[[np.ndarray], np.ndarray] | None = None

    def __call__(self, state: HybridState) -> float:
        return self.func(state)


@lru_cache(maxsize=None)
def _compiled(model: HybridModel):
    """Precomputed real arrays shared by the energy, field, and step kernels."""
    h = build_quantum_hamiltonian(
        model.kind, model.omega, model.mu, model.beta, model.hbar
    )
    obs = QuadraticObservable(h)
    cw = model.c1 * _DIAG_Z1 + model.c2 * _DIAG_Z2  # d(H_eff)/dq diagonal / hbar
    return {
        "h_quantum": obs,
        "rq": obs.r_part,
        "sq": obs.s_part,
        "cw": cw,
        "w4": 0.5 * cw,  # force weights: c1*hbar*<sz1>+c2*hbar*<sz2> = sum w4*(x^2+y^2)
    }


def quantum_hamiltonian_observable(model: HybridModel) -> QuadraticObservable:
    """The model's bare quantum Hamiltonian as a quadratic observable."""
    return _compiled(model)["h_quantum"]


def coupling_expectation(model: HybridModel, point: QuantumPhasePoint) -> float:
    """The oscillator's quantum back-reaction, c1*hbar*<sz1> + c2*hbar*<sz2>."""
    c = _compiled(model)
    return float(c["w4"] @ (point.x**2 + point.y**2))


def total_energy(model: HybridModel, state: HybridState) -> float:
    """Full Hamilton function: quantum + oscillator (k*q^2) + linear coupling."""
    c = _compiled(model)
    h_q = eval_observable(c["h_quantum"], state.point, model.hbar)
    h_cl = state.p**2 / (2.0 * model.m) + model.k * state.q**2
    h_int = state.q * coupling_expectation(model, state.point)
    return h_q + h_cl + h_int


def vector_field(model: HybridModel, state: HybridState) -> HybridDerivative:
    """Hamilton equations for every coordinate.

    dx = dH/dy, dy = -dH/dx, dq = p/m, dp = -2*k*q - (c1*hbar*<sz1> + c2*hbar*<sz2>).
    """
    c = _compiled(model)
    x, y, q = state.point.x, state.point.y, state.q
    gx_q, gy_q = gradient(c["h_quantum"], state.point, model.hbar)
    dx = gy_q + q * c["cw"] * y
    dy = -(gx_q + q * c["cw"] * x)
    dq = state.p / model.m
    dp = -2.0 * model.k * q - coupling_expectation(model, state.point)
    return HybridDerivative(dx=dx, dy=dy, dq=dq, dp=float(dp))


def energy_gradient(model: HybridModel, state: HybridState) -> np.ndarray:
    """Gradient of total_energy in the (x, y, q, p) flattening."""
    c = _compiled(model)
    x, y, q = state.point.x, state.point.y, state.q
    gx_q, gy_q = gradient(c["h_quantum"], state.point, model.hbar)
    gx = gx_q + q * c["cw"] * x
    gy = gy_q + q * c["cw"] * y
    gq = 2.0 * model.k * q + coupling_expectation(model, state.point)
    gp = state.p / model.m
    return np.concatenate([gx, gy, [gq, gp]])


def _quadratic_batch(weights: np.ndarray, scale: float):
    """Batch evaluator for diagonal quadratic observables sum w*(x^2+y^2)."""

    def batch(states: np.ndarray) -> np.ndarray:
        z2 = states[:, 0:8] ** 2
        return scale * (z2[:, 0:4] @ weights + z2[:, 4:8] @ weights)

    return batch


def conserved_set(model: HybridModel) -> list[ObservableFunction]:
    """Exactly conserved observables along the flow of ``model``.

    All models conserve the total energy and the quantum norm.  The symmetric
    model additionally conserves both single-qubit z expectations; the first
    nonsymmetric model keeps only qubit 2's.
    """
    hbar = model.hbar
    c = _compiled(model)
    w4 = c["w4"]

    def energy_batch(states: np.ndarray) -> np.ndarray:
        x = states[:, 0:4]
        y = states[:, 4:8]
        q = states[:, 8]
        p = states[:, 9]
        rq, sq = c["rq"], c["sq"]
        h_q = (
            np.einsum("ni,ij,nj->n", x, rq, x)
            + np.einsum("ni,ij,nj->n", y, rq, y)
            - 2.0 * np.einsum("ni,ij,nj->n", x, sq, y)
        ) / (2.0 * hbar)
        h_cl = p**2 / (2.0 * model.m) + model.k * q**2
        h_int = q * ((x**2) @ w4 + (y**2) @ w4)
        return h_q + h_cl + h_int

    energy = ObservableFunction(
        "total_energy",
        lambda s: total_energy(model, s),
        batch=energy_batch,
    )
    sz1 = ObservableFunction(
        "sigma_z1",
        lambda s: expectation_sigma("z", 1, s.point, hbar),
        batch=_quadratic_batch(_DIAG_Z1, 1.0 / (2.0 * hbar)),
    )
    sz2 = ObservableFunction(
        "sigma_z2",
        lambda s: expectation_sigma("z", 2, s.point, hbar),
        batch=_quadratic_batch(_DIAG_Z2, 1.0 / (2.0 * hbar)),
    )
    norm = ObservableFunction(
        "quantum_norm",
        lambda s: quantum_norm(s.point) / (2.0 * hbar),
        batch=_quadratic_batch(np.ones(4), 1.0 / (2.0 * hbar)),
    )
    if model.kind is ModelKind.SYMMETRIC:
        return [energy, sz1, sz2, norm]
    if model.kind is ModelKind.NONSYMMETRIC_1:
        return [energy, sz2, norm]
    return [energy, norm]


def diagnostic_observables(model: HybridModel) -> list[ObservableFunction]:
    """Observables recorded for their drift but not asserted conserved.

    The bare quantum energy is reported for every model; for the nonsymmetric
    models the broken sigma-z expectations are recorded so their excursions
    are visible in the output.
    """
    hbar = model.hbar
    c = _compiled(model)
    rq, sq = c["rq"], c["sq"]

    def hq_batch(states: np.ndarray) -> np.ndarray:
        x = states[:, 0:4]
        y = states[:, 4:8]
        return (
            np.einsum("ni,ij,nj->n", x, rq, x)
            + np.einsum("ni,ij,nj->n", y, rq, y)
            - 2.0 * np.einsum("ni,ij,nj->n", x, sq, y)
        ) / (2.0 * hbar)

    extras = [
        ObservableFunction(
            "quantum_energy",
            lambda s: eval_observable(c["h_quantum"], s.point, hbar),
            batch=hq_batch,
        )
    ]

    def sigma_obs(qubit: int, diag: np.ndarray) -> ObservableFunction:
        return ObservableFunction(
            f"sigma_z{qubit}",
            lambda s: expectation_sigma("z", qubit, s.point, hbar),
            batch=_quadratic_batch(diag, 1.0 / (2.0 * hbar)),
        )

    # record whichever sigma-z expectations the model does NOT conserve
    if model.kind is ModelKind.NONSYMMETRIC_1:
        extras.append(sigma_obs(1, _DIAG_Z1))
    elif model.kind is ModelKind.NONSYMMETRIC_2:
        extras.append(sigma_obs(1, _DIAG_Z1))
        extras.append(sigma_obs(2, _DIAG_Z2))
    return extras


def poisson_bracket(
    f: ObservableFunction | Callable[[HybridState], float],
    g: ObservableFunction | Callable[[HybridState], float],
    state: HybridState,
    rel_step: float = 1e-6,
    min_step: float = 1e-8,
) -> float:
    """Canonical Poisson bracket {f, g} by central finite differences.

    Sums over the four quantum pairs (x_n, y_n) and the classical pair (q, p).
    Steps are relative to each coordinate's magnitude with an absolute floor.
    """
    f = f.func if isinstance(f, ObservableFunction) else f
    g = g.func if isinstance(g, ObservableFunction) else g
    base = state.as_vector()
    steps = np.maximum(rel_step * np.abs(base), min_step)

    def partials(fn) -> np.ndarray:
        grad = np.empty(10)
        for i in range(10):
            shift = np.zeros(10)
            shift[i] = steps[i]
            hi = fn(HybridState.from_vector(base + shift))
            lo = fn(HybridState.from_vector(base - shift))
            grad[i] = (hi - lo) / (2.0 * steps[i])
        return grad

    df = partials(f)
    dg = partials(g)
    quantum = float(df[0:4] @ dg[4:8] - df[4:8] @ dg[0:4])
    classical = df[8] * dg[9] - df[9] * dg[8]
    return quantum + classical
