"""Two-qubit operator algebra and the diagonalization-based evolution oracle.

Basis convention used everywhere in this package: the four product states are
ordered (++, +-, -+, --), where the first sign is the z eigenvalue of qubit 1
and the second of qubit 2.  Qubit 1 is the slow (outer) index of the tensor
product, so ``sigma_z on qubit 1 = diag(+1, +1, -1, -1)``.
"""

from __future__ import annotations

import enum

import numpy as np

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

_PAULI = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z, "i": IDENTITY_2}


class ModelKind(enum.Enum):
    """The three two-qubit Hamiltonians the package simulates.

    SYMMETRIC conserves the z projection of each qubit separately.
    NONSYMMETRIC_1 adds a transverse (y) drive on qubit 1, leaving only
    qubit 2's z projection conserved.  NONSYMMETRIC_2 replaces the zz
    interaction with an xx exchange, conserving neither.
    """

    SYMMETRIC = "symmetric"
    NONSYMMETRIC_1 = "nonsymmetric1"
    NONSYMMETRIC_2 = "nonsymmetric2"

    @classmethod
    def parse(cls, name: str) -> "ModelKind":
        key = name.strip().lower().replace("-", "").replace("_", "")
        aliases = {
            "symmetric": cls.SYMMETRIC,
            "s": cls.SYMMETRIC,
            "nonsymmetric1": cls.NONSYMMETRIC_1,
            "ns1": cls.NONSYMMETRIC_1,
            "nonsymmetric2": cls.NONSYMMETRIC_2,
            "ns2": cls.NONSYMMETRIC_2,
        }
        if key not in aliases:
            raise ValueError(f"unknown model kind {name!r}")
        return aliases[key]


def pauli(axis: str) -> np.ndarray:
    """Return a copy of the single-qubit Pauli matrix for ``axis`` in {x, y, z, i}."""
    try:
        return _PAULI[axis.strip().lower()].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}") from None


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the first factor as the slow index."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise ValueError("tensor_product expects two 2x2 matrices")
    return np.kron(a, b)


def qubit_operator(axis: str, qubit: int) -> np.ndarray:
    """Single-qubit Pauli ``axis`` acting on ``qubit`` (1 or 2) of the pair."""
    if qubit == 1:
        return tensor_product(pauli(axis), IDENTITY_2)
    if qubit == 2:
        return tensor_product(IDENTITY_2, pauli(axis))
    raise ValueError(f"qubit index must be 1 or 2, got {qubit}")


def hermiticity_defect(matrix: np.ndarray) -> float:
    """Largest absolute deviation of ``matrix`` from its conjugate transpose."""
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("hermiticity_defect expects a square matrix")
    return float(np.abs(m - m.conj().T).max())


def build_quantum_hamiltonian(
    kind: ModelKind | str,
    omega: float,
    mu: float,
    beta: float = 1.0,
    hbar: float = 1.0,
) -> np.ndarray:
    """Assemble the 4x4 quantum Hamiltonian for one of the three models.

    All models share the free part ``hbar*omega*(sz1 + sz2)``.  SYMMETRIC adds
    ``hbar*mu*sz1*sz2``, NONSYMMETRIC_1 further adds ``hbar*beta*sy1``, and
    NONSYMMETRIC_2 uses ``hbar*mu*sx1*sx2`` instead of the zz term.  ``beta``
    only enters NONSYMMETRIC_1 and is ignored elsewhere.
    """
    kind = kind if isinstance(kind, ModelKind) else ModelKind.parse(kind)
    sz1 = qubit_operator("z", 1)
    sz2 = qubit_operator("z", 2)
    free = hbar * omega * (sz1 + sz2)
    if kind is ModelKind.SYMMETRIC:
        return free + hbar * mu * (sz1 @ sz2)
    if kind is ModelKind.NONSYMMETRIC_1:
        return free + hbar * mu * (sz1 @ sz2) + hbar * beta * qubit_operator("y", 1)
    return free + hbar * mu * (qubit_operator("x", 1) @ qubit_operator("x", 2))


def unitary_evolve(
    hamiltonian: np.ndarray,
    psi0: np.ndarray,
    times: float | np.ndarray,
    hbar: float = 1.0,
) -> np.ndarray:
    """Evolve amplitudes exactly: ``psi(t) = exp(-i*H*t/hbar) psi0``.

    Computed through a dense Hermitian eigendecomposition, never by time
    stepping, so it serves as an independent oracle for the integrated flow.
    Accepts a scalar time or an array of times; returns shape ``(4,)`` or
    ``(len(times), 4)`` accordingly.
    """
    h = np.asarray(hamiltonian, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("hamiltonian must be a square matrix")
    defect = hermiticity_defect(h)
    if defect > 1e-12:
        raise ValueError(
            f"hamiltonian is not Hermitian (max asymmetry {defect:.3e})"
        )
    psi = np.asarray(psi0, dtype=complex)
    if psi.shape != (h.shape[0],):
        raise ValueError("psi0 has the wrong dimension for this hamiltonian")
    if hbar <= 0:
        raise ValueError("hbar must be positive")
    if np.ndim(times) == 0 and times == 0.0:
        return psi.copy()  # identity propagator, no reconstruction roundoff

    energies, vectors = np.linalg.eigh(h)
    coeffs = vectors.conj().T @ psi
    t = np.asarray(times, dtype=float)
    phases = np.exp(-1j * np.multiply.outer(t, energies) / hbar)
    return (phases * coeffs) @ vectors.T
