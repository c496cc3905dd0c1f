"""Small dense linear algebra for a two-spin (4-dimensional) Hilbert space.

Everything here works on plain numpy arrays: state vectors of shape (4,)
and operators of shape (4, 4), complex128.  The basis ordering is
|00>, |01>, |10>, |11> with spin 1 as the left tensor factor.  Functions
that promise Hermitian / unitary / density-matrix inputs check them and
raise ValueError, so numerical garbage fails loudly instead of
propagating.
"""

from __future__ import annotations

import numpy as np

# Input validation tolerances (max-abs deviation).
HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
DENSITY_TOL = 1e-10
STATE_NORM_TOL = 1e-10

PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}

PAULI_LABELS = ("I", "X", "Y", "Z")


def pauli_string(first: str, second: str) -> np.ndarray:
    """Kronecker product sigma_first (x) sigma_second, spin 1 on the left.

    Labels must be one of "I", "X", "Y", "Z"; e.g. pauli_string("X", "I")
    acts with sigma_x on spin 1 only.
    """
    for label in (first, second):
        if label not in PAULI:
            raise ValueError(
                f"unknown Pauli label {label!r}; expected one of {PAULI_LABELS}"
            )
    return np.kron(PAULI[first], PAULI[second])


def ket(bits: str) -> np.ndarray:
    """Computational basis vector for a two-bit string such as "01"."""
    if len(bits) != 2 or any(b not in "01" for b in bits):
        raise ValueError(f"expected a two-bit string like '01', got {bits!r}")
    psi = np.zeros(4, dtype=np.complex128)
    psi[int(bits, 2)] = 1.0
    return psi


def singlet_state() -> np.ndarray:
    """The target entangled state (|10> - |01>)/sqrt(2)."""
    return (ket("10") - ket("01")) / np.sqrt(2.0)


def _as_square(a: np.ndarray, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")
    return a


def require_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    h = _as_square(h, "operator")
    dev = np.max(np.abs(h - h.conj().T))
    if dev > tol:
        raise ValueError(f"operator is not Hermitian: max |H - H^dag| = {dev:.3e}")
    return h


def require_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> np.ndarray:
    u = _as_square(u, "operator")
    dev = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if dev > tol:
        raise ValueError(f"operator is not unitary: max |U^dag U - 1| = {dev:.3e}")
    return u


def require_state(psi: np.ndarray, tol: float = STATE_NORM_TOL) -> np.ndarray:
    psi = np.asarray(psi, dtype=np.complex128)
    if psi.ndim != 1:
        raise ValueError(f"state must be a vector, got shape {psi.shape}")
    dev = abs(np.linalg.norm(psi) - 1.0)
    if dev > tol:
        raise ValueError(f"state is not normalized: |norm - 1| = {dev:.3e}")
    return psi


def require_density(rho: np.ndarray, tol: float = DENSITY_TOL) -> np.ndarray:
    """Check trace one, Hermiticity and eigenvalues >= -tol."""
    rho = _as_square(rho, "density matrix")
    require_hermitian(rho, tol)
    tr_dev = abs(np.trace(rho).real - 1.0)
    if tr_dev > tol:
        raise ValueError(f"density matrix trace deviates from 1 by {tr_dev:.3e}")
    lo = np.linalg.eigvalsh(rho).min()
    if lo < -tol:
        raise ValueError(f"density matrix has negative eigenvalue {lo:.3e}")
    return rho


def expm_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i H t) for Hermitian H, via eigendecomposition.

    Exact up to the eigensolver, so it is safe for any t (no step-size
    or truncation assumptions).
    """
    h = require_hermitian(h)
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def state_fidelity(psi: np.ndarray, phi: np.ndarray) -> float:
    """|<psi|phi>|^2 for normalized pure states."""
    psi = require_state(psi)
    phi = require_state(phi)
    return float(abs(np.vdot(psi, phi)) ** 2)


def expectation(rho: np.ndarray, observable: np.ndarray) -> float:
    """Tr(rho O) for a valid density matrix and Hermitian observable."""
    rho = require_density(rho)
    observable = require_hermitian(observable)
    return float(np.trace(rho @ observable).real)
