"""Small dense operator algebra.

Operators are plain complex ``numpy`` arrays. The two-level basis is ordered
``(|e>, |g>)`` so that ``SIGMA_Z = diag(1, -1)`` and ``SIGMA_PLUS = |e><g|``.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import DimensionError, InvalidOperatorError

HERMITIAN_RTOL = 1e-12
TRACE_ATOL = 1e-9
EIGEN_ATOL = 1e-9
NORMAL_RTOL = 1e-12

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = SIGMA_PLUS.T.copy()
PROJ_E = np.array([[1, 0], [0, 0]], dtype=complex)
PROJ_G = np.array([[0, 0], [0, 1]], dtype=complex)
PSI_PLUS = 0.5 * np.ones((2, 2), dtype=complex)

NAMED_OPERATORS = {
    "identity": IDENTITY,
    "sigma_x": SIGMA_X,
    "sigma_y": SIGMA_Y,
    "sigma_z": SIGMA_Z,
    "sigma_plus": SIGMA_PLUS,
    "sigma_minus": SIGMA_MINUS,
    "proj_e": PROJ_E,
    "proj_g": PROJ_G,
    "psi_plus": PSI_PLUS,
}


def as_matrix(a, name: str = "operator") -> np.ndarray:
    """Coerce ``a`` to a finite square complex array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionError(f"{name} must be a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidOperatorError(f"{name} has non-finite entries")
    return m


def _same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")


def commutator(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    _same_shape(a, b)
    return a @ b - b @ a


def anticommutator(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    _same_shape(a, b)
    return a @ b + b @ a


def dagger(a) -> np.ndarray:
    return np.conj(as_matrix(a)).T


def spectral_norm(a) -> float:
    """Largest singular value."""
    return float(np.linalg.norm(as_matrix(a), 2))


def is_normal(a: np.ndarray, rtol: float = NORMAL_RTOL) -> bool:
    ah = np.conj(a).T
    scale = max(np.abs(a).max(), 1.0) ** 2
    return bool(np.abs(a @ ah - ah @ a).max() <= rtol * scale)


def matrix_exponential(a) -> np.ndarray:
    """Matrix exponential.

    Normal matrices go through a complex Schur form, which is diagonal for them
    and gives an exactly unitary eigenbasis; everything else uses Pade
    scaling-and-squaring.
    """
    a = as_matrix(a)
    if is_normal(a):
        t, z = scipy.linalg.schur(a, output="complex")
        return (z * np.exp(np.diag(t))) @ np.conj(z).T
    return scipy.linalg.expm(a)


def pauli_assemble(c0=0.0, cx=0.0, cy=0.0, cz=0.0) -> np.ndarray:
    """Return ``c0 I + cx sx + cy sy + cz sz``."""
    return c0 * IDENTITY + cx * SIGMA_X + cy * SIGMA_Y + cz * SIGMA_Z


def pauli_coefficients(m) -> tuple[complex, complex, complex, complex]:
    """Inverse of :func:`pauli_assemble` via ``tr(sigma_a M) / 2``."""
    m = as_matrix(m)
    if m.shape != (2, 2):
        raise DimensionError("Pauli decomposition needs a 2x2 matrix")
    return tuple(complex(np.trace(s @ m)) / 2 for s in (IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z))


def hermiticity_defect(a) -> float:
    a = as_matrix(a)
    return float(np.abs(a - np.conj(a).T).max())


def check_hermitian(a, name: str = "operator", rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    a = as_matrix(a, name)
    scale = np.abs(a).max()
    if hermiticity_defect(a) > rtol * max(scale, 1e-300):
        raise InvalidOperatorError(f"{name} is not Hermitian")
    return a


def check_density_matrix(
    rho, name: str = "rho", trace_atol: float = TRACE_ATOL, eigen_atol: float = EIGEN_ATOL
) -> np.ndarray:
    """Validate a density matrix: Hermitian, unit trace, positive semidefinite."""
    rho = check_hermitian(rho, name)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > trace_atol:
        raise InvalidOperatorError(f"{name} has trace {tr:.12g}, expected 1")
    lam_min = np.linalg.eigvalsh(0.5 * (rho + np.conj(rho).T)).min()
    if lam_min < -eigen_atol:
        raise InvalidOperatorError(f"{name} has negative eigenvalue {lam_min:.3g}")
    return rho


def ket_to_density(ket) -> np.ndarray:
    psi = np.asarray(ket, dtype=complex).ravel()
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        raise InvalidOperatorError("zero state vector")
    psi = psi / nrm
    return np.outer(psi, np.conj(psi))
