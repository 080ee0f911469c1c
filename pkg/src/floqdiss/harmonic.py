"""Matrix-valued trigonometric polynomials ``P(t) = sum_nu A_nu exp(i nu t)``.

:class:`HarmonicOperator` is closed under addition, matrix product, adjoint,
differentiation and (for zero-mean inputs) integration, and supports the sharp
low-pass used to time-average operator harmonics. Coefficients may be any
square matrices, including superoperators acting on vectorised operators.
"""
from __future__ import annotations

from collections.abc import Iterable, Mapping
from numbers import Number

import numpy as np

from .errors import DimensionError, SecularTermError

FREQ_ATOL = 1e-12
PRUNE_RTOL = 1e-15


class HarmonicOperator:
    """Finite Fourier sum with matrix coefficients.

    Terms whose frequencies coincide within ``FREQ_ATOL`` are merged, and
    coefficients below ``PRUNE_RTOL`` times the largest coefficient are dropped.
    """

    __slots__ = ("_nus", "_coeffs", "dim")
    # make numpy defer ``ndarray @ P`` and ``ndarray + P`` to the reflected methods
    __array_ufunc__ = None

    def __init__(self, terms: Iterable[tuple[float, np.ndarray]] | Mapping = (), dim: int | None = None):
        if isinstance(terms, Mapping):
            terms = terms.items()
        pairs = [(float(nu), np.asarray(a, dtype=complex)) for nu, a in terms]
        shapes = {a.shape for _, a in pairs}
        if len(shapes) > 1:
            raise DimensionError(f"coefficients with different shapes: {sorted(shapes)}")
        if shapes:
            shape = shapes.pop()
            if len(shape) != 2 or shape[0] != shape[1]:
                raise DimensionError(f"coefficients must be square, got {shape}")
            if dim is not None and shape[0] != dim:
                raise DimensionError(f"coefficient dimension {shape[0]} != {dim}")
            dim = shape[0]
        if dim is None:
            raise DimensionError("dimension of an empty HarmonicOperator must be given")
        self.dim = dim
        self._nus, self._coeffs = _merge(pairs, dim)

    # construction helpers -------------------------------------------------
    @classmethod
    def constant(cls, a) -> HarmonicOperator:
        a = np.asarray(a, dtype=complex)
        return cls([(0.0, a)], dim=a.shape[0])

    @classmethod
    def zero(cls, dim: int) -> HarmonicOperator:
        return cls((), dim=dim)

    @classmethod
    def _raw(cls, nus: np.ndarray, coeffs: np.ndarray, dim: int) -> HarmonicOperator:
        obj = cls.__new__(cls)
        obj.dim = dim
        obj._nus, obj._coeffs = nus, coeffs
        return obj

    # views ------------------------------------------------------------------
    @property
    def frequencies(self) -> np.ndarray:
        return self._nus.copy()

    @property
    def coefficients(self) -> np.ndarray:
        return self._coeffs.copy()

    def terms(self) -> list[tuple[float, np.ndarray]]:
        return [(float(nu), a.copy()) for nu, a in zip(self._nus, self._coeffs)]

    def coefficient(self, nu: float, atol: float = FREQ_ATOL) -> np.ndarray:
        """Coefficient at frequency ``nu`` (zero matrix when absent)."""
        idx = np.flatnonzero(np.abs(self._nus - nu) <= atol)
        if idx.size:
            return self._coeffs[idx[0]].copy()
        return np.zeros((self.dim, self.dim), dtype=complex)

    def __len__(self) -> int:
        return len(self._nus)

    def is_empty(self) -> bool:
        return len(self._nus) == 0

    def max_abs_frequency(self) -> float:
        return float(np.abs(self._nus).max()) if len(self) else 0.0

    def norm_bound(self) -> float:
        """Sum of coefficient spectral norms, an upper bound on ``max_t ||P(t)||``."""
        return float(sum(np.linalg.norm(a, 2) for a in self._coeffs))

    def __repr__(self) -> str:
        freqs = ", ".join(f"{nu:.6g}" for nu in self._nus)
        return f"HarmonicOperator(dim={self.dim}, frequencies=[{freqs}])"

    # evaluation -----------------------------------------------------------
    def at(self, t: float) -> np.ndarray:
        if not len(self):
            return np.zeros((self.dim, self.dim), dtype=complex)
        phases = np.exp(1j * self._nus * t)
        return np.tensordot(phases, self._coeffs, axes=1)

    __call__ = at

    def sample(self, times) -> np.ndarray:
        """Evaluate on an array of times; returns shape ``(len(times), dim, dim)``."""
        times = np.asarray(times, dtype=float)
        if not len(self):
            return np.zeros((times.size, self.dim, self.dim), dtype=complex)
        phases = np.exp(1j * np.outer(times, self._nus))
        return np.tensordot(phases, self._coeffs, axes=1)

    # algebra --------------------------------------------------------------
    def _check(self, other: HarmonicOperator) -> None:
        if self.dim != other.dim:
            raise DimensionError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other):
        if isinstance(other, HarmonicOperator):
            self._check(other)
            return HarmonicOperator(self.terms() + other.terms(), dim=self.dim)
        if isinstance(other, np.ndarray):
            return self + HarmonicOperator.constant(other)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self) -> HarmonicOperator:
        return HarmonicOperator._raw(self._nus.copy(), -self._coeffs, self.dim)

    def __sub__(self, other):
        if isinstance(other, (HarmonicOperator, np.ndarray)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, c):
        if isinstance(c, Number):
            if c == 0:
                return HarmonicOperator.zero(self.dim)
            return HarmonicOperator._raw(self._nus.copy(), self._coeffs * complex(c), self.dim)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, c):
        if isinstance(c, Number):
            return self * (1.0 / c)
        return NotImplemented

    def __matmul__(self, other):
        if isinstance(other, np.ndarray):
            other = HarmonicOperator.constant(other)
        if not isinstance(other, HarmonicOperator):
            return NotImplemented
        self._check(other)
        if not len(self) or not len(other):
            return HarmonicOperator.zero(self.dim)
        nus = (self._nus[:, None] + other._nus[None, :]).ravel()
        prods = np.einsum("aij,bjk->abik", self._coeffs, other._coeffs).reshape(-1, self.dim, self.dim)
        return HarmonicOperator(zip(nus, prods), dim=self.dim)

    def __rmatmul__(self, other):
        if isinstance(other, np.ndarray):
            return HarmonicOperator.constant(other) @ self
        return NotImplemented

    def dagger(self) -> HarmonicOperator:
        return HarmonicOperator(
            zip(-self._nus, np.conj(np.swapaxes(self._coeffs, 1, 2))), dim=self.dim
        )

    def derivative(self) -> HarmonicOperator:
        if not len(self):
            return HarmonicOperator.zero(self.dim)
        return HarmonicOperator(zip(self._nus, self._coeffs * (1j * self._nus)[:, None, None]), dim=self.dim)

    def antiderivative(self) -> HarmonicOperator:
        """Zero-mean antiderivative ``sum A_nu / (i nu) exp(i nu t)``.

        Raises :class:`SecularTermError` if a zero-frequency term is present:
        the caller must remove the time average first.
        """
        if np.any(np.abs(self._nus) <= FREQ_ATOL):
            raise SecularTermError("zero-frequency (secular) term cannot be integrated")
        if not len(self):
            return HarmonicOperator.zero(self.dim)
        return HarmonicOperator._raw(
            self._nus.copy(), self._coeffs / (1j * self._nus)[:, None, None], self.dim
        )

    def select(self, mask_fn) -> HarmonicOperator:
        keep = np.array([bool(mask_fn(nu)) for nu in self._nus], dtype=bool)
        return HarmonicOperator._raw(self._nus[keep], self._coeffs[keep], self.dim)

    def average(self, omega_c: float) -> HarmonicOperator:
        """Ideal low-pass: keep harmonics with ``|nu| < omega_c``."""
        return self.select(lambda nu: abs(nu) < omega_c)

    def fast_part(self, omega_c: float) -> HarmonicOperator:
        """Complement of :meth:`average`."""
        return self.select(lambda nu: abs(nu) >= omega_c)

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        """True when ``A_{-nu} = A_nu^dagger`` for every frequency (relative to the largest term)."""
        if not len(self):
            return True
        scale = max(np.abs(self._coeffs).max(), 1e-300)
        for nu, a in zip(self._nus, self._coeffs):
            partner = self.coefficient(-nu)
            if np.abs(partner - np.conj(a).T).max() > atol * scale:
                return False
        return True

    def hermitian_part(self) -> HarmonicOperator:
        return 0.5 * (self + self.dagger())

    def allclose(self, other: HarmonicOperator, atol: float = 1e-12) -> bool:
        diff = self - other
        return diff.is_empty() or float(np.abs(diff._coeffs).max()) <= atol


def _merge(pairs: list[tuple[float, np.ndarray]], dim: int) -> tuple[np.ndarray, np.ndarray]:
    if not pairs:
        return np.zeros(0), np.zeros((0, dim, dim), dtype=complex)
    pairs.sort(key=lambda p: p[0])
    nus: list[float] = []
    coeffs: list[np.ndarray] = []
    for nu, a in pairs:
        if nus and abs(nu - nus[-1]) <= FREQ_ATOL:
            coeffs[-1] = coeffs[-1] + a
        else:
            nus.append(nu)
            coeffs.append(a.copy())
    c = np.array(coeffs)
    mags = np.abs(c).reshape(len(c), -1).max(axis=1)
    top = mags.max()
    keep = mags > PRUNE_RTOL * top if top > 0 else np.zeros(len(c), dtype=bool)
    return np.array(nus)[keep], c[keep]


def commutator(p: HarmonicOperator, q: HarmonicOperator) -> HarmonicOperator:
    return p @ q - q @ p


def anticommutator(p: HarmonicOperator, q: HarmonicOperator) -> HarmonicOperator:
    return p @ q + q @ p


def sandwich(p: HarmonicOperator, rho: np.ndarray, q: HarmonicOperator) -> HarmonicOperator:
    """The harmonic function ``t -> P(t) rho Q(t)`` for a fixed matrix ``rho``."""
    rho = np.asarray(rho, dtype=complex)
    return (p @ rho) @ q


def from_drive(h0: np.ndarray, terms: Iterable[tuple[np.ndarray, float]]) -> HarmonicOperator:
    """Harmonics of ``H0 + sum_m (V_m e^{i w_m t} + h.c.)``."""
    h0 = np.asarray(h0, dtype=complex)
    pairs = [(0.0, h0)]
    for v, w in terms:
        v = np.asarray(v, dtype=complex)
        pairs.append((w, v))
        pairs.append((-w, np.conj(v).T))
    return HarmonicOperator(pairs, dim=h0.shape[0])
