"""Inverse design of multichromatic drives that emulate Lindblad dissipation.

Each target jump operator ``L_m`` gets a pair of close tones
``Omega_m L_m (e^{i w_m t} + e^{i (w_m + dw_m) t + i phi_m}) + h.c.``; the beat
of the pair survives coarse-graining and yields the symmetric channel
``L rho L^dagger + L^dagger rho L - {{L, L^dagger}, rho}/2`` with an
oscillating rate.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PairOverlapError
from .harmonic import HarmonicOperator
from .master_equation import dissipator_superop, ff_superop
from .model import FloquetSystem, FloquetTerm, ValidityReport, compute_scales, validate
from .operators import as_matrix

# Lindblad-pair rate per unit |Omega|^2 dw / w^2 implied by the bilinear dissipator
RATE_PREFACTOR = -2.0


@dataclass(frozen=True)
class Jump:
    """One target channel: jump ``L``, Rabi amplitude, carrier, beat and phase (rad/T0, rad)."""

    L: np.ndarray
    amplitude: complex
    carrier: float
    beat: float
    phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "L", as_matrix(self.L, "L"))
        if not self.carrier > 0:
            raise ValueError("carrier frequency must be positive")
        if self.beat < 0:
            raise ValueError("beat must be nonnegative")

    @property
    def tones(self) -> tuple[float, float]:
        return self.carrier, self.carrier + self.beat


@dataclass(frozen=True)
class DissipationTarget:
    jumps: tuple[Jump, ...]
    omega_c: float

    def __post_init__(self):
        object.__setattr__(self, "jumps", tuple(self.jumps))
        if not self.omega_c > 0:
            raise ValueError("omega_c must be positive")
        for j in self.jumps:
            if j.beat >= self.omega_c:
                raise ValueError(f"beat {j.beat:.4g} must lie below omega_c {self.omega_c:.4g}")
            if j.carrier <= self.omega_c:
                raise ValueError(f"carrier {j.carrier:.4g} must lie above omega_c {self.omega_c:.4g}")
        dims = {j.L.shape for j in self.jumps}
        if len(dims) > 1:
            raise ValueError("all jump operators must share one dimension")


@dataclass(frozen=True)
class DesignedDrive:
    """Result of :func:`design`; ``pairs[m]`` indexes the two terms of jump ``m`` in ``system.terms``."""

    system: FloquetSystem
    target: DissipationTarget
    pairs: tuple[tuple[int, int], ...]
    report: ValidityReport = field(compare=False, default=None)


def design(target: DissipationTarget, H0=None) -> DesignedDrive:
    """Build the two-tone-per-jump drive for ``target`` on top of ``H0`` (zero by default).

    Raises :class:`PairOverlapError` when tones of different jumps are closer
    than ``omega_c``, since their cross beats would then survive the filter.
    """
    if H0 is None:
        d = target.jumps[0].L.shape[0] if target.jumps else 2
        H0 = np.zeros((d, d), dtype=complex)
    for (a, ja), (b, jb) in itertools.combinations(enumerate(target.jumps), 2):
        gap = min(abs(x - y) for x in ja.tones for y in jb.tones)
        if gap <= target.omega_c:
            raise PairOverlapError(
                f"jumps {a} and {b} have tones {gap:.4g} rad/T0 apart, not above omega_c={target.omega_c:.4g}"
            )
    terms = []
    for j in target.jumps:
        terms.append(FloquetTerm(j.amplitude * j.L, j.carrier))
        terms.append(FloquetTerm(j.amplitude * np.exp(1j * j.phase) * j.L, j.carrier + j.beat))
    system = FloquetSystem(np.asarray(H0, dtype=complex), tuple(terms))
    pairs = []
    for j in target.jumps:
        idx = [
            k
            for k, term in enumerate(system.terms)
            if any(term.omega == w for w in j.tones) and _same_direction(term.V, j.L)
        ]
        pairs.append(tuple(idx[:2]))
    report = validate(system, compute_scales(system, target.omega_c)) if terms else None
    return DesignedDrive(system, target, tuple(pairs), report)


def _same_direction(v: np.ndarray, L: np.ndarray) -> bool:
    a = np.vdot(L, v)
    return abs(abs(a) - np.linalg.norm(v) * np.linalg.norm(L)) <= 1e-12 * max(abs(a), 1e-300)


def predicted_rate(target: DissipationTarget, m: int, t: float) -> float:
    """Closed-form rate ``-2 |Omega|^2 (dw / w^2) sin(dw t + phi)`` of jump ``m``."""
    j = target.jumps[m]
    return RATE_PREFACTOR * abs(j.amplitude) ** 2 * j.beat / j.carrier**2 * math.sin(j.beat * t + j.phase)


def _pair_system(drive: DesignedDrive, m: int) -> FloquetSystem:
    terms = tuple(drive.system.terms[k] for k in drive.pairs[m])
    return FloquetSystem(drive.system.H0, terms)


def _channel_superop(L: np.ndarray) -> np.ndarray:
    """Superoperator of ``L rho L^dagger + L^dagger rho L - {{L, L^dagger}, rho}/2``."""
    return -dissipator_superop(L, np.conj(L).T)


def pair_superop(drive: DesignedDrive, scales, m: int) -> HarmonicOperator:
    return ff_superop(_pair_system(drive, m), scales)


def realized_rate(drive: DesignedDrive, scales, m: int, t: float, with_residual: bool = False):
    """Exact rate of jump ``m``: projection of its pair's bilinear dissipator on the channel.

    With ``with_residual`` also returns the relative Frobenius norm of what the
    channel does not explain (zero when the recipe is exact in form).
    """
    s = pair_superop(drive, scales, m).at(t)
    b = _channel_superop(drive.target.jumps[m].L)
    rate = float((np.vdot(b, s) / np.vdot(b, b)).real)
    if not with_residual:
        return rate
    norm = np.linalg.norm(s)
    residual = float(np.linalg.norm(s - rate * b) / norm) if norm > 0 else 0.0
    return rate, residual
