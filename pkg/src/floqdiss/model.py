"""Multichromatically driven systems ``H(t) = H0 + sum_m (V_m e^{i w_m t} + h.c.)``."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, InvalidOperatorError
from .harmonic import HarmonicOperator, from_drive
from .operators import as_matrix, check_hermitian, spectral_norm

DEFAULT_EPS_THRESHOLD = 0.4


@dataclass(frozen=True)
class FloquetTerm:
    """One drive tone ``V e^{i omega t} + h.c.``; ``omega`` in rad/T0."""

    V: np.ndarray
    omega: float

    def __post_init__(self):
        v = as_matrix(self.V, "V")
        if not np.any(v):
            raise InvalidOperatorError("Floquet operator V must be nonzero")
        if not (np.isfinite(self.omega) and self.omega > 0):
            raise InvalidOperatorError(f"Floquet frequency must be positive, got {self.omega}")
        object.__setattr__(self, "V", v)
        object.__setattr__(self, "omega", float(self.omega))


@dataclass(frozen=True)
class FloquetSystem:
    """Static Hamiltonian plus drive tones, kept sorted by ascending frequency."""

    H0: np.ndarray
    terms: tuple[FloquetTerm, ...] = ()
    t0: float = 0.0

    def __post_init__(self):
        h0 = check_hermitian(self.H0, "H0")
        terms = tuple(sorted(self.terms, key=lambda term: term.omega))
        for term in terms:
            if term.V.shape != h0.shape:
                raise DimensionError(f"Floquet operator shape {term.V.shape} != H0 shape {h0.shape}")
        object.__setattr__(self, "H0", h0)
        object.__setattr__(self, "terms", terms)

    @property
    def dim(self) -> int:
        return self.H0.shape[0]

    @property
    def omegas(self) -> np.ndarray:
        return np.array([term.omega for term in self.terms])

    def drive(self) -> HarmonicOperator:
        """Harmonics of the Floquet part ``H_F(t)``."""
        return from_drive(np.zeros_like(self.H0), [(term.V, term.omega) for term in self.terms])

    def hamiltonian(self) -> HarmonicOperator:
        return self.drive() + self.H0


def hamiltonian_at(system: FloquetSystem, t: float) -> np.ndarray:
    h = system.H0.copy()
    for term in system.terms:
        x = term.V * np.exp(1j * term.omega * t)
        h += x + np.conj(x).T
    return h


@dataclass(frozen=True)
class SpectralScales:
    Omega: float
    omega_min: float
    epsilon: float
    omega_c: float
    max_beat: float
    pair_scales: dict = field(default_factory=dict)

    def pair_scale(self, m: int, n: int) -> float:
        """``w_{mn-}`` defined by ``1/w_{mn-} = (1/w_m - 1/w_n) / 2``."""
        return self.pair_scales[(m, n)]


def compute_scales(system: FloquetSystem, omega_c: float) -> SpectralScales:
    if not omega_c > 0:
        raise ValueError("omega_c must be positive")
    norms = [spectral_norm(system.H0)] + [spectral_norm(term.V) for term in system.terms]
    big_omega = max(norms)
    omegas = system.omegas
    omega_min = float(omegas.min()) if omegas.size else float("inf")
    max_beat = float(omegas.max() - omegas.min()) if omegas.size else 0.0
    pairs = {}
    for m, n in itertools.combinations(range(len(omegas)), 2):
        inv = 0.5 * (1.0 / omegas[m] - 1.0 / omegas[n])
        pairs[(m, n)] = 1.0 / inv if inv != 0 else float("inf")
    eps = big_omega / omega_min if omegas.size else 0.0
    return SpectralScales(big_omega, omega_min, eps, float(omega_c), max_beat, pairs)


@dataclass(frozen=True)
class Finding:
    check: str
    level: str  # "pass" | "warn" | "fail"
    message: str


@dataclass
class ValidityReport:
    findings: list[Finding]

    @property
    def ok(self) -> bool:
        return all(f.level != "fail" for f in self.findings)

    def by_level(self, level: str) -> list[Finding]:
        return [f for f in self.findings if f.level == level]

    def __iter__(self):
        return iter(self.findings)


def validate(
    system: FloquetSystem, scales: SpectralScales, eps_threshold: float = DEFAULT_EPS_THRESHOLD
) -> ValidityReport:
    """Check the frequency hierarchy the effective description relies on.

    Findings: ``epsilon`` small, beats below the cutoff, cutoff below the
    drive, static spectrum below the cutoff, and whether the upper-triangle
    pair form of the bilinear dissipator preserves Hermiticity.
    """
    out = []
    wc = scales.omega_c
    if scales.epsilon < eps_threshold:
        out.append(Finding("epsilon", "pass", f"epsilon={scales.epsilon:.4g} < {eps_threshold}"))
    else:
        out.append(Finding("epsilon", "warn", f"epsilon={scales.epsilon:.4g} >= {eps_threshold}"))

    if scales.max_beat < wc:
        out.append(Finding("beat", "pass", f"max beat {scales.max_beat:.4g} < omega_c {wc:.4g}"))
    else:
        out.append(Finding("beat", "fail", f"max beat {scales.max_beat:.4g} >= omega_c {wc:.4g}"))

    if not system.terms:
        out.append(Finding("cutoff", "pass", "no drive"))
    elif wc < scales.omega_min:
        out.append(Finding("cutoff", "pass", f"omega_c {wc:.4g} < omega_min {scales.omega_min:.4g}"))
    else:
        out.append(Finding("cutoff", "fail", f"omega_c {wc:.4g} >= omega_min {scales.omega_min:.4g}"))

    evals = np.linalg.eigvalsh(system.H0)
    spread = float(evals.max() - evals.min())
    level = "pass" if spread < wc else "fail"
    out.append(Finding("static_spectrum", level, f"H0 eigenfrequency spread {spread:.4g} vs omega_c {wc:.4g}"))

    from .master_equation import upper_form_hermiticity_defect

    defect = upper_form_hermiticity_defect(system, scales)
    if defect <= 1e-12:
        out.append(Finding("ff_hermiticity", "pass", "pairwise dissipator form is Hermiticity-preserving"))
    else:
        out.append(
            Finding(
                "ff_hermiticity",
                "warn",
                f"upper-triangle pair form breaks Hermiticity (defect {defect:.3g}); "
                "use the symmetric form or the Hermitian projection",
            )
        )
    return ValidityReport(out)
