"""Effective master equation for the coarse-grained density matrix.

The generator is ``-i[H_eff, rho] + L_FF + L_FSF (+ L3)``. Dissipators are
assembled once as harmonic superoperators acting on row-major vectorised
density matrices, ``vec(A X B) = kron(A, B.T) vec(X)``; evaluating them at
``t`` and applying to ``rho`` gives the pointwise right-hand side, and the
same harmonics feed the fixed-step integrator.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import NumericalAbort, StructureError
from .harmonic import HarmonicOperator
from .kicks import KickExpansion
from .model import FloquetSystem, SpectralScales
from .operators import (
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_X,
    SIGMA_Z,
    as_matrix,
    check_density_matrix,
    commutator,
)
from .propagation import TimeGrid, TimeSeries, auto_substeps, evolve

TRACE_TOL = 1e-8
HERMITICITY_TOL = 1e-10
EIGEN_REPORT = -1e-3
EIGEN_ABORT = -1e-2
STRUCTURE_RTOL = 1e-12
FF_FORMS = ("symmetric", "upper")


@dataclass(frozen=True)
class DissipatorConfig:
    """Which terms enter the effective generator.

    ``ff_form`` selects how the bilinear dissipator is summed: ``"symmetric"``
    runs over ordered pairs ``(m, n)`` and is Hermiticity-preserving for any
    amplitudes; ``"upper"`` runs over ``m < n`` only and relies on
    ``hermitize`` when the pair products are complex.
    """

    include_fsf: bool = True
    include_l3: bool = False
    hermitize: bool = True
    heff_order: int = 2
    ff_form: str = "symmetric"

    def __post_init__(self):
        if self.heff_order not in (0, 1, 2):
            raise ValueError("heff_order must be 0, 1 or 2")
        if self.ff_form not in FF_FORMS:
            raise ValueError(f"ff_form must be one of {FF_FORMS}")

    def variant(self, name: str) -> DissipatorConfig:
        """Named comparison variant: ``full``, ``no-fsf`` or ``l3``."""
        if name == "full":
            return replace(self, include_fsf=True, include_l3=False)
        if name == "no-fsf":
            return replace(self, include_fsf=False, include_l3=False)
        if name == "l3":
            return replace(self, include_fsf=True, include_l3=True)
        raise ValueError(f"unknown variant {name!r}")


# superoperators --------------------------------------------------------------


def vec(rho: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(rho).reshape(-1)


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return v.reshape(dim, dim)


def sandwich_superop(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Superoperator of ``rho -> a rho b``."""
    return np.kron(a, b.T)


def left_superop(a: np.ndarray) -> np.ndarray:
    return np.kron(a, np.eye(a.shape[0]))


def right_superop(b: np.ndarray) -> np.ndarray:
    return np.kron(np.eye(b.shape[0]), b.T)


def hamiltonian_superop(h: np.ndarray) -> np.ndarray:
    """Superoperator of ``rho -> -i [h, rho]``."""
    return -1j * (left_superop(h) - right_superop(h))


def dissipator_superop(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = a @ b + b @ a
    return 0.5 * (left_superop(ab) + right_superop(ab)) - sandwich_superop(a, b) - sandwich_superop(b, a)


def apply_superop(s: np.ndarray, rho: np.ndarray) -> np.ndarray:
    d = rho.shape[0]
    return unvec(s @ vec(rho), d)


def _transpose_permutation(d: int) -> np.ndarray:
    idx = np.arange(d * d).reshape(d, d).T.reshape(-1)
    return np.eye(d * d)[idx]


def conjugate_superop(s: HarmonicOperator, d: int) -> HarmonicOperator:
    """The map ``rho -> S(rho^dagger)^dagger``, as a harmonic superoperator."""
    p = _transpose_permutation(d)
    return HarmonicOperator(
        ((-nu, p @ np.conj(c) @ p) for nu, c in s.terms()), dim=s.dim
    )


def hermitian_projection(s: HarmonicOperator, d: int) -> HarmonicOperator:
    """Linear map agreeing with ``(S(rho) + S(rho)^dagger)/2`` on Hermitian ``rho``."""
    return 0.5 * (s + conjugate_superop(s, d))


def superop_hermiticity_defect(s: HarmonicOperator, d: int) -> float:
    """Largest coefficient deviation of ``S`` from its conjugate map, relative to ``S``."""
    if s.is_empty():
        return 0.0
    diff = s - conjugate_superop(s, d)
    if diff.is_empty():
        return 0.0
    return float(np.abs(diff.coefficients).max() / np.abs(s.coefficients).max())


def _sine(c: complex, x: float, block: np.ndarray) -> list[tuple[float, np.ndarray]]:
    """Harmonics of ``c sin(x t) block``."""
    return [(x, c / 2j * block), (-x, -c / 2j * block)]


# named dissipators -----------------------------------------------------------


def dissipator_D(v, vp, rho) -> np.ndarray:
    """``{{V, V'}, rho}/2 - V rho V' - V' rho V``."""
    v, vp, rho = as_matrix(v, "V"), as_matrix(vp, "V'"), as_matrix(rho, "rho")
    ac = v @ vp + vp @ v
    return 0.5 * (ac @ rho + rho @ ac) - v @ rho @ vp - vp @ rho @ v


@dataclass(frozen=True)
class NamedLindbladian:
    """Standard two-level Lindblad channels.

    ``phase``: ``sz rho sz - rho``; ``emission``: jump ``sigma_minus``;
    ``absorption``: jump ``sigma_plus``.
    """

    kind: str

    def __post_init__(self):
        if self.kind not in ("phase", "emission", "absorption"):
            raise ValueError(f"unknown Lindbladian kind {self.kind!r}")

    @property
    def jump(self) -> np.ndarray:
        return {"phase": SIGMA_Z, "emission": SIGMA_MINUS, "absorption": SIGMA_PLUS}[self.kind]

    def __call__(self, rho) -> np.ndarray:
        rho = as_matrix(rho, "rho")
        a = self.jump
        ad = np.conj(a).T
        ada = ad @ a
        return a @ rho @ ad - 0.5 * (ada @ rho + rho @ ada)


def lindblad_pair(jump, rho) -> np.ndarray:
    """``L rho L^dagger + L^dagger rho L - {{L, L^dagger}, rho}/2``: a jump together with its reverse."""
    return -dissipator_D(jump, np.conj(as_matrix(jump)).T, rho)


# dissipator assembly ----------------------------------------------------------


def _wc(scales) -> float:
    return scales.omega_c if isinstance(scales, SpectralScales) else float(scales)


def ff_superop(system: FloquetSystem, scales, form: str = "symmetric", hermitize: bool = True) -> HarmonicOperator:
    """Harmonic superoperator of the dissipator bilinear in the Floquet operators.

    ``symmetric``: ``i sum_{m,n} (1/w_m - 1/w_n) e^{i(w_m - w_n)t} D[V_m, V_n^dagger]``.
    ``upper``: ``sum_{m<n} 4 sin((w_n - w_m)t)/w_{mn-} D[V_m^dagger, V_n]``.
    Only pairs whose beat lies below the cutoff contribute. Both agree whenever
    the products of Floquet operators make each pair real-symmetric.
    """
    if form not in FF_FORMS:
        raise ValueError(f"form must be one of {FF_FORMS}")
    wc = _wc(scales)
    d = system.dim
    terms = system.terms
    pairs = []
    for m, tm in enumerate(terms):
        for n, tn in enumerate(terms):
            beat = tm.omega - tn.omega
            if m == n or abs(beat) >= wc:
                continue
            if form == "symmetric":
                c = 1j * (1.0 / tm.omega - 1.0 / tn.omega)
                pairs.append((beat, c * dissipator_superop(tm.V, np.conj(tn.V).T)))
            elif m < n:
                c = 2.0 * (1.0 / tm.omega - 1.0 / tn.omega)  # 4 / w_{mn-}
                pairs.extend(_sine(c, tn.omega - tm.omega, dissipator_superop(np.conj(tm.V).T, tn.V)))
    s = HarmonicOperator(pairs, dim=d * d)
    return hermitian_projection(s, d) if hermitize else s


def upper_form_hermiticity_defect(system: FloquetSystem, scales) -> float:
    """How far the unprojected ``upper`` form is from preserving Hermiticity (relative)."""
    return superop_hermiticity_defect(ff_superop(system, scales, "upper", hermitize=False), system.dim)


def fsf_superop(system: FloquetSystem, scales, hermitize: bool = True) -> HarmonicOperator:
    """Harmonic superoperator of the slow-fast-slow dissipator.

    ``i sum_{m,n} e^{i(w_m - w_n)t} [D[V_m, [V_n^dagger, H0]]/w_n^2 + D[V_n^dagger, [V_m, H0]]/w_m^2]``
    over pairs (including ``m = n``) with beats below the cutoff.
    """
    wc = _wc(scales)
    d = system.dim
    h0 = system.H0
    pairs = []
    for tm in system.terms:
        for tn in system.terms:
            beat = tm.omega - tn.omega
            if abs(beat) >= wc:
                continue
            vnd = np.conj(tn.V).T
            block = dissipator_superop(tm.V, commutator(vnd, h0)) / tn.omega**2
            block = block + dissipator_superop(vnd, commutator(tm.V, h0)) / tm.omega**2
            pairs.append((beat, 1j * block))
    s = HarmonicOperator(pairs, dim=d * d)
    return hermitian_projection(s, d) if hermitize else s


def sigma_xz_structure(system: FloquetSystem) -> tuple[float, np.ndarray]:
    """Return ``(w0, amplitudes)`` when ``H0 = w0 sz`` and ``V_m = A_m sx`` with real ``A_m``."""
    if system.dim != 2:
        raise StructureError("third-order dissipator needs a two-level system")
    h0 = system.H0
    scale = max(np.abs(h0).max(), 1e-300)
    w0 = h0[0, 0].real
    if np.abs(h0 - w0 * SIGMA_Z).max() > STRUCTURE_RTOL * scale:
        raise StructureError("third-order dissipator needs H0 proportional to sigma_z")
    amps = []
    for term in system.terms:
        a = term.V[0, 1]
        vscale = np.abs(term.V).max()
        if np.abs(term.V - a * SIGMA_X).max() > STRUCTURE_RTOL * vscale:
            raise StructureError("third-order dissipator needs Floquet operators proportional to sigma_x")
        if abs(a.imag) > STRUCTURE_RTOL * abs(a):
            raise StructureError("third-order dissipator needs real Floquet amplitudes")
        amps.append(a.real)
    return w0, np.array(amps)


def l3_rate(system: FloquetSystem, scales) -> HarmonicOperator:
    """Scalar harmonic ``c(t)`` with ``L3[rho] = c(t) (rho - sx rho sx)``.

    ``c(t) = -16 w0^2 sum_{m,n} A_m A_n sin((w_m - w_n)t) / w_m^3``, summed over
    pairs whose beat lies below the cutoff.
    """
    wc = _wc(scales)
    w0, amps = sigma_xz_structure(system)
    omegas = system.omegas
    pairs = []
    for m, wm in enumerate(omegas):
        for n, wn in enumerate(omegas):
            if m == n or abs(wm - wn) >= wc:
                continue
            c = -16.0 * w0**2 * amps[m] * amps[n] / wm**3
            pairs.extend(_sine(c, wm - wn, np.ones((1, 1))))
    return HarmonicOperator(pairs, dim=1)


def l3_superop(system: FloquetSystem, scales) -> HarmonicOperator:
    rate = l3_rate(system, scales)
    block = np.eye(4) - sandwich_superop(SIGMA_X, SIGMA_X)
    return HarmonicOperator(((nu, c[0, 0] * block) for nu, c in rate.terms()), dim=4)


def _superop_at(s: HarmonicOperator, t: float, rho) -> np.ndarray:
    rho = as_matrix(rho, "rho")
    return apply_superop(s.at(t), rho)


def l2_ff(system: FloquetSystem, scales, t: float, rho, form: str = "symmetric", hermitize: bool = True) -> np.ndarray:
    return _superop_at(ff_superop(system, scales, form, hermitize), t, rho)


def l2_fsf(system: FloquetSystem, scales, t: float, rho, hermitize: bool = True) -> np.ndarray:
    return _superop_at(fsf_superop(system, scales, hermitize), t, rho)


def l3_sigma_xz(system: FloquetSystem, scales, t: float, rho) -> np.ndarray:
    rho = as_matrix(rho, "rho")
    c = l3_rate(system, scales).at(t)[0, 0].real
    return c * (rho - SIGMA_X @ rho @ SIGMA_X)


# full generator --------------------------------------------------------------


def liouvillian(
    system: FloquetSystem, scales, expansion: KickExpansion, cfg: DissipatorConfig
) -> HarmonicOperator:
    """Harmonic superoperator of the whole effective generator."""
    d = system.dim
    heff = expansion.effective_hamiltonian(cfg.heff_order)
    gen = HarmonicOperator(((nu, hamiltonian_superop(h)) for nu, h in heff.terms()), dim=d * d)
    gen = gen + ff_superop(system, scales, cfg.ff_form, cfg.hermitize)
    if cfg.include_fsf:
        gen = gen + fsf_superop(system, scales, cfg.hermitize)
    if cfg.include_l3:
        gen = gen + l3_superop(system, scales)
    return gen


def me_rhs(
    system: FloquetSystem, scales, expansion: KickExpansion, cfg: DissipatorConfig, t: float, rho
) -> np.ndarray:
    """Pointwise right-hand side of the effective master equation."""
    rho = as_matrix(rho, "rho")
    h = expansion.effective_hamiltonian(cfg.heff_order).at(t)
    out = -1j * (h @ rho - rho @ h)
    out = out + l2_ff(system, scales, t, rho, cfg.ff_form, cfg.hermitize)
    if cfg.include_fsf:
        out = out + l2_fsf(system, scales, t, rho, cfg.hermitize)
    if cfg.include_l3:
        out = out + l3_sigma_xz(system, scales, t, rho)
    return out


@dataclass(frozen=True)
class EigenDip:
    t: float
    eigenvalue: float


def _diagnose(values: np.ndarray, times: np.ndarray) -> dict:
    tr = np.einsum("nii->n", values)
    herm = np.abs(values - np.conj(np.swapaxes(values, 1, 2))).reshape(len(values), -1).max(axis=1)
    hpart = 0.5 * (values + np.conj(np.swapaxes(values, 1, 2)))
    lam = np.linalg.eigvalsh(hpart).min(axis=1)
    dips = [EigenDip(float(t), float(v)) for t, v in zip(times, lam) if v < -1e-12]
    return {
        "trace_defect": float(np.abs(tr - 1).max()),
        "hermiticity_defect": float(herm.max()),
        "min_eigenvalue": float(lam.min()),
        "eigen_dips": dips,
    }


def integrate_me(
    system: FloquetSystem,
    scales,
    expansion: KickExpansion,
    cfg: DissipatorConfig,
    rho_bar0,
    grid: TimeGrid,
    substeps: int | None = None,
    label: str = "me",
) -> TimeSeries:
    """Fixed-step integration of the effective master equation from ``grid.origin``.

    Trace, Hermiticity and the smallest eigenvalue are monitored and stored in
    ``meta``; nothing is corrected. An eigenvalue below ``EIGEN_ABORT`` raises
    :class:`NumericalAbort`.
    """
    rho_bar0 = check_density_matrix(rho_bar0, "rho_bar0")
    d = system.dim
    gen = liouvillian(system, scales, expansion, cfg)
    if substeps is None:
        substeps = auto_substeps(gen, grid.dt)
    vs = evolve(gen, vec(rho_bar0).reshape(-1, 1), grid, substeps)
    values = vs.reshape(len(grid), d, d)
    diag = _diagnose(values, grid.times)
    diag.update(substeps=substeps, step=grid.dt / substeps)
    series = TimeSeries(grid, values, label, diag)
    if diag["min_eigenvalue"] < EIGEN_ABORT:
        worst = min(diag["eigen_dips"], key=lambda e: e.eigenvalue)
        raise NumericalAbort(
            f"effective density matrix eigenvalue {worst.eigenvalue:.3g} at t={worst.t:.4g} "
            f"below {EIGEN_ABORT:g}: parameters are outside the validity range of the expansion",
            partial=series,
        )
    return series
