"""Kick operators, effective Hamiltonians and density-matrix correction maps.

The recursion is carried out on :class:`~floqdiss.harmonic.HarmonicOperator`
values, so every product and time average is exact on the harmonic content
(sharp cutoff at ``omega_c``). Integration constants of the kick operators are
zero.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .harmonic import HarmonicOperator, anticommutator, commutator, sandwich
from .model import FloquetSystem, SpectralScales


@dataclass(frozen=True)
class KickExpansion:
    """Kick operators ``K_1..K_order`` and effective Hamiltonians ``H_eff_0..``.

    ``heff`` holds ``min(order, 2) + 1`` entries: step ``n`` of the recursion
    yields ``H_eff_n`` together with ``K_{n+1}``.
    """

    kicks: tuple[HarmonicOperator, ...]
    heff: tuple[HarmonicOperator, ...]
    order: int
    omega_c: float
    drive: HarmonicOperator
    H0: np.ndarray

    def kick(self, n: int) -> HarmonicOperator:
        """``K_n`` (1-based); zero beyond the computed order."""
        if 1 <= n <= len(self.kicks):
            return self.kicks[n - 1]
        if n < 1:
            raise IndexError("kick operators are indexed from 1")
        raise IndexError(f"K_{n} not computed (order={self.order})")

    def total_kick(self) -> HarmonicOperator:
        out = HarmonicOperator.zero(self.H0.shape[0])
        for k in self.kicks:
            out = out + k
        return out

    def effective_hamiltonian(self, order: int = 2) -> HarmonicOperator:
        """``H_eff_0 + ... + H_eff_order``."""
        if order >= len(self.heff):
            raise ValueError(f"H_eff up to order {order} requested, only {len(self.heff) - 1} available")
        out = self.heff[0]
        for h in self.heff[1 : order + 1]:
            out = out + h
        return out


def derive_kick_expansion(
    system: FloquetSystem, scales: SpectralScales | float, order: int = 2
) -> KickExpansion:
    """Run the kick / effective-Hamiltonian recursion up to ``K_order``.

    Each step splits a generator into its slow part (``|nu| < omega_c``, the
    effective Hamiltonian contribution) and its fast remainder, whose
    antiderivative is the next kick operator.
    """
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    wc = scales.omega_c if isinstance(scales, SpectralScales) else float(scales)
    h0 = HarmonicOperator.constant(system.H0)
    hf = system.drive()

    k1 = hf.fast_part(wc).antiderivative()
    gen1 = 1j * commutator(k1, h0) + 0.5j * commutator(k1, hf)
    heff1 = gen1.average(wc)
    kicks = [k1]
    heffs = [h0, heff1]
    if order >= 2:
        k2 = gen1.fast_part(wc).antiderivative()
        kicks.append(k2)
        gen2 = (
            1j * commutator(k2, h0)
            + 0.5j * commutator(k2, hf)
            + 0.5j * commutator(k1, heff1)
            - commutator(k1, commutator(k1, hf)) / 12.0
        )
        heffs.append(gen2.average(wc))
        if order >= 3:
            kicks.append(gen2.fast_part(wc).antiderivative())
    return KickExpansion(tuple(kicks), tuple(heffs), order, wc, hf, system.H0.copy())


# correction maps -----------------------------------------------------------


def _symmetric_sandwich(a: HarmonicOperator, rho, b: HarmonicOperator) -> HarmonicOperator:
    """Averaged-ready harmonic of ``A rho B + B rho A - {{A, B}, rho}/2``."""
    rho = np.asarray(rho, dtype=complex)
    ab = anticommutator(a, b)
    return sandwich(a, rho, b) + sandwich(b, rho, a) - 0.5 * (ab @ rho + rho @ ab)


def e2_harmonic(expansion: KickExpansion, rho, omega_c: float | None = None) -> HarmonicOperator:
    """Slow harmonics of ``-{K1^2, rho}/2 + K1 rho K1`` for fixed ``rho``."""
    wc = expansion.omega_c if omega_c is None else omega_c
    k1 = expansion.kick(1)
    return (0.5 * _symmetric_sandwich(k1, rho, k1)).average(wc)


def e3_harmonic(expansion: KickExpansion, rho, omega_c: float | None = None) -> HarmonicOperator:
    wc = expansion.omega_c if omega_c is None else omega_c
    return _symmetric_sandwich(expansion.kick(1), rho, expansion.kick(2)).average(wc)


def e4c_harmonic(expansion: KickExpansion, rho, omega_c: float | None = None) -> HarmonicOperator:
    """Quartic map of the ``K1``-only (commuting) expansion."""
    wc = expansion.omega_c if omega_c is None else omega_c
    rho = np.asarray(rho, dtype=complex)
    k = expansion.kick(1)
    k2 = k @ k
    k3 = k2 @ k
    k4 = k2 @ k2
    out = (
        (k4 @ rho + rho @ k4) / 24.0
        - sandwich(k3, rho, k) / 6.0
        - sandwich(k, rho, k3) / 6.0
        + sandwich(k2, rho, k2) / 4.0
    )
    return out.average(wc)


def correction_map_2(expansion: KickExpansion, omega_c: float | None, t: float, rho) -> np.ndarray:
    return e2_harmonic(expansion, rho, omega_c).at(t)


def correction_map_3(expansion: KickExpansion, omega_c: float | None, t: float, rho) -> np.ndarray:
    return e3_harmonic(expansion, rho, omega_c).at(t)


def correction_map_4_commuting(expansion: KickExpansion, omega_c: float | None, t: float, rho) -> np.ndarray:
    """Valid only when the kick operator reduces to ``K1`` (commuting drive)."""
    return e4c_harmonic(expansion, rho, omega_c).at(t)


def fourth_order_residual(expansion: KickExpansion, t: float, rho) -> np.ndarray:
    """``d/dt E4c[rho] - (dE2/dt)[E2[rho]]`` at time ``t``.

    Both derivatives act on the maps' explicit time dependence only; the inner
    ``E2[rho]`` is frozen at ``t`` before the outer map is differentiated.
    """
    de4 = e4c_harmonic(expansion, rho).derivative().at(t)
    inner = correction_map_2(expansion, None, t, rho)
    de2e2 = e2_harmonic(expansion, inner).derivative().at(t)
    return de4 - de2e2
