"""Fixed-step fourth-order propagation of harmonic generators.

Every evolution in the package has the form ``dX/dt = A(t) X`` with
``A(t) = sum_k A_k exp(i nu_k t)``: the propagator under ``-i H(t)``, the
slow propagator under ``-i H_eff(t)``, and the vectorised density matrix under
a master-equation generator. One compiled classic Runge-Kutta kernel serves
all of them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import NumericalAbort
from .harmonic import HarmonicOperator
from .model import FloquetSystem
from .operators import check_density_matrix

UNITARITY_REPORT = 1e-8
UNITARITY_ABORT = 1e-6
DEFAULT_STEP_NORM = 2e-3  # h * ||A||_bound per integrator step
DEFAULT_OVERSAMPLE = 50
MIN_OVERSAMPLE = 20


@dataclass(frozen=True)
class TimeGrid:
    """Uniform record grid ``t_start + k dt``; ``origin`` is where the propagator is the identity."""

    t_start: float
    t_end: float
    dt: float
    origin: float | None = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end > self.t_start:
            raise ValueError("t_end must exceed t_start")
        n = (self.t_end - self.t_start) / self.dt
        if abs(n - round(n)) > 1e-6:
            raise ValueError(f"span {self.t_end - self.t_start} is not a multiple of dt={self.dt}")
        origin = self.t_start if self.origin is None else self.origin
        k = (origin - self.t_start) / self.dt
        if abs(k - round(k)) > 1e-6 or not (-1e-9 <= k <= round(n) + 1e-9):
            raise ValueError("origin must be a grid point")
        object.__setattr__(self, "origin", float(origin))

    @property
    def n_steps(self) -> int:
        return int(round((self.t_end - self.t_start) / self.dt))

    @property
    def origin_index(self) -> int:
        return int(round((self.origin - self.t_start) / self.dt))

    @property
    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.n_steps + 1)

    def __len__(self) -> int:
        return self.n_steps + 1

    def index_of(self, t: float) -> int:
        k = (t - self.t_start) / self.dt
        if abs(k - round(k)) > 1e-6 or not (0 <= round(k) <= self.n_steps):
            raise ValueError(f"t={t} is not on the grid")
        return int(round(k))

    def check_resolves(self, nu_max: float, oversample: int = MIN_OVERSAMPLE) -> None:
        if nu_max > 0 and self.dt > 2 * math.pi / nu_max / oversample:
            raise ValueError(
                f"dt={self.dt} under-resolves frequency {nu_max:.4g} "
                f"(need <= {2 * math.pi / nu_max / oversample:.3g})"
            )


@dataclass
class TimeSeries:
    grid: TimeGrid
    values: np.ndarray  # (len(grid), d, d)
    label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 3 or len(self.values) != len(self.grid):
            raise ValueError(f"values shape {self.values.shape} does not match grid of {len(self.grid)} points")

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def entry(self, i: int, j: int) -> np.ndarray:
        return self.values[:, i, j]

    def at(self, t: float) -> np.ndarray:
        return self.values[self.grid.index_of(t)]

    def resample(self, grid: TimeGrid) -> TimeSeries:
        """Pick the points of a coarser grid that lie on this one."""
        idx = [self.grid.index_of(t) for t in grid.times]
        return TimeSeries(grid, self.values[idx], self.label, dict(self.meta))


@numba.njit(cache=True)
def _generator(coeffs, nus, t):
    out = np.zeros(coeffs.shape[1:], dtype=np.complex128)
    for k in range(nus.shape[0]):
        out += coeffs[k] * np.exp(1j * nus[k] * t)
    return out


@numba.njit(cache=True)
def _rk4_records(coeffs, nus, x0, t0, h, n_records, substeps):
    """Classic RK4 from ``t0`` with step ``h`` (may be negative); records every ``substeps`` steps."""
    out = np.empty((n_records,) + x0.shape, dtype=np.complex128)
    x = x0.copy()
    out[0] = x
    a0 = _generator(coeffs, nus, t0)
    for r in range(1, n_records):
        # times from indices rather than running sums, so phase roundoff stays flat
        base = (r - 1) * substeps
        for j in range(substeps):
            t = t0 + (base + j) * h
            am = _generator(coeffs, nus, t + 0.5 * h)
            a1 = _generator(coeffs, nus, t + h)
            k1 = a0 @ x
            k2 = am @ (x + 0.5 * h * k1)
            k3 = am @ (x + 0.5 * h * k2)
            k4 = a1 @ (x + h * k3)
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            a0 = a1
        out[r] = x
    return out


def auto_substeps(generator: HarmonicOperator, dt: float, step_norm: float = DEFAULT_STEP_NORM) -> int:
    """Integrator steps per record interval so that ``h * ||A|| <= step_norm``."""
    bound = generator.norm_bound()
    if bound == 0:
        return 1
    return max(1, int(math.ceil(dt * bound / step_norm)))


def evolve(generator: HarmonicOperator, x0: np.ndarray, grid: TimeGrid, substeps: int | None = None) -> np.ndarray:
    """Integrate ``dX/dt = A(t) X`` with ``X(origin) = x0``, forward and backward over ``grid``."""
    if substeps is None:
        substeps = auto_substeps(generator, grid.dt)
    coeffs = np.ascontiguousarray(generator.coefficients, dtype=np.complex128)
    nus = np.ascontiguousarray(generator.frequencies, dtype=np.float64)
    if coeffs.shape[0] == 0:
        coeffs = np.zeros((1, generator.dim, generator.dim), dtype=np.complex128)
        nus = np.zeros(1)
    x0 = np.ascontiguousarray(x0, dtype=np.complex128)
    h = grid.dt / substeps
    i0 = grid.origin_index
    out = np.empty((len(grid),) + x0.shape, dtype=np.complex128)
    fwd = _rk4_records(coeffs, nus, x0, grid.origin, h, len(grid) - i0, substeps)
    out[i0:] = fwd
    if i0 > 0:
        bwd = _rk4_records(coeffs, nus, x0, grid.origin, -h, i0 + 1, substeps)
        out[: i0 + 1] = bwd[::-1]
    return out


def unitarity_defect(us: np.ndarray) -> np.ndarray:
    """Pointwise ``max |U^dagger U - I|``."""
    d = us.shape[-1]
    prod = np.einsum("nji,njk->nik", np.conj(us), us)
    return np.abs(prod - np.eye(d)).reshape(len(us), -1).max(axis=1)


def propagator_series(
    hamiltonian: HarmonicOperator, grid: TimeGrid, substeps: int | None = None, label: str = "U"
) -> TimeSeries:
    """Propagator ``U(t)`` with ``U(origin) = I`` under ``H(t)``.

    Unitarity is monitored, never re-imposed: defects above ``UNITARITY_ABORT``
    raise :class:`NumericalAbort`.
    """
    if substeps is None:
        substeps = auto_substeps(hamiltonian, grid.dt)
    d = hamiltonian.dim
    us = evolve(-1j * hamiltonian, np.eye(d, dtype=complex), grid, substeps)
    defect = unitarity_defect(us)
    worst = float(defect.max())
    if worst > UNITARITY_ABORT:
        raise NumericalAbort(
            f"unitarity defect {worst:.3g} exceeds {UNITARITY_ABORT:g} with step {grid.dt / substeps:.3g}; "
            f"increase substeps (currently {substeps})"
        )
    meta = {"substeps": substeps, "step": grid.dt / substeps, "unitarity_defect": worst}
    return TimeSeries(grid, us, label, meta)


def _conjugate(us: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return np.einsum("nij,jk,nlk->nil", us, rho, np.conj(us))


def propagate_exact(
    system: FloquetSystem, rho0, grid: TimeGrid, substeps: int | None = None, keep_propagator: bool = False
) -> TimeSeries:
    """Exact ``rho(t) = U rho0 U^dagger`` under the full driven Hamiltonian."""
    rho0 = check_density_matrix(rho0, "rho0")
    ham = system.hamiltonian()
    grid.check_resolves(ham.max_abs_frequency())
    u = propagator_series(ham, grid, substeps)
    series = TimeSeries(grid, _conjugate(u.values, rho0), "exact", dict(u.meta))
    if keep_propagator:
        series.meta["propagator"] = u
    return series


def propagate_effective(
    heff: HarmonicOperator, rho0, grid: TimeGrid, substeps: int | None = None
) -> tuple[TimeSeries, TimeSeries]:
    """Evolve under a slow effective Hamiltonian; returns ``(rho_series, U_eff_series)``."""
    rho0 = check_density_matrix(rho0, "rho0")
    u = propagator_series(heff, grid, substeps, label="U_eff")
    return TimeSeries(grid, _conjugate(u.values, rho0), "effective", dict(u.meta)), u


def to_interaction_picture(series: TimeSeries, ueff: TimeSeries) -> TimeSeries:
    """Pointwise ``U_eff^dagger rho U_eff``."""
    if len(series.grid) != len(ueff.grid) or not np.allclose(series.times, ueff.times, rtol=0, atol=1e-9):
        raise ValueError("series and propagator live on different grids")
    u = ueff.values
    vals = np.einsum("nji,njk,nkl->nil", np.conj(u), series.values, u)
    return TimeSeries(series.grid, vals, series.label + "_interaction", dict(series.meta))


def purity(series: TimeSeries) -> np.ndarray:
    return np.einsum("nij,nji->n", series.values, series.values).real
