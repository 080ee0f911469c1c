"""Time coarse-graining by convolution with a truncated sinc kernel."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import sici

from .errors import InsufficientBufferError, NumericalAbort
from .kicks import KickExpansion
from .operators import matrix_exponential
from .propagation import TimeGrid, TimeSeries

MIN_ZERO_CROSSINGS = 10  # minimum half-width in kernel periods 2 pi / omega_c
DEFAULT_HALF_WIDTH_PERIODS = 20
PROJECTION_ABORT = 1e-2


@dataclass(frozen=True)
class FilterSpec:
    """Sinc low-pass ``f(t) = sin(omega_c t) / (pi t)`` truncated to ``[-W, W]``.

    ``normalize`` rescales the discrete kernel to unit sum, so constants pass
    unchanged; the bare truncated kernel has a DC gain slightly below one.
    """

    omega_c: float
    half_width: float | None = None
    step: float | None = None
    normalize: bool = True

    def __post_init__(self):
        if not self.omega_c > 0:
            raise ValueError("omega_c must be positive")
        w = self.half_width
        if w is None:
            w = DEFAULT_HALF_WIDTH_PERIODS * 2 * math.pi / self.omega_c
        min_w = MIN_ZERO_CROSSINGS * 2 * math.pi / self.omega_c
        if w < min_w * (1 - 1e-12):
            raise ValueError(f"half_width {w:.4g} below the minimum {min_w:.4g} (10 kernel periods)")
        object.__setattr__(self, "half_width", float(w))

    def kernel(self, dt: float) -> np.ndarray:
        """Trapezoidal quadrature weights on ``k dt``, ``|k dt| <= W``."""
        n = int(math.floor(self.half_width / dt + 1e-9))
        tau = dt * np.arange(-n, n + 1)
        f = np.empty_like(tau)
        nz = tau != 0
        f[nz] = np.sin(self.omega_c * tau[nz]) / (math.pi * tau[nz])
        f[~nz] = self.omega_c / math.pi
        w = f * dt
        w[0] *= 0.5
        w[-1] *= 0.5
        if self.normalize:
            w /= w.sum()
        return w

    def transfer(self, nu) -> np.ndarray:
        """Continuous transfer function of the truncated kernel at angular frequency ``nu``.

        ``H(nu) = [Si((omega_c + nu) W) + Si((omega_c - nu) W)] / pi``, divided
        by ``H(0)`` when normalised.
        """
        nu = np.asarray(nu, dtype=float)
        wc, w = self.omega_c, self.half_width
        h = (sici((wc + nu) * w)[0] + sici((wc - nu) * w)[0]) / math.pi
        if self.normalize:
            h = h / (2 * sici(wc * w)[0] / math.pi)
        return h


def valid_window(series: TimeSeries, spec: FilterSpec) -> tuple[float, float]:
    """Largest output interval whose convolution stays inside the series."""
    lo = series.grid.t_start + spec.half_width
    hi = series.grid.t_end - spec.half_width
    return lo, hi


def sinc_convolve(
    series: TimeSeries,
    spec: FilterSpec,
    t_out_start: float | None = None,
    t_out_end: float | None = None,
    stride: int = 1,
) -> TimeSeries:
    """Convolve every matrix entry with the kernel and return the series on ``[t_out_start, t_out_end]``.

    Output samples are every ``stride``-th input sample. Requesting any output
    time closer than ``W`` to an end of the input raises
    :class:`InsufficientBufferError`.
    """
    g = series.grid
    dt = spec.step if spec.step is not None else g.dt
    if abs(dt - g.dt) > 1e-12 * g.dt:
        raise ValueError("quadrature step must equal the series step")
    weights = spec.kernel(g.dt)
    n = (len(weights) - 1) // 2
    lo, hi = valid_window(series, spec)
    t_out_start = lo if t_out_start is None else t_out_start
    t_out_end = hi if t_out_end is None else t_out_end
    tol = 1e-9 * max(1.0, abs(g.t_end))
    if t_out_start < g.t_start + n * g.dt - tol or t_out_end > g.t_end - n * g.dt + tol:
        raise InsufficientBufferError(
            f"output window [{t_out_start:.6g}, {t_out_end:.6g}] needs input on "
            f"[{t_out_start - spec.half_width:.6g}, {t_out_end + spec.half_width:.6g}], "
            f"have [{g.t_start:.6g}, {g.t_end:.6g}]"
        )
    i0 = g.index_of(t_out_start)
    i1 = g.index_of(t_out_end)
    if i1 <= i0 or (i1 - i0) % stride:
        raise ValueError("output window must span a positive multiple of the stride")
    d = series.dim
    flat = series.values.reshape(len(g), d * d)
    centres = np.arange(i0, i1 + 1, stride)
    out = np.empty((len(centres), d * d), dtype=complex)
    offsets = np.arange(-n, n + 1)
    chunk = max(1, 2_000_000 // len(weights))
    for a in range(0, len(centres), chunk):
        c = centres[a : a + chunk]
        out[a : a + chunk] = np.einsum("k,okj->oj", weights, flat[c[:, None] + offsets[None, :]])
    k = (g.origin - t_out_start) / (stride * g.dt)
    on_grid = abs(k - round(k)) < 1e-6 and 0 <= round(k) <= (i1 - i0) // stride
    origin = g.origin if on_grid else t_out_start
    grid = TimeGrid(g.t_start + i0 * g.dt, g.t_start + i1 * g.dt, stride * g.dt, origin)
    meta = dict(series.meta)
    meta.update(filter_omega_c=spec.omega_c, filter_half_width=spec.half_width, kernel_points=len(weights))
    meta.pop("propagator", None)
    return TimeSeries(grid, out.reshape(-1, d, d), "tcg", meta)


class DressedState(NamedTuple):
    rho: np.ndarray
    projection: float
    raw: np.ndarray


def project_density(m: np.ndarray) -> tuple[np.ndarray, float]:
    """Nearest-cone repair: Hermitian part, negative eigenvalues set to zero, unit trace.

    Returns the repaired matrix and the max-entry size of the change.
    """
    h = 0.5 * (m + np.conj(m).T)
    lam, vecs = np.linalg.eigh(h)
    lam = np.clip(lam, 0.0, None)
    fixed = (vecs * lam) @ np.conj(vecs).T
    fixed = fixed / np.trace(fixed).real
    return fixed, float(np.abs(fixed - m).max())


def dressed_initial_condition(
    series: TimeSeries, expansion: KickExpansion | None, spec: FilterSpec, t0: float | None = None, dress: bool = True
) -> DressedState:
    """Coarse-grained state at ``t0`` conjugated as ``e^{i K1(t0)} rho e^{-i K1(t0)}``.

    Aborts when repairing the result into a density matrix would move it by
    more than ``PROJECTION_ABORT``.
    """
    t0 = series.grid.origin if t0 is None else t0
    rho = sinc_convolve(series, spec, t0, t0 + series.grid.dt).values[0]
    if dress and expansion is not None:
        k1 = expansion.kick(1).at(t0)
        u = matrix_exponential(1j * k1)
        rho = u @ rho @ np.conj(u).T
    fixed, change = project_density(rho)
    if change > PROJECTION_ABORT:
        raise NumericalAbort(
            f"dressed initial state needs a density-matrix repair of {change:.3g} (> {PROJECTION_ABORT:g}); "
            "check the filter half-width and propagation buffer"
        )
    return DressedState(fixed, change, rho)
