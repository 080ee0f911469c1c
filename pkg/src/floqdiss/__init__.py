"""Floquet-engineered dissipation: exact propagation, coarse-graining and effective master equations."""
from .coarse_grain import FilterSpec, dressed_initial_condition, sinc_convolve
from .designer import DissipationTarget, Jump, design, predicted_rate, realized_rate
from .harmonic import HarmonicOperator
from .kicks import KickExpansion, derive_kick_expansion
from .master_equation import DissipatorConfig, integrate_me, l2_ff, l2_fsf, l3_sigma_xz, me_rhs
from .model import FloquetSystem, FloquetTerm, compute_scales, hamiltonian_at, validate
from .propagation import TimeGrid, TimeSeries, propagate_effective, propagate_exact, to_interaction_picture
from .scenario import list_presets, load_preset, parse_scenario, run_scenario

__all__ = [
    "DissipationTarget",
    "DissipatorConfig",
    "FilterSpec",
    "FloquetSystem",
    "FloquetTerm",
    "HarmonicOperator",
    "Jump",
    "KickExpansion",
    "TimeGrid",
    "TimeSeries",
    "compute_scales",
    "derive_kick_expansion",
    "design",
    "dressed_initial_condition",
    "hamiltonian_at",
    "integrate_me",
    "l2_ff",
    "l2_fsf",
    "l3_sigma_xz",
    "list_presets",
    "load_preset",
    "me_rhs",
    "parse_scenario",
    "predicted_rate",
    "propagate_effective",
    "propagate_exact",
    "realized_rate",
    "run_scenario",
    "sinc_convolve",
    "to_interaction_picture",
    "validate",
]
