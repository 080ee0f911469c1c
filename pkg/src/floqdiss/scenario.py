"""Scenario documents: parsing, presets, orchestration and output files.

A scenario is a YAML document. Frequencies and energies are written either
as plain numbers (rad/T0) or as ``{value: ..., units: cycles_per_T0 |
rad_per_T0}``; values may be arithmetic expressions such as ``sqrt(10) + 0.025``.
"""
from __future__ import annotations

import ast
import cmath
import csv
import json
import math
import operator
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .coarse_grain import FilterSpec, dressed_initial_condition, sinc_convolve
from .errors import NumericalAbort, ScenarioError, ValidationFailure
from .kicks import derive_kick_expansion
from .master_equation import DissipatorConfig, integrate_me
from .model import DEFAULT_EPS_THRESHOLD, FloquetSystem, FloquetTerm, compute_scales, validate
from .operators import NAMED_OPERATORS, check_density_matrix, ket_to_density, pauli_assemble
from .propagation import (
    DEFAULT_OVERSAMPLE,
    TimeGrid,
    TimeSeries,
    propagate_effective,
    propagate_exact,
    purity,
    to_interaction_picture,
)

UNITS = {"rad_per_T0": 1.0, "cycles_per_T0": 2 * math.pi}
VARIANTS = ("full", "no-fsf", "l3")
VARIANT_LABELS = {"full": "me", "no-fsf": "me_nofsf", "l3": "me_l3"}
PRESET_PACKAGE = "floqdiss.presets"


# expressions -----------------------------------------------------------------

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_FUNCS = {"sqrt": cmath.sqrt, "exp": cmath.exp, "cos": cmath.cos, "sin": cmath.sin}
_CONSTS = {"pi": math.pi, "e": math.e}


def evaluate(expr, path: str) -> complex:
    """Evaluate a number or a small arithmetic expression (``pi``, ``sqrt``, ``exp``, ``cos``, ``sin``, ``1j``)."""
    if isinstance(expr, bool) or expr is None:
        raise ScenarioError(path, f"expected a number, got {expr!r}")
    if isinstance(expr, (int, float, complex)):
        return complex(expr)
    if not isinstance(expr, str):
        raise ScenarioError(path, f"expected a number or expression, got {type(expr).__name__}")
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise ScenarioError(path, f"cannot parse expression {expr!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
            return node.value
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        if isinstance(node, ast.Name) and node.id in _CONSTS:
            return _CONSTS[node.id]
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS
            and len(node.args) == 1
            and not node.keywords
        ):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ScenarioError(path, f"unsupported element in expression {expr!r}")

    try:
        value = complex(ev(tree))
    except (ZeroDivisionError, OverflowError, TypeError) as exc:
        raise ScenarioError(path, f"cannot evaluate {expr!r}: {exc}") from exc
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise ScenarioError(path, f"{expr!r} is not finite")
    return value


def evaluate_real(expr, path: str) -> float:
    v = evaluate(expr, path)
    if abs(v.imag) > 1e-14 * max(1.0, abs(v.real)):
        raise ScenarioError(path, f"expected a real value, got {v}")
    return v.real


def quantity(spec, path: str, real: bool = True):
    """A number in rad/T0, or ``{value, units}`` converted to rad/T0."""
    if isinstance(spec, dict):
        _check_keys(spec, {"value", "units"}, path, required={"value"})
        units = spec.get("units", "rad_per_T0")
        if units not in UNITS:
            raise ScenarioError(f"{path}.units", f"unknown units {units!r}; use one of {sorted(UNITS)}")
        raw = evaluate_real(spec["value"], f"{path}.value") if real else evaluate(spec["value"], f"{path}.value")
        return raw * UNITS[units]
    return evaluate_real(spec, path) if real else evaluate(spec, path)


def _check_keys(doc, allowed: set, path: str, required: set = frozenset()) -> None:
    if not isinstance(doc, dict):
        raise ScenarioError(path, "expected a mapping")
    for key in doc:
        if key not in allowed:
            raise ScenarioError(f"{path}.{key}" if path else str(key), "unknown field")
    for key in required:
        if key not in doc or doc[key] is None:
            raise ScenarioError(f"{path}.{key}" if path else key, "required field is missing")


def operator_spec(spec, path: str) -> np.ndarray:
    """Named operator, ``{pauli: [c0, cx, cy, cz]}`` or ``{matrix: [[...]]}``."""
    if isinstance(spec, str):
        if spec not in NAMED_OPERATORS:
            raise ScenarioError(path, f"unknown operator {spec!r}; known: {sorted(NAMED_OPERATORS)}")
        return NAMED_OPERATORS[spec].copy()
    if isinstance(spec, dict) and "pauli" in spec:
        _check_keys(spec, {"pauli"}, path)
        coeffs = spec["pauli"]
        if not isinstance(coeffs, list) or len(coeffs) != 4:
            raise ScenarioError(f"{path}.pauli", "expected four coefficients [c0, cx, cy, cz]")
        return pauli_assemble(*(evaluate(c, f"{path}.pauli[{k}]") for k, c in enumerate(coeffs)))
    if isinstance(spec, dict) and "matrix" in spec:
        _check_keys(spec, {"matrix"}, path)
        rows = spec["matrix"]
        if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
            raise ScenarioError(f"{path}.matrix", "expected a list of rows")
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ScenarioError(f"{path}.matrix", "matrix must be square")
        return np.array(
            [[evaluate(x, f"{path}.matrix[{i}][{j}]") for j, x in enumerate(r)] for i, r in enumerate(rows)]
        )
    raise ScenarioError(path, "expected an operator name, {pauli: [...]} or {matrix: [[...]]}")


# scenario --------------------------------------------------------------------


@dataclass
class Scenario:
    name: str
    description: str
    system: FloquetSystem
    rho0: np.ndarray
    omega_c: float
    filter: FilterSpec
    duration: float
    record_dt: float
    dt: float | None
    oversample: int
    dissipators: DissipatorConfig
    dress: bool = False
    picture: str = "lab"
    entries: tuple[tuple[int, int], ...] = ((0, 1),)
    variants: tuple[str, ...] = ("full",)
    series: tuple[str, ...] | None = None
    eps_threshold: float = DEFAULT_EPS_THRESHOLD
    drive_form: str = "exponential"
    notes: tuple[str, ...] = ()

    @property
    def t0(self) -> float:
        return self.system.t0

    def output_labels(self) -> tuple[str, ...]:
        if self.series is not None:
            return self.series
        return ("exact", "tcg") + tuple(VARIANT_LABELS[v] for v in self.variants)


_TOP = {"name", "description", "notes", "system", "rho0", "time", "filter", "dissipators", "outputs", "validation"}


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a scenario document."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError("<document>", f"not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ScenarioError("<document>", "expected a mapping at the top level")
    _check_keys(doc, _TOP, "", required={"system", "rho0", "filter"})

    name = str(doc.get("name", "scenario"))
    sysdoc = doc["system"]
    _check_keys(sysdoc, {"H0", "drive", "t0"}, "system", required={"H0"})
    h0 = _scaled_operator(sysdoc["H0"], "system.H0")
    drive = sysdoc.get("drive") or {}
    _check_keys(drive, {"form", "terms"}, "system.drive")
    form = drive.get("form", "exponential")
    if form not in ("exponential", "cosine"):
        raise ScenarioError("system.drive.form", "expected 'exponential' or 'cosine'")
    terms = []
    for k, t in enumerate(drive.get("terms") or []):
        path = f"system.drive.terms[{k}]"
        _check_keys(t, {"operator", "amplitude", "omega"}, path, required={"operator", "omega"})
        op = operator_spec(t["operator"], f"{path}.operator")
        amp = quantity(t.get("amplitude", 1.0), f"{path}.amplitude", real=False)
        omega = quantity(t["omega"], f"{path}.omega")
        if op.shape != h0.shape:
            raise ScenarioError(f"{path}.operator", f"shape {op.shape} does not match H0 {h0.shape}")
        if form == "cosine":
            if abs(amp.imag) > 0 or np.abs(op - np.conj(op).T).max() > 1e-12 * np.abs(op).max():
                raise ScenarioError(path, "cosine-form drives need a real amplitude and a Hermitian operator")
            amp = amp.real / 2.0  # A cos(w t) O = (A/2) O e^{iwt} + h.c.
        try:
            terms.append(FloquetTerm(amp * op, omega))
        except ValueError as exc:
            raise ScenarioError(path, str(exc)) from exc
    t0 = evaluate_real(sysdoc.get("t0", 0.0), "system.t0")
    try:
        system = FloquetSystem(h0, tuple(terms), t0)
    except ValueError as exc:
        raise ScenarioError("system", str(exc)) from exc

    rho0 = _parse_rho(doc["rho0"], h0.shape[0])

    tdoc = doc.get("time") or {}
    _check_keys(tdoc, {"duration", "record_dt", "dt", "oversample"}, "time")
    duration = evaluate_real(tdoc.get("duration", 80.0), "time.duration")
    record_dt = evaluate_real(tdoc.get("record_dt", 0.05), "time.record_dt")
    if duration <= 0:
        raise ScenarioError("time.duration", "must be positive")
    if record_dt <= 0:
        raise ScenarioError("time.record_dt", "must be positive")
    n = duration / record_dt
    if abs(n - round(n)) > 1e-9 * n:
        raise ScenarioError("time.record_dt", "must divide time.duration")
    dt_raw = tdoc.get("dt", "auto")
    dt = None if dt_raw == "auto" else evaluate_real(dt_raw, "time.dt")
    if dt is not None:
        k = record_dt / dt
        if dt <= 0 or abs(k - round(k)) > 1e-9 * k:
            raise ScenarioError("time.dt", "must be positive and divide time.record_dt")
    oversample = int(tdoc.get("oversample", DEFAULT_OVERSAMPLE))
    if oversample < 20:
        raise ScenarioError("time.oversample", "must be at least 20")

    fdoc = doc["filter"]
    _check_keys(fdoc, {"omega_c", "half_width", "dress"}, "filter")
    if fdoc.get("omega_c") is None:
        raise ScenarioError("filter.omega_c", "required field is missing")
    omega_c = quantity(fdoc["omega_c"], "filter.omega_c")
    if omega_c <= 0:
        raise ScenarioError("filter.omega_c", "must be positive")
    hw = fdoc.get("half_width")
    try:
        spec = FilterSpec(omega_c, None if hw is None else evaluate_real(hw, "filter.half_width"))
    except ValueError as exc:
        raise ScenarioError("filter.half_width", str(exc)) from exc
    if duration <= 2 * spec.half_width:
        raise ScenarioError(
            "time.duration",
            f"must exceed twice the filter half-width ({2 * spec.half_width:.4g}) so the comparison window is not empty",
        )
    dress = fdoc.get("dress", False)
    if not isinstance(dress, bool):
        raise ScenarioError("filter.dress", "expected true or false")

    ddoc = doc.get("dissipators") or {}
    _check_keys(ddoc, {"fsf", "l3", "hermitize", "heff_order", "ff_form"}, "dissipators")
    try:
        cfg = DissipatorConfig(
            include_fsf=bool(ddoc.get("fsf", True)),
            include_l3=bool(ddoc.get("l3", False)),
            hermitize=bool(ddoc.get("hermitize", True)),
            heff_order=int(ddoc.get("heff_order", 2)),
            ff_form=str(ddoc.get("ff_form", "symmetric")),
        )
    except ValueError as exc:
        raise ScenarioError("dissipators", str(exc)) from exc

    odoc = doc.get("outputs") or {}
    _check_keys(odoc, {"picture", "entries", "variants", "series"}, "outputs")
    picture = odoc.get("picture", "lab")
    if picture not in ("lab", "interaction"):
        raise ScenarioError("outputs.picture", "expected 'lab' or 'interaction'")
    d = h0.shape[0]
    entries = []
    for k, e in enumerate(odoc.get("entries", ["01"])):
        e = str(e)
        if len(e) != 2 or not e.isdigit() or int(e[0]) >= d or int(e[1]) >= d:
            raise ScenarioError(f"outputs.entries[{k}]", f"entry {e!r} is not an index pair below {d}")
        entries.append((int(e[0]), int(e[1])))
    variants = tuple(odoc.get("variants", ["full"]))
    for k, v in enumerate(variants):
        if v not in VARIANTS:
            raise ScenarioError(f"outputs.variants[{k}]", f"unknown variant {v!r}; use {VARIANTS}")
    series = odoc.get("series")
    if series is not None:
        series = tuple(series)
        known = {"exact", "tcg"} | {VARIANT_LABELS[v] for v in variants}
        for k, s in enumerate(series):
            if s not in known:
                raise ScenarioError(f"outputs.series[{k}]", f"unknown series {s!r}; available: {sorted(known)}")

    vdoc = doc.get("validation") or {}
    _check_keys(vdoc, {"eps_threshold"}, "validation")
    eps_threshold = evaluate_real(vdoc.get("eps_threshold", DEFAULT_EPS_THRESHOLD), "validation.eps_threshold")

    notes = doc.get("notes") or []
    if isinstance(notes, str):
        notes = [notes]
    return Scenario(
        name=name,
        description=str(doc.get("description", "")),
        system=system,
        rho0=rho0,
        omega_c=omega_c,
        filter=spec,
        duration=duration,
        record_dt=record_dt,
        dt=dt,
        oversample=oversample,
        dissipators=cfg,
        dress=dress,
        picture=picture,
        entries=tuple(entries),
        variants=variants,
        series=series,
        eps_threshold=eps_threshold,
        drive_form=form,
        notes=tuple(str(n) for n in notes),
    )


def _scaled_operator(spec, path: str) -> np.ndarray:
    if isinstance(spec, dict) and "operator" in spec:
        _check_keys(spec, {"operator", "scale"}, path)
        op = operator_spec(spec["operator"], f"{path}.operator")
        return quantity(spec.get("scale", 1.0), f"{path}.scale", real=False) * op
    return operator_spec(spec, path)


def _parse_rho(spec, d: int) -> np.ndarray:
    if isinstance(spec, dict) and "ket" in spec:
        _check_keys(spec, {"ket"}, "rho0")
        ket = [evaluate(x, f"rho0.ket[{k}]") for k, x in enumerate(spec["ket"])]
        rho = ket_to_density(ket)
    else:
        rho = operator_spec(spec, "rho0")
    if rho.shape != (d, d):
        raise ScenarioError("rho0", f"shape {rho.shape} does not match system dimension {d}")
    try:
        return check_density_matrix(rho, "rho0")
    except ValueError as exc:
        raise ScenarioError("rho0", str(exc)) from exc


# presets ---------------------------------------------------------------------


def _preset_files() -> dict[str, object]:
    root = resources.files(PRESET_PACKAGE)
    return {p.name[:-5]: p for p in root.iterdir() if p.name.endswith(".yaml")}


def preset_text(name: str) -> str:
    files = _preset_files()
    if name not in files:
        raise KeyError(f"unknown preset {name!r}; available: {sorted(files)}")
    return files[name].read_text(encoding="utf-8")


def load_preset(name: str) -> Scenario:
    return parse_scenario(preset_text(name))


def list_presets() -> list[tuple[str, str]]:
    out = []
    for name in sorted(_preset_files()):
        doc = yaml.safe_load(preset_text(name))
        out.append((name, str(doc.get("description", ""))))
    return out


def load_scenario(ref: str) -> Scenario:
    """A preset name or a path to a scenario file."""
    path = Path(ref)
    if path.is_file():
        return parse_scenario(path.read_text(encoding="utf-8"))
    if ref in _preset_files():
        return load_preset(ref)
    raise ScenarioError("<document>", f"{ref!r} is neither a file nor a preset name")


# running ---------------------------------------------------------------------


@dataclass
class ComparisonReport:
    """Errors of each effective variant against the coarse-grained exact series.

    ``errors[variant]["ij"]`` holds L-infinity and RMS errors of the real and
    imaginary parts over ``window`` (filter buffers excluded).
    """

    scenario: str
    window: tuple[float, float]
    errors: dict
    diagnostics: dict
    status: dict
    runtime: float = field(default=0.0, compare=False)

    @property
    def ok(self) -> bool:
        return all(s == "ok" for s in self.status.values())

    def error(self, variant: str, entry: str = "01", part: str = "re", metric: str = "linf") -> float:
        return self.errors[variant][entry][f"{metric}_{part}"]

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "window": list(self.window),
            "errors": self.errors,
            "diagnostics": self.diagnostics,
            "status": self.status,
        }


@dataclass
class RunResult:
    scenario: Scenario
    report: ComparisonReport
    series: dict[str, TimeSeries]
    slow_grid: TimeGrid


def fast_step(s: Scenario) -> float:
    """Propagation record step: divides ``record_dt`` and resolves the fastest frequency."""
    if s.dt is not None:
        return s.dt
    nu_max = float(s.system.omegas.max()) if s.system.terms else 0.0
    evals = np.linalg.eigvalsh(s.system.H0)
    nu_max += float(evals.max() - evals.min())
    if nu_max == 0:
        return s.record_dt
    k = max(1, math.ceil(s.record_dt * nu_max * s.oversample / (2 * math.pi)))
    return s.record_dt / k


def _entry_errors(ref: np.ndarray, approx: np.ndarray) -> dict:
    out = {}
    for part, f in (("re", np.real), ("im", np.imag)):
        diff = np.abs(f(ref) - f(approx))
        out[f"linf_{part}"] = float(diff.max())
        out[f"rms_{part}"] = float(np.sqrt(np.mean(diff**2)))
    return out


def run_scenario(s: Scenario, variants: tuple[str, ...] | None = None, check_validity: bool = True) -> RunResult:
    """Exact propagation, coarse-graining, effective master equation and comparison."""
    start = time.perf_counter()
    variants = tuple(variants) if variants is not None else s.variants
    scales = compute_scales(s.system, s.omega_c)
    validity = validate(s.system, scales, s.eps_threshold)
    if check_validity and not validity.ok:
        raise ValidationFailure(validity)

    dt = fast_step(s)
    stride = int(round(s.record_dt / dt))
    w = s.filter.half_width
    buffer = (math.ceil(w / s.record_dt - 1e-9) + 1) * s.record_dt
    t0 = s.t0
    fast = TimeGrid(t0 - buffer, t0 + s.duration + buffer, dt, t0)
    slow = TimeGrid(t0, t0 + s.duration, s.record_dt, t0)

    exact = propagate_exact(s.system, s.rho0, fast)
    expansion = derive_kick_expansion(s.system, scales, 2)
    diagnostics = {
        "epsilon": scales.epsilon,
        "Omega": scales.Omega,
        "omega_min": scales.omega_min,
        "omega_c": scales.omega_c,
        "max_beat": scales.max_beat,
        "validity": [{"check": f.check, "level": f.level, "message": f.message} for f in validity],
        "fast_dt": dt,
        "record_dt": s.record_dt,
        "filter_half_width": w,
        "propagation_substeps": exact.meta["substeps"],
        "unitarity_defect": exact.meta["unitarity_defect"],
    }
    if s.drive_form == "cosine" and s.system.terms:
        amp = max(np.linalg.norm(t.V, 2) for t in s.system.terms)
        diagnostics["epsilon_cosine_amplitude"] = float(2 * amp / scales.omega_min)
        diagnostics["epsilon_exponential_amplitude"] = float(amp / scales.omega_min)

    series = exact
    ueff_slow = None
    if s.picture == "interaction":
        heff = expansion.effective_hamiltonian(s.dissipators.heff_order)
        _, ueff = propagate_effective(heff, s.rho0, fast)
        series = to_interaction_picture(exact, ueff)
        ueff_slow = ueff.resample(slow)
    pur = purity(exact)
    diagnostics["exact_trace_defect"] = float(np.abs(np.einsum("nii->n", exact.values) - 1).max())
    diagnostics["exact_purity_drift"] = float(np.abs(pur - pur[fast.origin_index]).max())

    tcg = sinc_convolve(series, s.filter, t0, t0 + s.duration, stride=stride)
    dressed = dressed_initial_condition(series, expansion, s.filter, t0, dress=s.dress)
    diagnostics["initial_projection"] = dressed.projection
    diagnostics["dressed"] = s.dress

    out = {"exact": series.resample(slow), "tcg": TimeSeries(slow, tcg.values, "tcg", {})}
    status = {}
    me_diag = {}
    for v in variants:
        cfg = s.dissipators.variant(v)
        try:
            me = integrate_me(s.system, scales, expansion, cfg, dressed.rho, slow, label=VARIANT_LABELS[v])
            status[v] = "ok"
        except NumericalAbort as exc:
            if exc.partial is None:
                raise
            me = exc.partial
            status[v] = f"aborted: {exc}"
        me_diag[v] = {
            "trace_defect": me.meta["trace_defect"],
            "hermiticity_defect": me.meta["hermiticity_defect"],
            "min_eigenvalue": me.meta["min_eigenvalue"],
            "eigen_dips": len(me.meta["eigen_dips"]),
            "worst_dip": min(
                ({"t": e.t, "eigenvalue": e.eigenvalue} for e in me.meta["eigen_dips"]),
                key=lambda e: e["eigenvalue"],
                default=None,
            ),
            "substeps": me.meta["substeps"],
        }
        if ueff_slow is not None:
            me = to_interaction_picture(me, ueff_slow)
        out[VARIANT_LABELS[v]] = TimeSeries(slow, me.values, VARIANT_LABELS[v], {})
    diagnostics["master_equation"] = me_diag

    times = slow.times
    lo, hi = t0 + w, t0 + s.duration - w
    mask = (times >= lo - 1e-9) & (times <= hi + 1e-9)
    errors = {}
    for v in variants:
        label = VARIANT_LABELS[v]
        errors[v] = {
            f"{i}{j}": _entry_errors(out["tcg"].values[mask, i, j], out[label].values[mask, i, j])
            for i, j in s.entries
        }
    report = ComparisonReport(s.name, (lo, hi), errors, diagnostics, status)
    report.runtime = time.perf_counter() - start
    return RunResult(s, report, out, slow)


# output files ----------------------------------------------------------------


def csv_columns(labels, entries) -> list[str]:
    cols = ["t"]
    for label in labels:
        for i, j in entries:
            cols += [f"{label}_re_{i}{j}", f"{label}_im_{i}{j}"]
    return cols


def emit_csv(path, times, series: dict[str, TimeSeries], labels, entries) -> Path:
    """Write ``t`` and the real/imaginary parts of the selected entries, full precision."""
    path = Path(path)
    cols = [np.asarray(times, dtype=float)]
    for label in labels:
        vals = series[label].values
        for i, j in entries:
            cols += [vals[:, i, j].real, vals[:, i, j].imag]
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(csv_columns(labels, entries))
        for row in zip(*cols):
            writer.writerow([repr(float(x)) for x in row])
    return path


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    return header, np.array([[float(x) for x in r] for r in body]).reshape(len(body), len(header))


def write_outputs(result: RunResult, out_dir) -> dict[str, Path]:
    """``series.csv``, ``report.json`` (deterministic) and ``timing.json``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    s = result.scenario
    labels = [lab for lab in s.output_labels() if lab in result.series]
    paths = {"series": emit_csv(out_dir / "series.csv", result.slow_grid.times, result.series, labels, s.entries)}
    report = result.report.to_dict()
    report["notes"] = list(s.notes)
    paths["report"] = out_dir / "report.json"
    paths["report"].write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    paths["timing"] = out_dir / "timing.json"
    paths["timing"].write_text(json.dumps({"runtime_s": result.report.runtime}) + "\n", encoding="utf-8")
    return paths
