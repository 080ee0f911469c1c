"""Command-line entry point: ``floqdiss list | validate | run | design``."""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np
import yaml

from .designer import DissipationTarget, Jump, design, predicted_rate, realized_rate
from .errors import FloqdissError, NumericalAbort, PairOverlapError, ScenarioError, ValidationFailure
from .model import compute_scales, validate
from .scenario import (
    VARIANTS,
    _check_keys,
    list_presets,
    load_scenario,
    operator_spec,
    quantity,
    run_scenario,
    write_outputs,
)

EXIT_OK, EXIT_INVALID, EXIT_ABORT = 0, 2, 3


def _print_findings(findings) -> None:
    for f in findings:
        print(f"  [{f.level}] {f.check}: {f.message}")


def cmd_list(args) -> int:
    for name, desc in list_presets():
        print(f"{name:6s}  {desc}")
    return EXIT_OK


def cmd_validate(args) -> int:
    s = load_scenario(args.scenario)
    report = validate(s.system, compute_scales(s.system, s.omega_c), s.eps_threshold)
    print(f"{s.name}: {'valid' if report.ok else 'INVALID'}")
    _print_findings(report)
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_run(args) -> int:
    s = load_scenario(args.scenario)
    variants = (args.variant,) if args.variant else None
    out = Path(args.out)
    try:
        result = run_scenario(s, variants)
    except NumericalAbort as exc:
        out.mkdir(parents=True, exist_ok=True)
        (out / "FAILED").write_text(f"numerical abort: {exc}\n", encoding="utf-8")
        raise
    paths = write_outputs(result, out)
    rep = result.report
    print(f"{s.name}: window [{rep.window[0]:.4g}, {rep.window[1]:.4g}], runtime {rep.runtime:.1f} s")
    for v, per_entry in rep.errors.items():
        for entry, e in per_entry.items():
            print(f"  {v:7s} rho_{entry}: Linf(Re) {e['linf_re']:.4g}  RMS(Re) {e['rms_re']:.4g}  [{rep.status[v]}]")
    for f in rep.diagnostics["validity"]:
        if f["level"] != "pass":
            print(f"  [{f['level']}] {f['check']}: {f['message']}")
    for p in paths.values():
        print(f"  wrote {p}")
    aborted = {v: st for v, st in rep.status.items() if st != "ok"}
    if aborted:
        # partial series are already on disk; the marker says which variants stopped early
        lines = [f"{v}: {st}" for v, st in aborted.items()]
        (out / "FAILED").write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"  {len(aborted)} variant(s) aborted; see {out / 'FAILED'}", file=sys.stderr)
        return EXIT_ABORT
    return EXIT_OK


def parse_target(text: str):
    doc = yaml.safe_load(text)
    _check_keys(doc, {"omega_c", "H0", "jumps"}, "", required={"omega_c", "jumps"})
    omega_c = quantity(doc["omega_c"], "omega_c")
    jumps = []
    for k, j in enumerate(doc["jumps"]):
        path = f"jumps[{k}]"
        _check_keys(j, {"L", "amplitude", "carrier", "beat", "phase"}, path, required={"L", "carrier", "beat"})
        jumps.append(
            Jump(
                operator_spec(j["L"], f"{path}.L"),
                quantity(j.get("amplitude", 1.0), f"{path}.amplitude", real=False),
                quantity(j["carrier"], f"{path}.carrier"),
                quantity(j["beat"], f"{path}.beat"),
                quantity(j.get("phase", 0.0), f"{path}.phase"),
            )
        )
    h0 = operator_spec(doc["H0"], "H0") if doc.get("H0") is not None else None
    try:
        target = DissipationTarget(tuple(jumps), omega_c)
    except ValueError as exc:
        raise ScenarioError("jumps", str(exc)) from exc
    return target, h0


def cmd_design(args) -> int:
    target, h0 = parse_target(Path(args.target).read_text(encoding="utf-8"))
    drive = design(target, h0)
    scales = compute_scales(drive.system, target.omega_c)
    out = {"terms": [], "jumps": []}
    print("Floquet terms (omega in rad/T0):")
    for term in drive.system.terms:
        print(f"  omega={term.omega:.10g}  V={np.array2string(term.V, precision=6)}")
        out["terms"].append({"omega": term.omega, "V_re": term.V.real.tolist(), "V_im": term.V.imag.tolist()})
    for m, j in enumerate(target.jumps):
        t_peak = (math.pi / 2 - j.phase) / j.beat if j.beat > 0 else 0.0
        p = predicted_rate(target, m, t_peak)
        r, res = realized_rate(drive, scales, m, t_peak, with_residual=True)
        print(f"  jump {m}: peak t={t_peak:.6g}  predicted {p:.6g}  realized {r:.6g}  channel residual {res:.2g}")
        out["jumps"].append({"t_peak": t_peak, "predicted": p, "realized": r, "residual": res})
    if drive.report is not None:
        _print_findings(drive.report)
    if args.out:
        Path(args.out).write_text(json.dumps(out, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return EXIT_OK if drive.report is None or drive.report.ok else EXIT_INVALID


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="floqdiss", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="list built-in presets").set_defaults(func=cmd_list)
    v = sub.add_parser("validate", help="check a scenario's frequency hierarchy")
    v.add_argument("scenario", help="scenario file or preset name")
    v.set_defaults(func=cmd_validate)
    r = sub.add_parser("run", help="run a scenario and write series.csv / report.json")
    r.add_argument("scenario", help="scenario file or preset name")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--variant", choices=VARIANTS, help="run only this master-equation variant")
    r.set_defaults(func=cmd_run)
    d = sub.add_parser("design", help="synthesize a drive for target jump operators")
    d.add_argument("target", help="target file")
    d.add_argument("--out", help="write the designed drive as JSON")
    d.set_defaults(func=cmd_design)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, ValidationFailure, PairOverlapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_ABORT
    except (FloqdissError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
