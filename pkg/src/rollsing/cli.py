"""``rollsing`` command line: simulate, design-wave, map-region, compare.

Exit codes: 0 success, 2 configuration error, 3 coupling singularity
(partial trace still written), 4 integrator failure, 5 no feasible amplitude.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from . import config as config_mod
from .errors import (
    ConfigError,
    DegenerateInertia,
    IntegratorError,
    NoFeasibleAmplitude,
    SingularityHit,
)
from .model import WaveParams
from .simulation import (
    compare_classic_modified,
    power_balance_residual,
    roundtrip_forward_check,
    simulate_inverse,
)
from .singularity import delta_mu, design_wave_amplitude, min_coupling_scan, region_map, theorem_audit

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SINGULAR = 3
EXIT_INTEGRATOR = 4
EXIT_INFEASIBLE = 5

OUT_ENV = "ROLLSING_OUT"

CSV_COLUMNS = (
    "t", "theta", "theta_dot", "theta_ddot_cmd", "gamma", "gamma_dot", "gamma_ddot", "zeta",
    "tau_gamma", "M12", "M_bar", "kinetic", "potential", "power_residual", "mass_y", "mass_z",
)

SUMMARY_KEYS = (
    "scenario", "samples", "t_final", "min_abs_M12", "min_M12", "max_abs_tau_gamma",
    "max_abs_gamma", "zeta_range", "final_state", "final_errors", "max_power_residual",
    "negative_M12", "singularity_hit", "singularity", "steps", "rejected_steps",
    "sign_reversals_gamma_dot", "sign_changes_zeta", "feasibility", "roundtrip",
)


def fmt(x):
    """17 significant digits: exact round trip for binary64."""
    return format(float(x), ".17g")


def _atomic_write(path, data):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_bytes(header, rows):
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(v if isinstance(v, str) else fmt(v) for v in row) + "\n")
    return buf.getvalue().encode("utf-8")


def _json_bytes(doc):
    return (json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n").encode("utf-8")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


class Outputs:
    """Collects artifact files for one command and writes the manifest."""

    def __init__(self, out_dir):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.files = []

    def write(self, name, data):
        _atomic_write(self.dir / name, data)
        self.files.append({
            "name": name,
            "size": len(data),
            "sha256": hashlib.sha256(data).hexdigest(),
        })

    def manifest(self, scenario, doc, extra=None):
        manifest = {
            "scenario": scenario,
            "config": doc,
            "config_checksum": config_mod.checksum(doc),
            "output_dir": str(self.dir),
            "files": list(self.files),
            "tool_version": __version__,
        }
        if extra:
            manifest.update(extra)
        _atomic_write(self.dir / "manifest.json", _json_bytes(manifest))
        return manifest


def trace_rows(trace):
    cols = [trace[name] for name in CSV_COLUMNS]
    return zip(*cols)


def trace_summary(trace, audit=None, roundtrip=None):
    summary = dict(trace.summary)
    summary.setdefault("steps", None)
    summary.setdefault("rejected_steps", None)
    summary.setdefault("sign_reversals_gamma_dot", None)
    summary.setdefault("sign_changes_zeta", None)
    summary["feasibility"] = audit
    summary["roundtrip"] = roundtrip
    return {key: summary[key] for key in SUMMARY_KEYS}


def _resolve_out(args):
    out = args.out or os.environ.get(OUT_ENV)
    if not out:
        raise ConfigError(f"no output directory: pass --out or set {OUT_ENV}")
    return out


def _load(path, overrides):
    if path is None:
        return config_mod.resolve(None, overrides)
    return config_mod.load(path, overrides)


def _audit(cfg):
    if cfg.wave.a > 0 and not cfg.wave.n > 2:
        return None
    audit = theorem_audit(cfg.wave, cfg.geom)
    audit["disagreement_flag"] = not audit["agree"]
    return audit


def cmd_simulate(args):
    doc = _load(args.config, args.set)
    cfg = config_mod.build_scenario(doc)
    out = Outputs(_resolve_out(args))
    audit = _audit(cfg)
    code = EXIT_OK
    try:
        trace = simulate_inverse(cfg)
    except SingularityHit as exc:
        trace = exc.partial
        code = EXIT_SINGULAR
        print(f"singularity: {exc}", file=sys.stderr)
    roundtrip = None
    if code == EXIT_OK and cfg.mode == "forward-roundtrip":
        report = roundtrip_forward_check(trace, cfg)
        roundtrip = {
            "max_theta_deviation": report.max_theta_deviation,
            "max_gamma_deviation": report.max_gamma_deviation,
            "final_theta_deviation": report.final_theta_deviation,
        }
    out.write("trace.csv", _csv_bytes(CSV_COLUMNS, trace_rows(trace)))
    out.write("summary.json", _json_bytes(trace_summary(trace, audit, roundtrip)))
    out.manifest(cfg.name, doc, {"exit_code": code})
    return code


def cmd_design_wave(args):
    doc = _load(args.config, args.set)
    geom = config_mod.build_geometry(doc)
    n = args.n if args.n is not None else config_mod._number(doc["wave"]["frequency"], "wave.frequency")
    eps = args.eps if args.eps is not None else config_mod._number(doc["wave"]["phase_rad"], "wave.phase_rad")
    bracket = None
    if args.a_max is not None:
        bracket = (0.0, args.a_max)
    design = design_wave_amplitude(n, eps, geom, bracket=bracket, safety_factor=args.safety)
    chosen = WaveParams(design.a_min, n, eps)
    dm = delta_mu(chosen, geom)
    scan_min, scan_arg = min_coupling_scan(chosen, geom)
    recommended = WaveParams(design.recommended, n, eps)
    rec_min, rec_arg = min_coupling_scan(recommended, geom)
    report = {
        "n": n,
        "eps": eps,
        "a_min": design.a_min,
        "binding_condition": design.binding,
        "safety_factor": design.safety_factor,
        "a_recommended": design.recommended,
        "verdict": design.verdict.as_dict(),
        "delta_mu": {"dmu1": dm.dmu1, "dmu2": dm.dmu2, "dmu3": dm.dmu3,
                     "gamma1": dm.gamma1, "gamma2": dm.gamma2},
        "min_coupling_scan": {
            "a_min": {"min_M12": scan_min, "argmin_zeta": scan_arg, "positive": scan_min > 0},
            "a_recommended": {"min_M12": rec_min, "argmin_zeta": rec_arg, "positive": rec_min > 0},
        },
        "theorem_scan_agree": bool(design.verdict.feasible == (scan_min > 0)),
    }
    text = _json_bytes(report)
    if args.out or os.environ.get(OUT_ENV):
        out = Outputs(_resolve_out(args))
        out.write("design.json", text)
        out.manifest(str(doc["name"]), doc)
    sys.stdout.write(text.decode("utf-8"))
    return EXIT_OK


def cmd_map_region(args):
    doc = _load(args.config, args.set)
    geom = config_mod.build_geometry(doc)
    wave = config_mod.build_wave(doc)
    if args.count < 1:
        raise ConfigError("--count must be positive")
    values = np.linspace(args.start, args.stop, args.count)
    rmap = region_map(args.param, values, geom=geom, wave=wave, theta=args.theta, n_gamma=args.n_gamma)
    zeta = rmap.zeta

    def rows():
        for i, v in enumerate(rmap.values):
            for j in range(zeta.size):
                yield (v, zeta[j], rmap.margin[i, j], "true" if rmap.mask[i, j] else "false")

    out = Outputs(_resolve_out(args))
    out.write("region.csv", _csv_bytes(("param", "zeta", "margin", "singular"), rows()))
    out.manifest(str(doc["name"]), doc, {"sweep": {
        "param": args.param, "start": args.start, "stop": args.stop, "count": args.count,
        "n_gamma": args.n_gamma, "theta": args.theta,
    }})
    return EXIT_OK


def cmd_compare(args):
    doc_c = _load(args.config, args.set)
    doc_m = _load(args.modified, args.set)
    cfg_c = config_mod.build_scenario(doc_c)
    cfg_m = config_mod.build_scenario(doc_m)
    out = Outputs(_resolve_out(args))
    cmp = compare_classic_modified(cfg_c, cfg_m)
    c, m = cmp.classic, cmp.modified
    n = min(len(c), len(m))
    header = ("t", "theta_classic", "theta_modified", "gamma_classic", "gamma_modified",
              "tau_gamma_classic", "tau_gamma_modified")
    rows = zip(c["t"][:n], c["theta"][:n], m["theta"][:n], c["gamma"][:n], m["gamma"][:n],
               c["tau_gamma"][:n], m["tau_gamma"][:n])
    out.write("paired.csv", _csv_bytes(header, rows))
    out.write("classic_trace.csv", _csv_bytes(CSV_COLUMNS, trace_rows(c)))
    out.write("modified_trace.csv", _csv_bytes(CSV_COLUMNS, trace_rows(m)))
    result = {
        "metrics": cmp.metrics,
        "classic": trace_summary(c),
        "modified": trace_summary(m),
        "power_residual": {"classic": power_balance_residual(c), "modified": power_balance_residual(m)},
    }
    out.write("comparison.json", _json_bytes(result))
    out.manifest(f"{cfg_c.name}-vs-{cfg_m.name}", {"classic": doc_c, "modified": doc_m})
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="rollsing", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"rollsing {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="scenario JSON file (defaults describe the reference rig)")
        p.add_argument("--out", help=f"output directory (or set {OUT_ENV})")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config entry, e.g. wave.amplitude_m=0.006")
        p.add_argument("--seedless", action="store_true",
                       help="deterministic mode; accepted for compatibility, runs are always deterministic")

    p = sub.add_parser("simulate", help="feed-forward inverse-dynamics run")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("design-wave", help="minimal wave amplitude satisfying the design inequalities")
    common(p)
    p.add_argument("--n", type=float, help="wave frequency (default: config wave.frequency)")
    p.add_argument("--eps", type=float, help="wave phase in rad (default: config wave.phase_rad)")
    p.add_argument("--a-max", type=float, help="upper end of the amplitude search bracket")
    p.add_argument("--safety", type=float, default=1.12, help="factor applied to a_min for a_recommended")
    p.set_defaults(func=cmd_design_wave)

    p = sub.add_parser("map-region", help="singular-region grid over a parameter sweep")
    common(p)
    p.add_argument("--param", default="r", help="swept parameter: m_c, M_b, R, r, g, I_b, I_c, a, n, eps")
    p.add_argument("--start", type=float, default=0.05)
    p.add_argument("--stop", type=float, default=0.145)
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--n-gamma", type=int, default=720)
    p.add_argument("--theta", type=float, default=0.0)
    p.set_defaults(func=cmd_map_region)

    p = sub.add_parser("compare", help="classic versus wave-modified model")
    common(p)
    p.add_argument("--modified", required=True, help="scenario JSON for the modified model")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except NoFeasibleAmplitude as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (IntegratorError, DegenerateInertia) as exc:
        print(f"integrator failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRATOR
    except SingularityHit as exc:
        print(f"singularity: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
