"""JSON scenario files.

Keys carry their units. Every key is optional; an empty object ``{}``
describes the reference mass-point experiment (wave a=0.0055 m, n=10, eps=0,
Beta profile to pi/2 rad in 6 s, tolerances 1e-4).
"""

from __future__ import annotations

import copy
import hashlib
import json
import math

from .errors import ConfigError
from .integrator import IntegratorConfig
from .model import GeometricParams, WaveParams
from .profile import RestToRestSpec
from .simulation import ScenarioConfig

DEFAULTS = {
    "name": "reference-masspoint",
    "mode": "inverse-feedforward",
    "geometry": {
        "rotor_mass_kg": 0.4,
        "carrier_mass_kg": 1.0,
        "carrier_radius_m": 0.145,
        "rotor_radius_m": 0.131,
        "gravity_m_s2": 9.8,
        "carrier_inertia_kg_m2": 0.0140,
        "rotor_inertia_kg_m2": 0.0,
        "consistent_carrier": False,
    },
    "wave": {
        "amplitude_m": 0.0055,
        "frequency": 10.0,
        "phase_rad": 0.0,
        "strict": True,
    },
    "profile": {
        "displacement_rad": math.pi / 2,
        "duration_s": 6.0,
    },
    "integrator": {
        "rel_tol": 1e-4,
        "abs_tol": 1e-4,
        "h_init_s": None,
        "h_min_s": 1e-12,
        "h_max_s": None,
        "max_steps": 1_000_000,
    },
    "singularity_guard_kg_m2": 1e-8,
    "sample_dt_s": None,
}

_GEOM_KEYS = {
    "rotor_mass_kg": "m_c",
    "carrier_mass_kg": "M_b",
    "carrier_radius_m": "R",
    "rotor_radius_m": "r",
    "gravity_m_s2": "g",
    "carrier_inertia_kg_m2": "I_b",
    "rotor_inertia_kg_m2": "I_c",
}


def _merge(base, override, path=""):
    for key, value in override.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key {where!r} must be an object")
            _merge(base[key], value, where + ".")
        else:
            base[key] = value


def parse_override(text):
    """Parse ``section.key=value``; the value is read as JSON when possible."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    out = value
    for part in reversed(key.strip().split(".")):
        out = {part: out}
    return out


def resolve(raw=None, overrides=()):
    """Defaults merged with ``raw`` and then with each override, in order."""
    doc = copy.deepcopy(DEFAULTS)
    if raw is not None:
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")
        _merge(doc, raw)
    for item in overrides:
        _merge(doc, parse_override(item) if isinstance(item, str) else item)
    return doc


def load(path, overrides=()):
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return resolve(raw, overrides)


def checksum(doc):
    """SHA-256 of the canonical JSON form of a resolved config."""
    text = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number")
    return float(value)


def _optional(value, where):
    return None if value is None else _number(value, where)


def build_geometry(doc):
    g = doc["geometry"]
    kwargs = {attr: _number(g[key], f"geometry.{key}") for key, attr in _GEOM_KEYS.items()}
    if g["consistent_carrier"]:
        kwargs.pop("I_b")
        return GeometricParams.consistent_carrier(**kwargs)
    return GeometricParams(**kwargs)


def build_wave(doc):
    w = doc["wave"]
    return WaveParams(
        _number(w["amplitude_m"], "wave.amplitude_m"),
        _number(w["frequency"], "wave.frequency"),
        _number(w["phase_rad"], "wave.phase_rad"),
    )


def build_scenario(doc, validate=True):
    """Turn a resolved config document into a ScenarioConfig.

    With ``validate`` the rotor must sit inside the carrier and, when
    ``wave.strict`` is set, the amplitude must be small against ``min(r, R)``.
    """
    geom = build_geometry(doc)
    wave = build_wave(doc)
    if validate:
        geom.validate_inside()
        wave.check_amplitude(geom, strict=bool(doc["wave"]["strict"]))
    p = doc["profile"]
    profile = RestToRestSpec(
        _number(p["displacement_rad"], "profile.displacement_rad"),
        _number(p["duration_s"], "profile.duration_s"),
    )
    i = doc["integrator"]
    max_steps = i["max_steps"]
    if isinstance(max_steps, bool) or not isinstance(max_steps, int):
        raise ConfigError("integrator.max_steps must be an integer")
    integrator = IntegratorConfig(
        rel_tol=_number(i["rel_tol"], "integrator.rel_tol"),
        abs_tol=_number(i["abs_tol"], "integrator.abs_tol"),
        h_init=_optional(i["h_init_s"], "integrator.h_init_s"),
        h_min=_number(i["h_min_s"], "integrator.h_min_s"),
        h_max=_optional(i["h_max_s"], "integrator.h_max_s"),
        max_steps=max_steps,
    )
    return ScenarioConfig(
        geom=geom,
        wave=wave,
        profile=profile,
        integrator=integrator,
        mode=str(doc["mode"]),
        singularity_guard=_number(doc["singularity_guard_kg_m2"], "singularity_guard_kg_m2"),
        sample_dt=_optional(doc["sample_dt_s"], "sample_dt_s"),
        name=str(doc["name"]),
    )
