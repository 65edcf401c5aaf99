"""Scenario configuration files.

A config file holds one or more YAML documents; each document is one
scenario and is validated against SCHEMA before anything is computed.

Units: times in microseconds, angular frequencies in rad/us. Gate scenarios
give the com-mode frequency as omega_2pi_mhz (omega / 2pi in MHz) and the
damping as gamma_over_omega; trajectory scenarios give omega and gamma in
rad/us directly.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path as FilePath

import jsonschema
import numpy as np
import yaml

from .dynamics import ForceProfile, ModeParams, SampledForce, ScaledSine, TimeGrid
from .errors import InvalidInputError
from .forces import ConstraintSet, gram_schmidt_force, kappa_for_phase, sine_seed
from .gate import TWO_PI, GateConfig, build_gate

SCHEMA_VERSION = 1
KINDS = ("trajectory", "gate", "sweep-gamma", "sweep-T", "thermal-mc", "cumulant", "oracle-check")

_number = {"type": "number"}
_positive = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}
_steps = {"type": "integer", "minimum": 2, "multipleOf": 2}

_values = {
    "oneOf": [
        {"type": "array", "items": _nonneg, "minItems": 1},
        {"type": "object", "additionalProperties": False,
         "required": ["start", "stop", "num"],
         "properties": {"start": _nonneg, "stop": _nonneg,
                        "num": {"type": "integer", "minimum": 1},
                        "log": {"type": "boolean"}}},
    ]
}

_force = {
    "type": "object",
    "additionalProperties": False,
    "required": ["family"],
    "properties": {
        "family": {"enum": ["least-dephasing", "scaled-sine", "gram-schmidt", "sampled"]},
        "amplitude": _number,
        "frequency": _positive,
        "seed_k": {"type": "integer", "minimum": 1},
        "max_frequency_ratio": _positive,
        "file": {"type": "string"},
        "damping_factor": {"type": "boolean"},
    },
}

_common = {
    "schema_version": {"const": SCHEMA_VERSION},
    "kind": {"enum": list(KINDS)},
    "name": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
    "n_steps": _steps,
}

_gate_props = {
    "omega_2pi_mhz": _positive,
    "gamma_over_omega": _nonneg,
    "duration_us": _positive,
    "nbar": _nonneg,
    "target_phase": _number,
    "compensate": {"type": "boolean"},
    "mass_scale": _positive,
    "force": _force,
}

SCHEMA = {
    "type": "object",
    "required": ["schema_version", "kind", "name"],
    "properties": {"kind": {"enum": list(KINDS)}},
    "allOf": [
        {"if": {"properties": {"kind": {"const": "trajectory"}}},
         "then": {"additionalProperties": False,
                  "required": ["omega", "duration_us", "force"],
                  "properties": dict(_common, omega=_positive, gamma=_nonneg, duration_us=_positive,
                                     force=_force, phase=_number, z0={"type": "array", "items": _number,
                                                                      "minItems": 2, "maxItems": 2})}},
        {"if": {"properties": {"kind": {"enum": ["gate", "oracle-check"]}}},
         "then": {"additionalProperties": False,
                  "properties": dict(_common, **_gate_props)}},
        {"if": {"properties": {"kind": {"const": "sweep-gamma"}}},
         "then": {"additionalProperties": False, "required": ["gamma_over_omega"],
                  "properties": dict(_common, **dict(_gate_props, gamma_over_omega=_values))}},
        {"if": {"properties": {"kind": {"const": "sweep-T"}}},
         "then": {"additionalProperties": False, "required": ["duration_us"],
                  "properties": dict(_common, **dict(_gate_props, duration_us=_values))}},
        {"if": {"properties": {"kind": {"enum": ["thermal-mc", "cumulant"]}}},
         "then": {"additionalProperties": False, "required": ["gamma_nbar_T"],
                  "properties": dict(_common, **dict(
                      {k: v for k, v in _gate_props.items() if k != "nbar"},
                      gamma_nbar_T=_values, seed={"type": "integer", "minimum": 0},
                      n_samples={"type": "integer", "minimum": 2},
                      save_paths={"type": "integer", "minimum": 0}))}},
    ],
}


@dataclass(frozen=True)
class Scenario:
    """One validated scenario document."""

    kind: str
    name: str
    data: dict
    base_dir: FilePath

    def get(self, key, default=None):
        return self.data.get(key, default)


def validate(document: dict) -> None:
    """Raise InvalidInputError naming the offending field."""
    if not isinstance(document, dict):
        raise InvalidInputError("a scenario document must be a mapping")
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(document), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = "/".join(str(p) for p in err.absolute_path) or "<document>"
        raise InvalidInputError(f"config field {where}: {err.message}")


def load_scenarios(path) -> list[Scenario]:
    """Parse and validate every document in a config file."""
    path = FilePath(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InvalidInputError(f"cannot read config {path}: {exc}") from exc
    return parse_scenarios(text, path.parent)


def parse_scenarios(text: str, base_dir=".") -> list[Scenario]:
    try:
        docs = [d for d in yaml.safe_load_all(text) if d is not None]
    except yaml.YAMLError as exc:
        raise InvalidInputError(f"config is not valid YAML: {exc}") from exc
    if not docs:
        raise InvalidInputError("config contains no scenario")
    out, names = [], set()
    for doc in docs:
        validate(doc)
        if doc["name"] in names:
            raise InvalidInputError(f"config field name: duplicate scenario name {doc['name']!r}")
        names.add(doc["name"])
        out.append(Scenario(doc["kind"], doc["name"], doc, FilePath(base_dir)))
    return out


def expand_values(spec) -> np.ndarray:
    """A list of numbers, or {start, stop, num, log} -> sorted unique array."""
    if isinstance(spec, dict):
        if spec.get("log"):
            if spec["start"] <= 0 or spec["stop"] <= 0:
                raise InvalidInputError("config field values: log ranges need positive bounds")
            vals = np.geomspace(spec["start"], spec["stop"], spec["num"])
        else:
            vals = np.linspace(spec["start"], spec["stop"], spec["num"])
    else:
        vals = np.asarray(spec, dtype=float)
    return np.unique(vals)


def load_sampled_force(file, base_dir, duration: float) -> SampledForce:
    """Two-column text/CSV file of (t_us, f) samples."""
    path = FilePath(file)
    if not path.is_absolute():
        path = FilePath(base_dir) / path
    try:
        data = np.loadtxt(path, delimiter=",", ndmin=2, comments="#")
    except (OSError, ValueError) as exc:
        raise InvalidInputError(f"config field force/file: cannot load {path}: {exc}") from exc
    if data.shape[1] != 2:
        raise InvalidInputError("config field force/file: expected two columns (t, f)")
    force = SampledForce(data[:, 0], data[:, 1])
    if force.duration < duration * (1 - 1e-12):
        raise InvalidInputError("config field force/file: samples do not cover the duration")
    return force


def trajectory_setup(sc: Scenario) -> tuple[ForceProfile, ModeParams, TimeGrid]:
    """Single-mode force, parameters and grid; the force is rescaled to the
    requested isolated phase when ``phase`` is given."""
    d = sc.data
    T = float(d["duration_us"])
    params = ModeParams(float(d["omega"]), float(d.get("gamma", 0.0)), T)
    grid = TimeGrid(T, int(d.get("n_steps", 4096)))
    spec = d["force"]
    fam = spec["family"]
    damp = params.gamma if spec.get("damping_factor", True) else 0.0
    if fam == "scaled-sine":
        if "frequency" not in spec:
            raise InvalidInputError("config field force/frequency: required for scaled-sine")
        force = ScaledSine(float(spec.get("amplitude", 1.0)), float(spec["frequency"]), T, damp)
    elif fam == "gram-schmidt":
        cons = ConstraintSet.single_mode(params.omega, damp, T)
        force = gram_schmidt_force(sine_seed(int(spec.get("seed_k", 1)), T), cons)
        if "amplitude" in spec:
            force = force.scaled(float(spec["amplitude"]))
    elif fam == "sampled":
        if "file" not in spec:
            raise InvalidInputError("config field force/file: required for sampled forces")
        force = load_sampled_force(spec["file"], sc.base_dir, T)
    else:
        raise InvalidInputError(f"config field force/family: {fam!r} is a two-mode gate family")
    if "phase" in d:
        force = force.scaled(kappa_for_phase(force, params, float(d["phase"]), grid))
    return force, params, grid


def gate_setup(sc: Scenario, gamma_over_omega: float | None = None, duration: float | None = None,
               nbar: float | None = None) -> GateConfig:
    """GateConfig for one point of a gate-type scenario."""
    d = sc.data
    omega = TWO_PI * float(d.get("omega_2pi_mhz", 2.0))
    g = float(d.get("gamma_over_omega", 0.0) if gamma_over_omega is None else gamma_over_omega)
    T = float(d.get("duration_us", 0.8) if duration is None else duration)
    nb = float(d.get("nbar", 0.0) if nbar is None else nbar)
    spec = d.get("force", {"family": "least-dephasing"})
    n_steps = int(d.get("n_steps", 4096))
    fam = spec["family"]
    base, ratio = None, float(spec.get("max_frequency_ratio", 4.0))
    if fam == "scaled-sine":
        base = ScaledSine(float(spec.get("amplitude", 1.0)), float(spec.get("frequency", omega)), T)
    elif fam == "gram-schmidt":
        cons = ConstraintSet.two_mode(omega, 0.0, T)
        base = gram_schmidt_force(sine_seed(int(spec.get("seed_k", 1)), T), cons)
    elif fam == "sampled":
        if "file" not in spec:
            raise InvalidInputError("config field force/file: required for sampled forces")
        base = load_sampled_force(spec["file"], sc.base_dir, T)
    return build_gate(omega, g * omega, T, nb, float(d.get("target_phase", np.pi / 2)),
                      bool(d.get("compensate", True)), base, n_steps,
                      float(d.get("mass_scale", 2.0)), ratio)
