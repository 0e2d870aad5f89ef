"""Run configuration: strict JSON schema, tau literals, preset registry.

A configuration document is JSON with exactly these sections and keys:

    domain:      kind, resolution, bounds | center, radius
    operator:    family, tau
    boundary:    kind, alpha, beta, phi, radius
    initial:     kind, amplitude, coefficients
    time:        t_end, dt_safety, t0
    tolerances:  tol_osc, tol_speed, obliqueness_floor,
                 cap_ut, cap_grad, cap_hess
    output:      dir

Unknown sections or keys are rejected by name — a typo must never silently
fall back to a default.  The only ambient defaults are dt_safety = 0.9,
t0 = 1/16, and the tolerance defaults documented on Tolerances.

tau accepts either a radian number or one of the literals "0", "pi/6",
"pi/4", "pi/3", "pi/2".
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .boundary import BoundarySpec
from .errors import ConfigError
from .grid import DomainSpec
from .monitor import Tolerances
from .operators import OperatorSpec
from .stepper import StepConfig

TAU_LITERALS = {
    "0": 0.0,
    "pi/6": math.pi / 6.0,
    "pi/4": math.pi / 4.0,
    "pi/3": math.pi / 3.0,
    "pi/2": math.pi / 2.0,
}

_SCHEMA = {
    "domain": {"kind", "resolution", "bounds", "center", "radius"},
    "operator": {"family", "tau"},
    "boundary": {"kind", "alpha", "beta", "phi", "radius"},
    "initial": {"kind", "amplitude", "coefficients"},
    "time": {"t_end", "dt_safety", "t0"},
    "tolerances": {"tol_osc", "tol_speed", "obliqueness_floor",
                   "cap_ut", "cap_grad", "cap_hess"},
    "output": {"dir"},
}
_REQUIRED_SECTIONS = ("domain", "operator", "boundary", "initial", "time")


@dataclass(frozen=True)
class InitialSpec:
    """Initial data request.

    quad_cos:    the steady quadratic matched to the boundary data plus an
                 amplitude-scaled cosine perturbation (rim-damped on disks)
    polynomial:  sum over axes of polynomials in that axis coordinate;
                 coefficients[a][k] multiplies x_a^k
    """

    kind: str
    amplitude: float = 0.0
    coefficients: tuple = ()

    def __post_init__(self):
        if self.kind not in ("quad_cos", "polynomial"):
            raise ConfigError(f"unknown initial kind {self.kind!r}")
        if self.kind == "polynomial" and not self.coefficients:
            raise ConfigError("polynomial initial data needs coefficients")


@dataclass
class RunConfig:
    domain: DomainSpec
    operator: OperatorSpec
    boundary: BoundarySpec
    initial: InitialSpec
    time: StepConfig
    tolerances: Tolerances
    output_dir: str = None


def _check_keys(data: dict):
    for section, content in data.items():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section {section!r}")
        if not isinstance(content, dict):
            raise ConfigError(f"section {section!r} must be an object")
        for key in content:
            if key not in _SCHEMA[section]:
                raise ConfigError(
                    f"unknown key {key!r} in section {section!r}")
    for section in _REQUIRED_SECTIONS:
        if section not in data:
            raise ConfigError(f"missing required section {section!r}")


def parse_tau(value) -> float:
    if isinstance(value, str):
        if value not in TAU_LITERALS:
            raise ConfigError(
                f"unknown tau literal {value!r}; use one of "
                f"{sorted(TAU_LITERALS)} or a radian number")
        return TAU_LITERALS[value]
    return float(value)


def _tupled(bounds):
    return tuple(tuple(float(v) for v in pair) for pair in bounds)


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a configuration document."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(
            f"configuration is not valid JSON (line {e.lineno}, "
            f"column {e.colno}): {e.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be an object")
    _check_keys(data)

    dom = data["domain"]
    domain = DomainSpec(
        kind=dom.get("kind", ""),
        resolution=int(dom.get("resolution", 0)),
        bounds=_tupled(dom.get("bounds", ())),
        center=tuple(dom.get("center", (0.0, 0.0))),
        radius=float(dom.get("radius", 0.0)))

    opd = data["operator"]
    family = opd.get("family", "")
    if family == "trace":
        operator = OperatorSpec(family="trace")
    else:
        if "tau" not in opd:
            raise ConfigError("operator family 'tau' needs a tau value")
        operator = OperatorSpec(family=family, tau=parse_tau(opd["tau"]))

    bd = data["boundary"]
    boundary = BoundarySpec(
        kind=bd.get("kind", ""),
        alpha=float(bd.get("alpha", 0.0)),
        beta=float(bd.get("beta", 0.0)),
        phi=float(bd.get("phi", 0.0)),
        radius=float(bd.get("radius", 1.0)))

    ind = data["initial"]
    initial = InitialSpec(
        kind=ind.get("kind", ""),
        amplitude=float(ind.get("amplitude", 0.0)),
        coefficients=tuple(tuple(float(c) for c in row)
                           for row in ind.get("coefficients", ())))

    td = data["time"]
    if "t_end" not in td:
        raise ConfigError("time.t_end is required")
    time = StepConfig(t_end=float(td["t_end"]),
                      dt_safety=float(td.get("dt_safety", 0.9)),
                      t0=float(td.get("t0", 0.0625)))

    tol = data.get("tolerances", {})
    defaults = Tolerances()
    tolerances = Tolerances(
        tol_osc=float(tol.get("tol_osc", defaults.tol_osc)),
        tol_speed=float(tol.get("tol_speed", defaults.tol_speed)),
        obliqueness_floor=float(tol.get("obliqueness_floor",
                                        defaults.obliqueness_floor)),
        cap_ut=float(tol.get("cap_ut", defaults.cap_ut)),
        cap_grad=float(tol.get("cap_grad", defaults.cap_grad)),
        cap_hess=float(tol.get("cap_hess", defaults.cap_hess)))
    for name in ("tol_osc", "tol_speed", "obliqueness_floor"):
        if getattr(tolerances, name) <= 0:
            raise ConfigError(f"tolerances.{name} must be > 0")

    output_dir = data.get("output", {}).get("dir")
    return RunConfig(domain=domain, operator=operator, boundary=boundary,
                     initial=initial, time=time, tolerances=tolerances,
                     output_dir=output_dir)


# -- preset registry ---------------------------------------------------------

def _heat_preset(amplitude: float) -> dict:
    return {
        "domain": {"kind": "interval", "resolution": 201,
                   "bounds": [[0.0, 1.0]]},
        "operator": {"family": "trace"},
        "boundary": {"kind": "flux1d", "alpha": 0.0, "beta": 1.0},
        "initial": {"kind": "quad_cos", "amplitude": amplitude},
        "time": {"t_end": 2.0},
        "tolerances": {"tol_osc": 1e-6, "tol_speed": 1e-5,
                       "obliqueness_floor": 0.5},
    }


def _disk_preset(tau: str, resolution: int, amplitude: float,
                 t_end: float) -> dict:
    return {
        "domain": {"kind": "disk", "resolution": resolution,
                   "center": [0.0, 0.0], "radius": 1.0},
        "operator": {"family": "tau", "tau": tau},
        "boundary": {"kind": "target_disk", "radius": 1.0},
        "initial": {"kind": "quad_cos", "amplitude": amplitude},
        "time": {"t_end": t_end},
        "tolerances": {"tol_osc": 1e-6, "tol_speed": 1e-4,
                       "obliqueness_floor": 0.5},
    }


PRESETS = {
    "heat-1d": (
        "two-flux heat flow on [0,1] (slopes 0 and 1); settles onto the "
        "parabolic translator at speed 1",
        _heat_preset(0.1)),
    "heat-1d-mode1": (
        "heat flow seeded with a full-strength first cosine mode; its "
        "oscillation decays at the first Neumann eigenvalue rate",
        _heat_preset(1.0)),
    "ma-logdet-disk": (
        "log-determinant (Monge-Ampere) flow mapping the unit disk onto "
        "itself; the identity-map translator has speed 0",
        _disk_preset("0", 61, 0.01, 4.0)),
    "slag-disk-tau-pi2": (
        "sum-of-arctangents flow on the unit disk with unit-disk gradient "
        "target; converges to the identity map at speed pi/2",
        _disk_preset("pi/2", 61, 0.05, 6.0)),
    "slag-disk-tau": (
        "middle-branch arctangent-ratio flow on the unit disk (tau "
        "adjustable via override); lighter 41-node lattice",
        _disk_preset("pi/3", 41, 0.05, 4.0)),
}


def list_presets():
    """(name, one-line description) pairs, stable order."""
    return [(name, desc) for name, (desc, _) in PRESETS.items()]


def preset_config(name: str) -> dict:
    """A deep copy of the named preset's configuration document."""
    if name not in PRESETS:
        raise ConfigError(
            f"unknown preset {name!r}; available: {sorted(PRESETS)}")
    return json.loads(json.dumps(PRESETS[name][1]))


def apply_overrides(doc: dict, overrides) -> dict:
    """Apply dotted key=value overrides (values parsed as JSON when
    possible, else kept as strings) to a configuration document."""
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of form key=value")
        path, raw = item.split("=", 1)
        keys = path.split(".")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = doc
        for k in keys[:-1]:
            node = node.setdefault(k, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override path {path!r} crosses a leaf")
        node[keys[-1]] = value
    return doc
