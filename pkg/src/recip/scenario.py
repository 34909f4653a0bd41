"""Scenario files: strict JSON parsing, canonical records and model builders."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Optional, Union

import jsonschema
import numpy as np

from . import moss
from .moss import FE57_LINES, ConstantLayer, Foil, HyperfineLine, Scenario
from .omegascan import LateralSample, Region
from .pauli2 import AxisAngleUnitary, PauliForm

SCHEMA_VERSION = 1
PRESETS = ("x", "y", "sigma", "pi", "plus", "minus")


class ScenarioError(ValueError):
    """Malformed or invalid scenario text."""


@dataclass(frozen=True)
class LineSpec:
    E0: float
    Gamma: float
    weight: float
    dm: int


@dataclass(frozen=True)
class FoilSpec:
    thickness_um: float
    theta_deg: float
    phi_deg: float
    tau: Optional[float] = 1.0
    strength: Optional[float] = None
    v0_electronic: complex = 0j
    lines: Union[str, tuple] = "fe57"


@dataclass(frozen=True)
class PotentialSpec:
    thickness_nm: float
    v0: complex = 0j
    v: tuple = (0j, 0j, 0j)


@dataclass(frozen=True)
class RegionSpec:
    label: str
    centroid: tuple
    v0: complex = 0j
    v: tuple = (0j, 0j, 0j)


@dataclass(frozen=True)
class UnitarySpec:
    delta_deg: float = 0.0
    phi_deg: float = 0.0
    axis: tuple = (0.0, 0.0, 1.0)


@dataclass(frozen=True)
class GridSpec:
    points: int
    min: float
    max: float


@dataclass(frozen=True)
class ScenarioFile:
    version: int
    mode: str
    wave_number: float = moss.DEFAULT_K
    p_in: Union[str, tuple] = "sigma"
    p_out: Union[str, tuple] = "sigma"
    layers: tuple = ()
    grid: Optional[GridSpec] = None
    reversal_axis: tuple = (1.0, 0.0, 0.0)
    unitary: UnitarySpec = field(default_factory=UnitarySpec)
    normal: tuple = (0.0, 0.0, 1.0)
    regions: tuple = ()
    description: str = ""


@lru_cache(maxsize=1)
def schema() -> dict:
    text = resources.files("recip").joinpath("scenario.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def _reject_constant(name):
    raise ValueError(f"non-finite number {name} is not allowed")


def _complex(x) -> complex:
    return complex(x[0], x[1]) if isinstance(x, list) else complex(x)


def _cvec(xs) -> tuple:
    return tuple(_complex(x) for x in xs)


def _vec(xs) -> tuple:
    return tuple(float(x) for x in xs)


def _polarization(p):
    if isinstance(p, str):
        return p
    pair = _cvec(p)
    if not any(pair):
        raise ScenarioError("polarization [0, 0] cannot be normalized")
    return pair


def _line_table(spec: FoilSpec):
    if spec.lines == "fe57":
        return FE57_LINES
    return tuple(HyperfineLine(l.E0, l.Gamma, l.weight, l.dm) for l in spec.lines)


def _default_grid(layers) -> tuple:
    lines = []
    for layer in layers:
        if isinstance(layer, FoilSpec):
            lines.extend(_line_table(layer))
    edge = moss.GRID_SPAN * max((abs(l.E0) for l in lines), default=1.0) or moss.GRID_SPAN
    return -edge, edge


def _format_error(err: jsonschema.ValidationError) -> str:
    where = "/".join(str(p) for p in err.absolute_path) or "<root>"
    return f"at {where}: {err.message}"


def parse_scenario(text: str) -> ScenarioFile:
    """Strict parse of scenario JSON into a canonical record with defaults."""
    try:
        raw = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None
    validator = jsonschema.Draft202012Validator(schema())
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        raise ScenarioError("; ".join(_format_error(e) for e in errors))
    return _record(raw)


def _record(raw: dict) -> ScenarioFile:
    layers = []
    for item in raw.get("layers", []):
        if item["type"] == "foil":
            lines = item.get("lines", "fe57")
            if lines != "fe57":
                lines = tuple(LineSpec(float(l["E0"]), float(l["Gamma"]), float(l["weight"]), int(l["dm"])) for l in lines)
            strength = item.get("strength")
            layers.append(
                FoilSpec(
                    float(item["thickness_um"]),
                    float(item["theta_deg"]),
                    float(item["phi_deg"]),
                    tau=None if strength is not None else float(item.get("tau", 1.0)),
                    strength=None if strength is None else float(strength),
                    v0_electronic=_complex(item.get("v0_electronic", 0)),
                    lines=lines,
                )
            )
        else:
            layers.append(
                PotentialSpec(
                    float(item["thickness_nm"]),
                    _complex(item.get("v0", 0)),
                    _cvec(item.get("v", [0, 0, 0])),
                )
            )
    layers = tuple(layers)

    grid = None
    if raw["mode"] != "omegascan" or "grid" in raw:
        g = raw.get("grid", {})
        lo, hi = _default_grid(layers)
        grid = GridSpec(int(g.get("points", moss.DEFAULT_GRID_POINTS)), float(g.get("min", lo)), float(g.get("max", hi)))
        if not grid.max > grid.min:
            raise ScenarioError(f"at grid: max ({grid.max}) must exceed min ({grid.min})")

    pol = raw.get("polarization", {})
    u = raw.get("unitary", {})
    unitary = UnitarySpec(float(u.get("delta_deg", 0.0)), float(u.get("phi_deg", 0.0)), _vec(u.get("axis", (0, 0, 1))))
    for name, vec in (("reversal_axis", raw.get("reversal_axis")), ("unitary/axis", u.get("axis")), ("normal", raw.get("normal"))):
        if vec is not None and not any(vec):
            raise ScenarioError(f"at {name}: vector must be nonzero")

    regions = tuple(
        RegionSpec(r["label"], _vec(r["centroid"]), _complex(r.get("v0", 0)), _cvec(r.get("v", [0, 0, 0])))
        for r in raw.get("regions", [])
    )
    return ScenarioFile(
        version=int(raw["version"]),
        mode=raw["mode"],
        wave_number=float(raw.get("wave_number", moss.DEFAULT_K)),
        p_in=_polarization(pol.get("in", "sigma")),
        p_out=_polarization(pol.get("out", "sigma")),
        layers=layers,
        grid=grid,
        reversal_axis=_vec(raw.get("reversal_axis", (1, 0, 0))),
        unitary=unitary,
        normal=_vec(raw.get("normal", (0, 0, 1))),
        regions=regions,
        description=raw.get("description", ""),
    )


def _cjson(z: complex) -> list:
    return [z.real, z.imag]


def to_dict(rec: ScenarioFile) -> dict:
    """Canonical JSON-ready form; every default is written out."""

    def pol(p):
        return p if isinstance(p, str) else [_cjson(z) for z in p]

    layers = []
    for layer in rec.layers:
        if isinstance(layer, FoilSpec):
            d = {
                "type": "foil",
                "thickness_um": layer.thickness_um,
                "theta_deg": layer.theta_deg,
                "phi_deg": layer.phi_deg,
                "v0_electronic": _cjson(layer.v0_electronic),
                "lines": layer.lines
                if isinstance(layer.lines, str)
                else [{"E0": l.E0, "Gamma": l.Gamma, "weight": l.weight, "dm": l.dm} for l in layer.lines],
            }
            if layer.strength is not None:
                d["strength"] = layer.strength
            else:
                d["tau"] = layer.tau
            layers.append(d)
        else:
            layers.append(
                {"type": "potential", "thickness_nm": layer.thickness_nm, "v0": _cjson(layer.v0), "v": [_cjson(z) for z in layer.v]}
            )
    out = {
        "version": rec.version,
        "mode": rec.mode,
        "description": rec.description,
        "wave_number": rec.wave_number,
        "polarization": {"in": pol(rec.p_in), "out": pol(rec.p_out)},
        "layers": layers,
        "reversal_axis": list(rec.reversal_axis),
        "unitary": {"delta_deg": rec.unitary.delta_deg, "phi_deg": rec.unitary.phi_deg, "axis": list(rec.unitary.axis)},
        "normal": list(rec.normal),
    }
    if rec.grid is not None:
        out["grid"] = {"points": rec.grid.points, "min": rec.grid.min, "max": rec.grid.max}
    if rec.regions:
        out["regions"] = [
            {"label": r.label, "centroid": list(r.centroid), "v0": _cjson(r.v0), "v": [_cjson(z) for z in r.v]}
            for r in rec.regions
        ]
    return out


def dumps(rec: ScenarioFile) -> str:
    return json.dumps(to_dict(rec), indent=2, sort_keys=True) + "\n"


def load_builtin(name: str) -> ScenarioFile:
    """One of the scenario files shipped with the package."""
    path = resources.files("recip").joinpath("scenarios", f"{name}.json")
    return parse_scenario(path.read_text(encoding="utf-8"))


def builtin_names() -> list:
    folder = resources.files("recip").joinpath("scenarios")
    return sorted(p.name[:-5] for p in folder.iterdir() if p.name.endswith(".json"))


def unitary_of(rec: ScenarioFile) -> AxisAngleUnitary:
    axis = rec.unitary.axis
    norm = math.sqrt(sum(a * a for a in axis))
    return AxisAngleUnitary(
        math.radians(rec.unitary.delta_deg), math.radians(rec.unitary.phi_deg), tuple(a / norm for a in axis)
    )


def _foil(spec: FoilSpec, k: float) -> Foil:
    kw = dict(lines=_line_table(spec), v0_electronic=spec.v0_electronic)
    if spec.strength is not None:
        return Foil.from_degrees(spec.thickness_um, spec.theta_deg, spec.phi_deg, strength=spec.strength, **kw)
    return moss.with_tau(Foil.from_degrees(spec.thickness_um, spec.theta_deg, spec.phi_deg, **kw), spec.tau, k)


def elements_of(rec: ScenarioFile) -> list:
    out = []
    for layer in rec.layers:
        if isinstance(layer, FoilSpec):
            out.append(_foil(layer, rec.wave_number))
        else:
            out.append(ConstantLayer(PauliForm(layer.v0, layer.v), layer.thickness_nm))
    return out


def build_scenario(rec: ScenarioFile, grid_points: Optional[int] = None) -> Scenario:
    if rec.grid is None:
        raise ScenarioError("scenario has no energy grid")
    points = grid_points if grid_points is not None else rec.grid.points
    if points < 2:
        raise ScenarioError("grid needs at least 2 points")
    try:
        return Scenario(
            elements_of(rec),
            moss.polarization(rec.p_in),
            moss.polarization(rec.p_out),
            np.linspace(rec.grid.min, rec.grid.max, points),
            k=rec.wave_number,
            reversal_axis=rec.reversal_axis,
            unitary=unitary_of(rec),
        )
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None


def analysis_potentials(rec: ScenarioFile) -> list:
    """Labelled potentials entering the reciprocity analysis.

    Each hyperfine line contributes its own polarization matrix, since the
    lines carry independent energy dependences.
    """
    out = []
    for i, layer in enumerate(rec.layers):
        if isinstance(layer, FoilSpec):
            theta, phi = math.radians(layer.theta_deg), math.radians(layer.phi_deg)
            for j, line in enumerate(_line_table(layer)):
                if line.weight > 0:
                    out.append((f"layer{i}.line{j}", moss.line_polarization(line.dm, theta, phi)))
        else:
            out.append((f"layer{i}", PauliForm(layer.v0, layer.v)))
    return out


def build_sample(rec: ScenarioFile) -> LateralSample:
    if not rec.regions:
        raise ScenarioError("scenario has no regions")
    try:
        return LateralSample(
            [Region(r.label, r.centroid, PauliForm(r.v0, r.v)) for r in rec.regions], rec.normal
        )
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None
