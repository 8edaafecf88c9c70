"""Scheme files: strict JSON (normative) and TOML ingestion, plus round-trip.

Schema:

    {
      "reference_hz": 1e15,
      "bandwidth_hz": 1000.0,
      "components": [
        {"offset_hz": 0.0, "amplitude": {"re": 1.0, "im": 0.0}},
        {"offset_hz": 100e6, "amplitude": {"power_w": 4.0, "phase_rad": 0.4}}
      ],
      "demodulations": [{"freq_hz": 15e6, "phase_rad": 0.0}],
      "squeezers": [{"ref_offset_hz": 115e6, "r": 1.0, "phi_rad": 0.0}],
      "options": {
        "narrowband": true, "normalized_units": false,
        "coincidence_tol_hz": 1e-3, "rectifier_equivalent": false,
        "grid_points": 101
      }
    }

Unknown keys are rejected everywhere.  Angles are radians in files; the
CLI's --degrees flag converts phase fields on ingest.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import SchemeValidationError
from .model import (
    ClassicalComponent,
    DEFAULT_COINCIDENCE_TOL_HZ,
    DemodStage,
    DetectionConfig,
    SqueezerSpec,
)
from .spectrum import DEFAULT_GRID_POINTS

_TOP_KEYS = {
    "reference_hz",
    "bandwidth_hz",
    "components",
    "demodulations",
    "squeezers",
    "options",
}
_OPTION_KEYS = {
    "narrowband",
    "normalized_units",
    "coincidence_tol_hz",
    "rectifier_equivalent",
    "grid_points",
}


@dataclass(frozen=True)
class SchemeFile:
    """A parsed scheme file, in the caller's component order."""

    components: tuple[ClassicalComponent, ...]
    demods: tuple[DemodStage, ...]
    squeezers: tuple[SqueezerSpec, ...]
    config: DetectionConfig
    grid_points: int


def _reject_unknown(mapping: dict, allowed: set, where: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise SchemeValidationError(
            f"unknown key(s) in {where}: {', '.join(sorted(unknown))}"
        )


def _number(mapping: dict, key: str, where: str) -> float:
    if key not in mapping:
        raise SchemeValidationError(f"missing key {key!r} in {where}")
    value = mapping[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemeValidationError(f"{where}.{key} must be a number")
    return float(value)


def _angle(mapping: dict, key: str, where: str, degrees: bool, default=None) -> float:
    if key not in mapping:
        if default is None:
            raise SchemeValidationError(f"missing key {key!r} in {where}")
        return default
    value = _number(mapping, key, where)
    return math.radians(value) if degrees else value


def _parse_component(entry: dict, i: int, degrees: bool) -> ClassicalComponent:
    where = f"components[{i}]"
    _reject_unknown(entry, {"offset_hz", "amplitude"}, where)
    offset = _number(entry, "offset_hz", where)
    amp = entry.get("amplitude")
    if not isinstance(amp, dict):
        raise SchemeValidationError(f"{where}.amplitude must be an object")
    if set(amp) == {"re", "im"}:
        return ClassicalComponent(
            offset, complex(_number(amp, "re", where), _number(amp, "im", where))
        )
    if set(amp) <= {"power_w", "phase_rad"} and "power_w" in amp:
        return ClassicalComponent.from_power(
            offset,
            _number(amp, "power_w", where),
            _angle(amp, "phase_rad", where, degrees, default=0.0),
        )
    raise SchemeValidationError(
        f"{where}.amplitude must have keys {{re, im}} or {{power_w[, phase_rad]}}"
    )


def parse_scheme_dict(data: dict, degrees: bool = False) -> SchemeFile:
    if not isinstance(data, dict):
        raise SchemeValidationError("scheme file must contain a JSON object")
    _reject_unknown(data, _TOP_KEYS, "scheme file")
    for key in ("reference_hz", "bandwidth_hz", "components"):
        if key not in data:
            raise SchemeValidationError(f"missing key {key!r} in scheme file")
    raw_components = data["components"]
    if not isinstance(raw_components, list) or not raw_components:
        raise SchemeValidationError("components must be a nonempty list")
    components = tuple(
        _parse_component(entry, i, degrees) for i, entry in enumerate(raw_components)
    )
    demods = []
    for i, entry in enumerate(data.get("demodulations", [])):
        where = f"demodulations[{i}]"
        _reject_unknown(entry, {"freq_hz", "phase_rad"}, where)
        demods.append(
            DemodStage(
                _number(entry, "freq_hz", where),
                _angle(entry, "phase_rad", where, degrees, default=0.0),
            )
        )
    squeezers = []
    for i, entry in enumerate(data.get("squeezers", [])):
        where = f"squeezers[{i}]"
        _reject_unknown(entry, {"ref_offset_hz", "r", "phi_rad"}, where)
        squeezers.append(
            SqueezerSpec(
                _number(entry, "ref_offset_hz", where),
                _number(entry, "r", where),
                _angle(entry, "phi_rad", where, degrees, default=0.0),
            )
        )
    options = data.get("options", {})
    if not isinstance(options, dict):
        raise SchemeValidationError("options must be an object")
    _reject_unknown(options, _OPTION_KEYS, "options")
    grid_points = options.get("grid_points", DEFAULT_GRID_POINTS)
    if isinstance(grid_points, bool) or not isinstance(grid_points, int) or grid_points < 2:
        raise SchemeValidationError("options.grid_points must be an integer >= 2")
    config = DetectionConfig(
        f0_hz=_number(data, "reference_hz", "scheme file"),
        bandwidth_hz=_number(data, "bandwidth_hz", "scheme file"),
        coincidence_tol_hz=(
            _number(options, "coincidence_tol_hz", "options")
            if "coincidence_tol_hz" in options
            else DEFAULT_COINCIDENCE_TOL_HZ
        ),
        narrowband=bool(options.get("narrowband", False)),
        normalized_units=bool(options.get("normalized_units", False)),
        rectifier_equivalent=bool(options.get("rectifier_equivalent", False)),
    )
    return SchemeFile(components, tuple(demods), tuple(squeezers), config, grid_points)


def load_scheme_file(path, degrees: bool = False) -> SchemeFile:
    """Parse a .json (normative) or .toml scheme file."""
    path = Path(path)
    text = path.read_bytes()
    if path.suffix.lower() == ".toml":
        try:
            import tomllib  # Python >= 3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        data = tomllib.loads(text.decode("utf-8"))
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemeValidationError(f"invalid JSON in {path}: {exc}") from exc
    return parse_scheme_dict(data, degrees=degrees)


def scheme_to_dict(scheme_file: SchemeFile) -> dict:
    """Serialize back to the file schema; re-parsing yields an equal SchemeFile."""
    cfg = scheme_file.config
    return {
        "reference_hz": cfg.f0_hz,
        "bandwidth_hz": cfg.bandwidth_hz,
        "components": [
            {
                "offset_hz": c.offset_hz,
                "amplitude": {"re": c.amplitude.real, "im": c.amplitude.imag},
            }
            for c in scheme_file.components
        ],
        "demodulations": [
            {"freq_hz": d.freq_hz, "phase_rad": d.phase_rad}
            for d in scheme_file.demods
        ],
        "squeezers": [
            {"ref_offset_hz": s.ref_offset_hz, "r": s.r, "phi_rad": s.phi_rad}
            for s in scheme_file.squeezers
        ],
        "options": {
            "narrowband": cfg.narrowband,
            "normalized_units": cfg.normalized_units,
            "coincidence_tol_hz": cfg.coincidence_tol_hz,
            "rectifier_equivalent": cfg.rectifier_equivalent,
            "grid_points": scheme_file.grid_points,
        },
    }
