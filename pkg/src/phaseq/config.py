"""Config loading and validation for the command-line checks.

Configs are JSON objects with a "command" field naming the check to run.
Validation returns a list of diagnostics, each {"path", "message"}, so a
single pass reports every problem; execution only starts on an empty list.
Complex values may be written as numbers, as "a+bi" strings, or as
{"re": ..., "im": ...} objects.
"""

from __future__ import annotations

import json
import math
import re
from pathlib import Path
from typing import Any

from .errors import ConfigError
from .expr import parse as parse_expression

__all__ = [
    "COMMANDS",
    "apply_defaults",
    "load_config",
    "parse_complex",
    "validate",
]

COMMANDS = (
    "check-integrability",
    "coherent-report",
    "classify-map",
    "transform-vacuum",
    "torus",
    "foliate",
)

_GRID_DEFAULTS = {"low": -1.0, "high": 1.0, "count": 9}

DEFAULTS: dict[str, dict[str, Any]] = {
    "check-integrability": {
        "grid": dict(_GRID_DEFAULTS),
        "tolerances": {"structure": 1e-9, "compatibility": 1e-8, "integrability": 1e-6},
    },
    "coherent-report": {
        "levels": 8,
        "n_radial": 200,
        "n_angular": 200,
        "threshold": 1e-3,
        "states": [],
    },
    "classify-map": {"linear_tolerance": 1e-10, "cr_tolerance": 1e-8},
    "transform-vacuum": {"dim": 64, "states": []},
    "torus": {"n_terms": 60},
    "foliate": {
        "ambient_modes": 2,
        "leaf_modes": 1,
        "levels": 8,
        "n_radial": 200,
        "n_angular": 200,
        "threshold": 1e-3,
        "scan_threshold": 0.5,
        "leaf_value": 0.0,
        "complement_value": 1.0,
    },
}


def load_config(path: str | Path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from exc
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    return config


def parse_complex(value: Any) -> complex:
    """Accept 3.5, "1-2i", or {"re": 1.0, "im": -2.0}."""
    if isinstance(value, bool):
        raise ValueError("must be a complex number")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, str):
        cleaned = value.replace(" ", "").replace("i", "j")
        try:
            return complex(cleaned)
        except ValueError:
            raise ValueError("must be a complex number") from None
    if isinstance(value, dict) and set(value) <= {"re", "im"}:
        re_part, im_part = value.get("re", 0.0), value.get("im", 0.0)
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (re_part, im_part)):
            return complex(re_part, im_part)
    raise ValueError("must be a complex number")


def apply_defaults(config: dict) -> dict:
    """Deep-merge the per-command defaults under the user's values."""
    command = config.get("command")
    merged = _merge(DEFAULTS.get(command, {}), config)
    return merged


def _merge(base: Any, override: Any) -> Any:
    if isinstance(base, dict) and isinstance(override, dict):
        out = {k: v for k, v in base.items()}
        for key, value in override.items():
            out[key] = _merge(base.get(key), value) if key in base else value
        return out
    return override


# ---------------------------------------------------------------------------
# validation


class _Scope:
    """Accumulates diagnostics while reading one level of the config."""

    def __init__(self, data: dict, prefix: str, diags: list[dict]):
        self.data = data
        self.prefix = prefix
        self.diags = diags

    def path(self, key: str) -> str:
        return f"{self.prefix}.{key}" if self.prefix else key

    def flag(self, key: str, message: str) -> None:
        self.diags.append({"path": self.path(key), "message": message})

    def get(self, key: str, required: bool = False) -> Any:
        if key not in self.data:
            if required:
                self.flag(key, "required field missing")
            return None
        return self.data[key]

    def integer(self, key: str, required=False, minimum=None) -> int | None:
        value = self.get(key, required)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, int):
            self.flag(key, "must be an integer")
            return None
        if minimum is not None and value < minimum:
            self.flag(key, f"must be >= {minimum}")
            return None
        return value

    def number(self, key: str, required=False, positive=False) -> float | None:
        value = self.get(key, required)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.flag(key, "must be a number")
            return None
        if positive and not value > 0:
            self.flag(key, "must be > 0")
            return None
        return float(value)

    def string(self, key: str, required=False) -> str | None:
        value = self.get(key, required)
        if value is None:
            return None
        if not isinstance(value, str):
            self.flag(key, "must be a string")
            return None
        return value

    def complex_value(self, key: str, required=False) -> complex | None:
        value = self.get(key, required)
        if value is None:
            return None
        try:
            return parse_complex(value)
        except ValueError as exc:
            self.flag(key, str(exc))
            return None

    def obj(self, key: str, required=False) -> "_Scope | None":
        value = self.get(key, required)
        if value is None:
            return None
        if not isinstance(value, dict):
            self.flag(key, "must be an object")
            return None
        return _Scope(value, self.path(key), self.diags)

    def array(self, key: str, required=False) -> list | None:
        value = self.get(key, required)
        if value is None:
            return None
        if not isinstance(value, list):
            self.flag(key, "must be a list")
            return None
        return value


def _chart_names(modes: int) -> tuple[str, ...]:
    return tuple(f"q{k}" for k in range(1, modes + 1)) + tuple(
        f"p{k}" for k in range(1, modes + 1)
    )


def _check_expression(source: Any, modes: int, path: str, diags: list[dict]) -> None:
    if not isinstance(source, str):
        diags.append({"path": path, "message": "must be a string"})
        return
    try:
        parse_expression(source, _chart_names(modes))
    except Exception as exc:
        diags.append({"path": path, "message": str(exc)})


def _check_matrix(value: Any, size: int, path: str, diags: list[dict]) -> None:
    if not isinstance(value, list) or len(value) != size:
        diags.append({"path": path, "message": f"must be a {size}x{size} matrix"})
        return
    for r, row in enumerate(value):
        if not isinstance(row, list) or len(row) != size:
            diags.append({"path": f"{path}[{r}]", "message": f"must be a row of {size} numbers"})
            continue
        for c, entry in enumerate(row):
            if isinstance(entry, bool) or not isinstance(entry, (int, float)):
                diags.append({"path": f"{path}[{r}][{c}]", "message": "must be a number"})


def _check_grid(scope: _Scope) -> None:
    grid = scope.obj("grid")
    if grid is None:
        return
    low = grid.number("low")
    high = grid.number("high")
    count = grid.integer("count")
    if count is not None and count < 2:
        grid.flag("count", "must be >= 2")
    if low is not None and high is not None and not low < high:
        grid.flag("high", "must be greater than low")


_AXIS_PATTERN = re.compile(r"^mode_phase:(\d+)$")


def _check_axis(value: Any, modes: int, path: str, diags: list[dict]) -> None:
    if isinstance(value, str):
        if value == "global_phase":
            return
        match = _AXIS_PATTERN.match(value)
        if match and 1 <= int(match.group(1)) <= modes:
            return
        diags.append({
            "path": path,
            "message": "must be 'global_phase', 'mode_phase:<mode>', or a pair of coordinate indices",
        })
        return
    if (
        isinstance(value, list)
        and len(value) == 2
        and all(isinstance(v, int) and not isinstance(v, bool) for v in value)
        and all(1 <= v <= 2 * modes for v in value)
    ):
        return
    diags.append({
        "path": path,
        "message": "must be 'global_phase', 'mode_phase:<mode>', or a pair of coordinate indices",
    })


def _validate_structure_fragment(structure: _Scope, modes: int, diags: list[dict]) -> None:
    kind = structure.string("kind", required=True)
    if kind is None:
        return
    if kind not in ("standard", "constant", "rotated", "explicit"):
        structure.flag("kind", "must be one of: standard, constant, rotated, explicit")
        return
    if kind == "constant":
        matrix = structure.get("matrix", required=True)
        if matrix is not None:
            _check_matrix(matrix, 2 * modes, structure.path("matrix"), diags)
    elif kind == "rotated":
        angle = structure.get("angle", required=True)
        if angle is not None:
            _check_expression(angle, modes, structure.path("angle"), diags)
        axis = structure.get("axis", required=True)
        if axis is not None:
            _check_axis(axis, modes, structure.path("axis"), diags)
    elif kind == "explicit":
        entries = structure.array("entries", required=True)
        if entries is None:
            return
        size = 2 * modes
        if len(entries) != size:
            structure.flag("entries", f"must be a {size}x{size} matrix of expressions")
            return
        for r, row in enumerate(entries):
            if not isinstance(row, list) or len(row) != size:
                diags.append({
                    "path": f"{structure.path('entries')}[{r}]",
                    "message": f"must be a row of {size} expressions",
                })
                continue
            for c, entry in enumerate(row):
                _check_expression(
                    entry, modes, f"{structure.path('entries')}[{r}][{c}]", diags
                )


def _validate_check_integrability(root: _Scope) -> None:
    modes = root.integer("modes", required=True, minimum=1)
    structure = root.obj("structure", required=True)
    _check_grid(root)
    tols = root.obj("tolerances")
    if tols is not None:
        for key in ("structure", "compatibility", "integrability"):
            if key in tols.data:
                tols.number(key, positive=True)
    if structure is None or modes is None:
        return
    _validate_structure_fragment(structure, modes, root.diags)


def _validate_coherent_report(root: _Scope) -> None:
    dim = root.integer("dim", required=True, minimum=2)
    root.number("radius", required=True, positive=True)
    levels = root.integer("levels", minimum=0)
    if dim is not None and levels is not None and levels > dim // 4:
        root.flag("levels", f"must not exceed dim/4 = {dim // 4}")
    root.integer("n_radial", minimum=1)
    root.integer("n_angular", minimum=1)
    root.number("threshold", positive=True)
    states = root.array("states")
    if states is not None:
        bound = math.sqrt(2 * dim) / 3 if dim else None
        for idx, raw in enumerate(states):
            try:
                z = parse_complex(raw)
            except ValueError as exc:
                root.diags.append({"path": f"states[{idx}]", "message": str(exc)})
                continue
            if bound is not None and abs(z) > bound:
                root.diags.append({
                    "path": f"states[{idx}]",
                    "message": f"exceeds truncation safety bound sqrt(2*dim)/3 = {bound:.4g}",
                })


def _validate_classify_map(root: _Scope) -> None:
    has_matrix = "matrix" in root.data
    has_map = "map" in root.data
    if not has_matrix and not has_map:
        root.flag("matrix", "at least one of 'matrix' or 'map' is required")
        return
    if has_matrix:
        matrix = root.array("matrix", required=True)
        if matrix is not None:
            size = len(matrix)
            if size == 0 or size % 2:
                root.flag("matrix", "must be a square matrix of even dimension")
            else:
                _check_matrix(matrix, size, "matrix", root.diags)
    if has_map:
        mp = root.obj("map", required=True)
        if mp is None:
            return
        modes = mp.integer("modes", required=True, minimum=1)
        components = mp.array("components", required=True)
        _check_grid(mp)
        if components is not None and modes is not None:
            if len(components) != modes:
                mp.flag("components", f"must list exactly {modes} component expressions")
            for idx, src in enumerate(components):
                _check_expression(
                    src, modes, f"{mp.path('components')}[{idx}]", root.diags
                )
    root.number("linear_tolerance", positive=True)
    root.number("cr_tolerance", positive=True)


def _validate_transform_vacuum(root: _Scope) -> None:
    dim = root.integer("dim", minimum=2)
    cap = (dim or DEFAULTS["transform-vacuum"]["dim"]) // 4
    terms = root.array("terms", required=True)
    if terms is not None:
        if not terms:
            root.flag("terms", "must list at least one term")
        for idx, raw in enumerate(terms):
            if not isinstance(raw, dict):
                root.diags.append({"path": f"terms[{idx}]", "message": "must be an object"})
                continue
            term = _Scope(raw, f"terms[{idx}]", root.diags)
            m = term.integer("w_power", required=True, minimum=0)
            k = term.integer("wbar_power", required=True, minimum=0)
            term.complex_value("coefficient", required=True)
            if m is not None and k is not None and m + k > cap:
                term.flag("w_power", f"total degree must not exceed dim/4 = {cap}")
    states = root.array("states")
    if states is not None:
        for idx, raw in enumerate(states):
            try:
                parse_complex(raw)
            except ValueError as exc:
                root.diags.append({"path": f"states[{idx}]", "message": str(exc)})


def _check_tau(scope: _Scope, key: str, required=False) -> None:
    tau = scope.complex_value(key, required=required)
    if tau is not None and not tau.imag > 0:
        scope.flag(key, "must lie in the upper half-plane (positive imaginary part)")


def _validate_torus(root: _Scope) -> None:
    has_points = "theta_points" in root.data
    has_pair = "pair" in root.data
    if not has_points and not has_pair:
        root.flag("theta_points", "at least one of 'theta_points' or 'pair' is required")
        return
    if has_points:
        points = root.array("theta_points", required=True)
        if points is not None:
            for idx, raw in enumerate(points):
                if not isinstance(raw, dict):
                    root.diags.append({
                        "path": f"theta_points[{idx}]", "message": "must be an object",
                    })
                    continue
                point = _Scope(raw, f"theta_points[{idx}]", root.diags)
                point.complex_value("z", required=True)
                _check_tau(point, "tau", required=True)
    if has_pair:
        pair = root.obj("pair", required=True)
        if pair is not None:
            _check_tau(pair, "first", required=True)
            _check_tau(pair, "second", required=True)
            pair.number("tolerance", positive=True)
    root.integer("n_terms", minimum=1)
    root.number("accuracy", positive=True)


def _validate_foliate(root: _Scope) -> None:
    ambient = root.integer("ambient_modes", minimum=2)
    leaf_modes = root.integer("leaf_modes", minimum=1)
    if (
        ambient is not None
        and leaf_modes is not None
        and not leaf_modes < ambient
    ):
        root.flag("leaf_modes", "must be smaller than ambient_modes")
    leaf_dim = root.integer("leaf_dim", required=True, minimum=2)
    root.integer("complement_dim", required=True, minimum=2)
    root.number("radius", required=True, positive=True)
    levels = root.integer("levels", minimum=1)
    root.integer("n_radial", minimum=1)
    root.integer("n_angular", minimum=1)
    root.number("threshold", positive=True)
    root.number("scan_threshold", positive=True)
    leaf_value = root.complex_value("leaf_value")
    if leaf_value is not None and leaf_dim is not None:
        bound = math.sqrt(2 * leaf_dim) / 3
        if abs(leaf_value) > bound:
            root.flag(
                "leaf_value",
                f"exceeds truncation safety bound sqrt(2*dim)/3 = {bound:.4g}",
            )
    comp_dim = root.data.get("complement_dim")
    comp_value = root.complex_value("complement_value")
    if (
        comp_value is not None
        and isinstance(comp_dim, int)
        and not isinstance(comp_dim, bool)
        and comp_dim >= 2
    ):
        bound = math.sqrt(2 * comp_dim) / 3
        if abs(comp_value) > bound:
            root.flag(
                "complement_value",
                f"exceeds truncation safety bound sqrt(2*dim)/3 = {bound:.4g}",
            )
    structure = root.obj("complement_structure")
    if structure is not None:
        struct_modes = structure.integer("modes", required=True, minimum=1)
        if struct_modes is not None:
            _validate_structure_fragment(structure, struct_modes, root.diags)
        _check_grid(structure)


_VALIDATORS = {
    "check-integrability": _validate_check_integrability,
    "coherent-report": _validate_coherent_report,
    "classify-map": _validate_classify_map,
    "transform-vacuum": _validate_transform_vacuum,
    "torus": _validate_torus,
    "foliate": _validate_foliate,
}


def validate(config: dict) -> list[dict]:
    """Return all schema problems as {"path", "message"} diagnostics."""
    diags: list[dict] = []
    root = _Scope(config, "", diags)
    command = root.string("command", required=True)
    if command is None:
        return diags
    if command not in COMMANDS:
        root.flag("command", f"unknown command '{command}'")
        return diags
    _VALIDATORS[command](root)
    return diags
