"""Run configuration: JSON schema, unit handling, presets, validation.

A config file is a JSON object with (all optional) sections:

``model``
    Parameter overrides, grouped as ``gain`` / ``plasmon`` / ``drive`` /
    ``frame``.  Frequencies and rates accept either a bare number
    (rad/s) or ``{"value": x, "unit": "eV"|"rad/s"}``.
    ``frame.nu_ref`` additionally accepts the string ``"auto"``
    (default), meaning: rotate each grid point at its own
    self-consistent spasing frequency.
``sweep``
    Up to three axes, each ``{"path": "gain.pump_g", "min": a,
    "max": b, "n": k}`` (linear grid) or ``{"path": ..., "values":
    [...]}``.  Paths are dotted parameter names validated against the
    schema.
``trajectory``
    ``t_end`` (number in seconds or ``{"value", "unit": "s"|"fs"|"ps"}``)
    and ``store_every`` for time-domain runs.
``options``
    ``tol`` (relative solver tolerance), ``seed_amplitude`` (initial
    plasmon amplitude for time-domain seeding), ``workers``.
``threshold``
    ``bracket``: ``[g_lo, g_hi]`` pump bracket for threshold scans.
``calibrate``
    ``bracket`` (coupling bracket ``[w_lo, w_hi]``), ``target_ratio``
    and ``omega_a_on`` for the coupling calibration command.

Unknown keys anywhere are rejected with their dotted path.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, replace

from .errors import ConfigError
from .params import ModelParams, default_params, param_paths, set_param
from .units import ev_to_angular

__all__ = [
    "SweepAxis",
    "TrajectoryOptions",
    "RunConfig",
    "parse_config",
    "build_config",
    "load_config_dict",
    "merge_dicts",
    "resolved_config_dict",
    "PRESETS",
]

_TIME_UNITS = {"s": 1.0, "fs": 1e-15, "ps": 1e-12}

_MODEL_LEAVES = {
    "gain": ("omega21", "omega32", "gamma21", "gamma31", "gamma32", "gamma_ph", "pump_g"),
    "plasmon": ("omega_n", "gamma_n", "n_p", "omega_b_single"),
    "drive": ("omega_a_rabi", "delta_a"),
    "frame": ("nu_ref",),
}
_PLAIN_LEAVES = {"plasmon.n_p"}


@dataclass(frozen=True)
class SweepAxis:
    """One sweep dimension: a dotted parameter path and its grid values."""

    path: str
    values: tuple[float, ...]


@dataclass(frozen=True)
class TrajectoryOptions:
    t_end: float = 6.0e-14
    store_every: int = 1


@dataclass(frozen=True)
class RunConfig:
    """Fully validated run description (model + sweep + solver options)."""

    model: ModelParams
    frame_auto: bool
    axes: tuple[SweepAxis, ...]
    trajectory: TrajectoryOptions
    tol: float = 1e-6
    seed_amplitude: float = 1e-3
    workers: int | None = None
    threshold_bracket: tuple[float, float] | None = None
    calibrate_bracket: tuple[float, float] = (1.0e12, 1.0e14)
    calibrate_target: float = 2.0
    calibrate_omega_a_on: float = 16.0e12

    def resolved_workers(self) -> int:
        if self.workers is not None:
            return self.workers
        return os.cpu_count() or 1


def _require_mapping(node, path: str) -> dict:
    if not isinstance(node, dict):
        raise ConfigError(f"'{path}' must be an object, got {type(node).__name__}")
    return node


def _reject_unknown(node: dict, allowed, path: str) -> None:
    unknown = sorted(set(node) - set(allowed))
    if unknown:
        where = f"{path}.{unknown[0]}" if path else unknown[0]
        raise ConfigError(f"unknown config key '{where}'")


def _number(node, path: str) -> float:
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise ConfigError(f"'{path}' must be a number, got {node!r}")
    value = float(node)
    if not math.isfinite(value):
        raise ConfigError(f"'{path}' must be finite, got {node!r}")
    return value


def _quantity(node, path: str, *, kind: str) -> float:
    """Convert a config leaf to internal units (rad/s or seconds)."""
    if isinstance(node, dict):
        _reject_unknown(node, ("value", "unit"), path)
        if "value" not in node or "unit" not in node:
            raise ConfigError(f"'{path}' needs both 'value' and 'unit'")
        value = _number(node["value"], f"{path}.value")
        unit = node["unit"]
        if kind == "time":
            if unit not in _TIME_UNITS:
                raise ConfigError(
                    f"'{path}.unit' must be one of {sorted(_TIME_UNITS)}, got {unit!r}"
                )
            return value * _TIME_UNITS[unit]
        if unit == "rad/s":
            return value
        if unit == "eV":
            return ev_to_angular(value)
        raise ConfigError(f"'{path}.unit' must be 'rad/s' or 'eV', got {unit!r}")
    if kind == "time":
        return _number(node, path)
    return _number(node, path)


def load_config_dict(path: str) -> dict:
    """Read and JSON-decode a config file with distinct error messages."""
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    return _require_mapping(data, "<config>")


def merge_dicts(base: dict, override: dict) -> dict:
    """Deep merge: override wins; nested objects merge key-by-key."""
    merged = dict(base)
    for key, value in override.items():
        if key in merged and isinstance(merged[key], dict) and isinstance(value, dict):
            merged[key] = merge_dicts(merged[key], value)
        else:
            merged[key] = value
    return merged


def _apply_model(data: dict) -> tuple[ModelParams, bool]:
    params = default_params()
    frame_auto = True
    _reject_unknown(data, _MODEL_LEAVES, "model")
    for group, node in data.items():
        node = _require_mapping(node, f"model.{group}")
        _reject_unknown(node, _MODEL_LEAVES[group], f"model.{group}")
        for leaf, raw in node.items():
            dotted = f"{group}.{leaf}"
            if dotted == "frame.nu_ref":
                if raw == "auto":
                    frame_auto = True
                    continue
                frame_auto = False
                value = _quantity(raw, f"model.{dotted}", kind="frequency")
            elif dotted in _PLAIN_LEAVES:
                value = _number(raw, f"model.{dotted}")
            else:
                value = _quantity(raw, f"model.{dotted}", kind="frequency")
            try:
                params = set_param(params, dotted, value)
            except ConfigError as exc:
                raise ConfigError(f"model.{dotted}: {exc}") from exc
    return params, frame_auto


def _parse_axis(node, index: int) -> SweepAxis:
    path_label = f"sweep[{index}]"
    node = _require_mapping(node, path_label)
    if "path" not in node:
        raise ConfigError(f"'{path_label}' needs a 'path'")
    path = node["path"]
    if path not in param_paths():
        raise ConfigError(
            f"'{path_label}.path': unknown parameter path {path!r}"
        )
    if "values" in node:
        _reject_unknown(node, ("path", "values"), path_label)
        raw = node["values"]
        if not isinstance(raw, list) or not raw:
            raise ConfigError(f"'{path_label}.values' must be a non-empty list")
        values = tuple(
            _number(v, f"{path_label}.values[{i}]") for i, v in enumerate(raw)
        )
    else:
        _reject_unknown(node, ("path", "min", "max", "n"), path_label)
        for key in ("min", "max", "n"):
            if key not in node:
                raise ConfigError(
                    f"'{path_label}' needs either 'values' or 'min'/'max'/'n'"
                )
        lo = _number(node["min"], f"{path_label}.min")
        hi = _number(node["max"], f"{path_label}.max")
        n = node["n"]
        if isinstance(n, bool) or not isinstance(n, int) or n < 2:
            raise ConfigError(f"'{path_label}.n' must be an integer >= 2")
        if not hi > lo:
            raise ConfigError(f"'{path_label}': max must exceed min")
        step = (hi - lo) / (n - 1)
        values = tuple(lo + step * i for i in range(n - 1)) + (hi,)
    return SweepAxis(path=path, values=values)


def _parse_bracket(raw, path: str) -> tuple[float, float]:
    if not isinstance(raw, list) or len(raw) != 2:
        raise ConfigError(f"'{path}' must be a [low, high] pair")
    lo = _number(raw[0], f"{path}[0]")
    hi = _number(raw[1], f"{path}[1]")
    if not 0.0 < lo < hi:
        raise ConfigError(f"'{path}' needs 0 < low < high")
    return (lo, hi)


def build_config(data: dict) -> RunConfig:
    """Validate a merged config dict into a RunConfig."""
    _reject_unknown(
        data, ("model", "sweep", "trajectory", "options", "threshold", "calibrate"), ""
    )

    model_node = _require_mapping(data.get("model", {}), "model")
    model, frame_auto = _apply_model(model_node)

    raw_axes = data.get("sweep", [])
    if not isinstance(raw_axes, list):
        raise ConfigError("'sweep' must be a list of axes")
    if len(raw_axes) > 3:
        raise ConfigError(f"'sweep' supports at most 3 axes, got {len(raw_axes)}")
    axes = tuple(_parse_axis(node, i) for i, node in enumerate(raw_axes))
    seen = set()
    for axis in axes:
        if axis.path in seen:
            raise ConfigError(f"'sweep': duplicate axis path {axis.path!r}")
        seen.add(axis.path)

    traj_node = _require_mapping(data.get("trajectory", {}), "trajectory")
    _reject_unknown(traj_node, ("t_end", "store_every"), "trajectory")
    traj = TrajectoryOptions()
    if "t_end" in traj_node:
        t_end = _quantity(traj_node["t_end"], "trajectory.t_end", kind="time")
        if t_end <= 0.0:
            raise ConfigError("'trajectory.t_end' must be positive")
        traj = replace(traj, t_end=t_end)
    if "store_every" in traj_node:
        every = traj_node["store_every"]
        if isinstance(every, bool) or not isinstance(every, int) or every < 1:
            raise ConfigError("'trajectory.store_every' must be an integer >= 1")
        traj = replace(traj, store_every=every)

    opt_node = _require_mapping(data.get("options", {}), "options")
    _reject_unknown(opt_node, ("tol", "seed_amplitude", "workers"), "options")
    tol = _number(opt_node.get("tol", 1e-6), "options.tol")
    if tol <= 0.0:
        raise ConfigError("'options.tol' must be positive")
    seed = _number(opt_node.get("seed_amplitude", 1e-3), "options.seed_amplitude")
    if seed <= 0.0:
        raise ConfigError("'options.seed_amplitude' must be positive")
    workers = opt_node.get("workers")
    if workers is not None and (
        isinstance(workers, bool) or not isinstance(workers, int) or workers < 1
    ):
        raise ConfigError("'options.workers' must be an integer >= 1 or null")

    th_node = _require_mapping(data.get("threshold", {}), "threshold")
    _reject_unknown(th_node, ("bracket",), "threshold")
    bracket = None
    if "bracket" in th_node:
        bracket = _parse_bracket(th_node["bracket"], "threshold.bracket")

    cal_node = _require_mapping(data.get("calibrate", {}), "calibrate")
    _reject_unknown(cal_node, ("bracket", "target_ratio", "omega_a_on"), "calibrate")
    cal_bracket = (1.0e12, 1.0e14)
    if "bracket" in cal_node:
        cal_bracket = _parse_bracket(cal_node["bracket"], "calibrate.bracket")
    cal_target = _number(cal_node.get("target_ratio", 2.0), "calibrate.target_ratio")
    if cal_target <= 0.0:
        raise ConfigError("'calibrate.target_ratio' must be positive")
    cal_on = _quantity(
        cal_node.get("omega_a_on", 16.0e12), "calibrate.omega_a_on", kind="frequency"
    )
    if cal_on < 0.0:
        raise ConfigError("'calibrate.omega_a_on' must be nonnegative")

    return RunConfig(
        model=model,
        frame_auto=frame_auto,
        axes=axes,
        trajectory=traj,
        tol=tol,
        seed_amplitude=seed,
        workers=workers,
        threshold_bracket=bracket,
        calibrate_bracket=cal_bracket,
        calibrate_target=cal_target,
        calibrate_omega_a_on=cal_on,
    )


def parse_config(path: str, preset: str | None = None) -> RunConfig:
    """Load, merge (preset under file), validate."""
    data = load_config_dict(path)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(
                f"unknown preset {preset!r}; available: {sorted(PRESETS)}"
            )
        data = merge_dicts(PRESETS[preset], data)
    return build_config(data)


def resolved_config_dict(config: RunConfig) -> dict:
    """Canonical fully-resolved config (plain rad/s and second values).

    This is what gets embedded in table metadata so that every figure
    is reproducible from its own file; execution details such as the
    worker count are deliberately excluded.
    """
    model = config.model
    return {
        "model": {
            "gain": {
                "omega21": model.gain.omega21,
                "omega32": model.gain.omega32,
                "gamma21": model.gain.gamma21,
                "gamma31": model.gain.gamma31,
                "gamma32": model.gain.gamma32,
                "gamma_ph": model.gain.gamma_ph,
                "pump_g": model.gain.pump_g,
            },
            "plasmon": {
                "omega_n": model.plasmon.omega_n,
                "gamma_n": model.plasmon.gamma_n,
                "n_p": model.plasmon.n_p,
                "omega_b_single": model.plasmon.omega_b_single,
            },
            "drive": {
                "omega_a_rabi": model.drive.omega_a_rabi,
                "delta_a": model.drive.delta_a,
            },
            "frame": {
                "nu_ref": "auto" if config.frame_auto else model.frame.nu_ref,
            },
        },
        "sweep": [
            {"path": axis.path, "values": list(axis.values)} for axis in config.axes
        ],
        "trajectory": {
            "t_end": config.trajectory.t_end,
            "store_every": config.trajectory.store_every,
        },
        "options": {
            "tol": config.tol,
            "seed_amplitude": config.seed_amplitude,
        },
        "threshold": {
            "bracket": list(config.threshold_bracket)
            if config.threshold_bracket
            else None
        },
        "calibrate": {
            "bracket": list(config.calibrate_bracket),
            "target_ratio": config.calibrate_target,
            "omega_a_on": config.calibrate_omega_a_on,
        },
    }


#: Parameter presets for the four bundled figure-style sweeps.  Values
#: are config fragments merged *under* the user's config file.
PRESETS: dict[str, dict] = {
    # plasmon number and inversion vs pump for three drive strengths
    "fig2": {
        "model": {"gain": {"gamma_ph": 0.0}},
        "sweep": [
            {"path": "gain.pump_g", "min": 0.0, "max": 2.0e13, "n": 81},
            {"path": "drive.omega_a_rabi", "values": [0.0, 4.0e12, 16.0e12]},
        ],
    },
    # plasmon number vs pump for four dephasing rates at fixed drive
    "fig3": {
        "model": {"drive": {"omega_a_rabi": 16.0e12}},
        "sweep": [
            {"path": "gain.pump_g", "min": 0.0, "max": 2.0e13, "n": 81},
            {"path": "gain.gamma_ph", "values": [0.0, 80.0e12, 160.0e12, 240.0e12]},
        ],
    },
    # growth rate over a drive grid for three pump rates
    "fig4a": {
        "model": {"gain": {"gamma_ph": 0.0}},
        "sweep": [
            {"path": "drive.omega_a_rabi", "min": 0.0, "max": 1.0e14, "n": 41},
            {"path": "gain.pump_g", "values": [4.4e12, 6.0e12, 8.0e12]},
        ],
    },
    # field build-up in time, undriven vs strongly driven
    "fig4b": {
        "model": {"gain": {"pump_g": 8.0e12, "gamma_ph": 0.0}},
        "sweep": [{"path": "drive.omega_a_rabi", "values": [0.0, 24.0e12]}],
        "trajectory": {"t_end": 6.0e-14, "store_every": 1},
    },
}
