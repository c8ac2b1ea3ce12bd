"""Flat key=value experiment configuration.

One ``key = value`` per line, ``#`` starts a comment, no nesting. Every
dimensional key carries its SI unit in the name (lever_b_m, tau_Nm) so a
config file is unambiguous without a units system. Unknown keys are
rejected with the offending line number.
"""
from __future__ import annotations

import math

from .errors import ConfigError

_FLOAT = "float"
_INT = "int"
_STR = "str"

#: Every accepted key with its value type and optional enum of choices.
KNOWN_KEYS: dict[str, tuple[str, tuple[str, ...] | None]] = {
    # oscillator
    "f0_Hz": (_FLOAT, None),
    "spring_k_Nm_per_rad": (_FLOAT, None),
    "inertia_I_kg_m2": (_FLOAT, None),
    "quality_Q": (_FLOAT, None),
    # sphere/plate geometry
    "radius_R_m": (_FLOAT, None),
    "lever_b_m": (_FLOAT, None),
    "z0_m": (_FLOAT, None),
    "z1_m": (_FLOAT, None),
    # electrostatics and drive
    "residual_V0_V": (_FLOAT, None),
    "torque_per_volt_Nm_per_V": (_FLOAT, None),
    "excitation_V_V": (_FLOAT, None),
    "tau_Nm": (_FLOAT, None),
    "seed": (_INT, None),
    # statics (translational spring-sphere model)
    "statics_spring_k_N_per_m": (_FLOAT, None),
    "separation_d_m": (_FLOAT, None),
    "gap_floor_m": (_FLOAT, None),
    "x_points": (_INT, None),
    "x_max_m": (_FLOAT, None),
    # resonance-curve controls
    "z_m": (_FLOAT, None),
    "frequency_model": (_STR, ("linear", "exact")),
    "omega_min_rad_per_s": (_FLOAT, None),
    "omega_max_rad_per_s": (_FLOAT, None),
    "omega_points": (_INT, None),
    "direction": (_STR, ("up", "down")),
    # time-domain sweep controls
    "settle_cycles": (_INT, None),
    "measure_cycles": (_INT, None),
    "samples_per_period": (_INT, None),
    "integrator_rtol": (_FLOAT, None),
    "integrator_atol_rad": (_FLOAT, None),
    "omega_rad_per_s": (_FLOAT, None),
    "z_start_m": (_FLOAT, None),
    "z_end_m": (_FLOAT, None),
    "z_points": (_INT, None),
    # calibration controls
    "fit_kind": (_STR, ("electrostatic", "casimir")),
    "synth_kind": (_STR, ("electrostatic", "casimir")),
    "dataset_csv": (_STR, None),
    "applied_V_V": (_FLOAT, None),
    "known_b_m": (_FLOAT, None),
    "delta_z_start_m": (_FLOAT, None),
    "delta_z_end_m": (_FLOAT, None),
    "n_points": (_INT, None),
    "noise_sigma_Hz": (_FLOAT, None),
    # output paths
    "out_csv": (_STR, None),
    "out_up_csv": (_STR, None),
    "out_down_csv": (_STR, None),
    "out_approach_csv": (_STR, None),
    "out_retract_csv": (_STR, None),
    "out_report": (_STR, None),
}

Config = dict


def _convert(key: str, raw: str, line: int | None):
    kind, choices = KNOWN_KEYS[key]
    raw = raw.strip()
    if kind == _FLOAT:
        try:
            value = float(raw)
        except ValueError:
            raise ConfigError(f"{key}: {raw!r} is not a number", line=line) from None
        if not math.isfinite(value):
            raise ConfigError(f"{key}: value must be finite", line=line)
        return value
    if kind == _INT:
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{key}: {raw!r} is not an integer", line=line) from None
    if choices is not None and raw not in choices:
        raise ConfigError(
            f"{key}: {raw!r} not one of {', '.join(choices)}", line=line
        )
    return raw


def parse_config_text(text: str, source: str = "<config>") -> Config:
    """Parse config text, rejecting unknown keys and bad values by line."""
    config: Config = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}: expected 'key = value'", line=lineno)
        key, _, raw_value = line.partition("=")
        key = key.strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{source}: unknown key {key!r}", line=lineno)
        if key in config:
            raise ConfigError(f"{source}: duplicate key {key!r}", line=lineno)
        config[key] = _convert(key, raw_value, lineno)
    return config


def load_config_file(path: str) -> Config:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), source=path)


def apply_overrides(config: Config, assignments) -> Config:
    """Apply ``key=value`` strings over a parsed config (last one wins)."""
    merged = dict(config)
    for item in assignments:
        if "=" not in item:
            raise ConfigError(f"override {item!r} must look like key=value")
        key, _, raw_value = item.partition("=")
        key = key.strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"override: unknown key {key!r}")
        merged[key] = _convert(key, raw_value, None)
    return merged


def format_config(config: Config) -> str:
    """Render a config as parseable ``key = value`` lines (sorted)."""
    lines = []
    for key in sorted(config):
        value = config[key]
        if isinstance(value, float):
            rendered = repr(value)
        else:
            rendered = str(value)
        lines.append(f"{key} = {rendered}")
    return "\n".join(lines) + "\n"


def default_paper_config() -> Config:
    """Baseline parameter set for the gold-coated oscillator experiment.

    The torsional spring constant is derived from the measured resonance
    (k = I omega0^2) so the oscillator block is self-consistent; the quoted
    2.1e-8 Nm/rad rounds from this value. torque_per_volt converts the
    excitation voltage amplitude to a drive torque amplitude.
    """
    f0 = 2753.47
    inertia = 7.1e-17
    omega0 = 2.0 * math.pi * f0
    return {
        "f0_Hz": f0,
        "spring_k_Nm_per_rad": inertia * omega0**2,
        "inertia_I_kg_m2": inertia,
        "quality_Q": 7150.0,
        "radius_R_m": 100e-6,
        "lever_b_m": 131.0e-6,
        "z0_m": 122.4e-9,
        "z1_m": 85.9e-9,
        "residual_V0_V": 0.075,
        "torque_per_volt_Nm_per_V": 1.5886098806264316e-11,
        "statics_spring_k_N_per_m": 0.019,
        "separation_d_m": 40e-9,
        "gap_floor_m": 10e-9,
        "seed": 0,
    }
