"""Config-driven command line for the oscillator experiments.

Each subcommand resolves a config (built-in defaults, then an optional
file, then --set overrides), runs one experiment, writes CSV outputs, and
prints a flat key-value report to stdout. Wall-clock timings go to stderr
so the report itself is byte-reproducible.
"""
from __future__ import annotations

import argparse
import math
import sys
import time

import numpy as np

from . import calibration, csvio, dynamics, statics
from . import resonance as res
from .config import (
    Config,
    apply_overrides,
    default_paper_config,
    load_config_file,
)
from .errors import (
    CasimirMemsError,
    ConfigError,
    PullInError,
    StiffnessError,
)
from .forces import CasimirSpherePlateLaw, SpherePlateGeometry
from .resonance import TorsionalOscillator

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_DYNAMICS = 4

SUBCOMMANDS = (
    "potential",
    "equilibria",
    "shift",
    "kappa",
    "response",
    "freq-sweep",
    "dist-sweep",
    "fit",
    "synth",
)


def _require(config: Config, *keys: str) -> list:
    values = []
    for key in keys:
        if key not in config:
            raise ConfigError(f"missing required key {key!r}")
        values.append(config[key])
    return values


def _render(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def _echo(config: Config) -> list[str]:
    return [f"config.{key} = {_render(config[key])}" for key in sorted(config)]


def _oscillator(config: Config) -> TorsionalOscillator:
    inertia, q = _require(config, "inertia_I_kg_m2", "quality_Q")
    f0 = config.get("f0_Hz")
    k = config.get("spring_k_Nm_per_rad")
    if f0 is None and k is None:
        raise ConfigError("need f0_Hz or spring_k_Nm_per_rad")
    if f0 is not None and k is not None:
        omega0 = 2.0 * math.pi * f0
        if abs(math.sqrt(k / inertia) - omega0) > 1e-6 * omega0:
            raise ConfigError(
                "f0_Hz and spring_k_Nm_per_rad disagree; drop one or fix the values"
            )
    if f0 is not None:
        return TorsionalOscillator.from_frequency(f0, inertia, q)
    return TorsionalOscillator.from_stiffness(k, inertia, q)


def _geometry(config: Config) -> SpherePlateGeometry:
    radius, lever = _require(config, "radius_R_m", "lever_b_m")
    return SpherePlateGeometry(
        radius_R=radius,
        lever_b=lever,
        z0=config.get("z0_m", 0.0),
        z1=config.get("z1_m", 0.0),
    )


def _drive_torque(config: Config) -> float:
    if "tau_Nm" in config:
        return config["tau_Nm"]
    if "excitation_V_V" in config:
        (scale,) = _require(config, "torque_per_volt_Nm_per_V")
        return config["excitation_V_V"] * scale
    raise ConfigError("need tau_Nm or excitation_V_V to set the drive strength")


def _statics_model(config: Config) -> statics.SpringSphereModel:
    k, d, radius = _require(
        config, "statics_spring_k_N_per_m", "separation_d_m", "radius_R_m"
    )
    return statics.SpringSphereModel(
        spring_k=k,
        sphere_R=radius,
        separation_d=d,
        gap_floor=config.get("gap_floor_m", statics.DEFAULT_GAP_FLOOR),
    )


def _osc_lines(osc: TorsionalOscillator) -> list[str]:
    return [
        f"derived.omega0_rad_per_s = {osc.omega0!r}",
        f"derived.gamma_rad_per_s = {osc.gamma!r}",
    ]


def _cmd_potential(config: Config) -> list[str]:
    model = _statics_model(config)
    n = config.get("x_points", 400)
    if n < 2:
        raise ConfigError("x_points must be at least 2")
    x_max = config.get("x_max_m", model.separation_d - model.gap_floor)
    if not 0.0 < x_max < model.separation_d:
        raise ConfigError("x_max_m must fall between 0 and separation_d_m")
    x = np.linspace(0.0, x_max, n)
    u_spring = np.array([statics.spring_energy(model, xi) for xi in x])
    u_sphere = np.array([statics.sphere_energy(model, xi) for xi in x])
    path = config.get("out_csv", "potential.csv")
    rows = csvio.write_potential_csv(path, x, u_spring, u_sphere, u_spring + u_sphere)
    d_c = statics.critical_separation(model.spring_k, model.sphere_R, model.constants)
    return [
        f"derived.critical_separation_m = {d_c!r}",
        f"output.{path}.rows = {rows}",
    ]


def _cmd_equilibria(config: Config) -> list[str]:
    model = _statics_model(config)
    found = statics.find_equilibria(model)
    d_c = statics.critical_separation(model.spring_k, model.sphere_R, model.constants)
    lines = [
        f"derived.critical_separation_m = {d_c!r}",
        f"derived.n_equilibria = {len(found.equilibria)}",
        f"derived.bistable = {int(found.bistable)}",
    ]
    for i, eq in enumerate(found.equilibria):
        lines.append(f"derived.equilibrium_{i}_x_m = {eq.x!r}")
        lines.append(f"derived.equilibrium_{i}_kind = {eq.kind}")
    if found.barrier_height is not None:
        lines.append(f"derived.barrier_height_J = {found.barrier_height!r}")
    if model.separation_d < d_c:
        lines.append(
            "note = separation_d_m is below the critical separation: the sphere "
            "potential has no equilibrium and the plate collapses to contact"
        )
    return lines


def _cmd_shift(config: Config) -> list[str]:
    osc = _oscillator(config)
    geom = _geometry(config)
    (z,) = _require(config, "z_m")
    law = CasimirSpherePlateLaw(radius_R=geom.radius_R)
    geom.validate_gap(z)
    shifted = res.linearized_shift(osc, geom.lever_b, law.derivative(z, 1))
    two_pi = 2.0 * math.pi
    return _osc_lines(osc) + [
        f"derived.omega1_rad_per_s = {shifted.omega1!r}",
        f"derived.omega1_exact_rad_per_s = {shifted.omega_exact!r}",
        f"derived.f1_Hz = {shifted.omega1 / two_pi!r}",
        f"derived.shift_Hz = {(shifted.omega1 - osc.omega0) / two_pi!r}",
        f"derived.shift_exact_Hz = {(shifted.omega_exact - osc.omega0) / two_pi!r}",
    ]


def _kappa_common(config: Config):
    osc = _oscillator(config)
    geom = _geometry(config)
    (z,) = _require(config, "z_m")
    law = CasimirSpherePlateLaw(radius_R=geom.radius_R)
    coeffs = res.taylor_coefficients(
        osc, geom, law, z, frequency_model=config.get("frequency_model", "linear")
    )
    return osc, geom, law, coeffs


def _window_lines(coeffs, osc, tau: float) -> list[str]:
    window = res.hysteresis_window(coeffs, osc, tau)
    if window is None:
        return ["derived.hysteresis_window = none"]
    return [
        f"derived.hysteresis_window_lo_rad_per_s = {window[0]!r}",
        f"derived.hysteresis_window_hi_rad_per_s = {window[1]!r}",
    ]


def _cmd_kappa(config: Config) -> list[str]:
    osc, _, _, coeffs = _kappa_common(config)
    lines = _osc_lines(osc) + [
        f"derived.omega1_rad_per_s = {coeffs.omega1!r}",
        f"derived.alpha_rad_per_s2 = {coeffs.alpha!r}",
        f"derived.beta_rad_per_s2 = {coeffs.beta!r}",
        f"derived.kappa_per_rad2_per_s = {coeffs.kappa!r}",
    ]
    try:
        tau = _drive_torque(config)
    except ConfigError:
        return lines
    return lines + _window_lines(coeffs, osc, tau)


def _default_omega_range(coeffs, osc, tau: float) -> tuple[float, float]:
    # Cover the bent backbone plus a 10-linewidth margin on both sides.
    lam = osc.gamma
    a_max = tau / (2.0 * osc.inertia_I * coeffs.omega1 * lam)
    bend = 1.3 * coeffs.kappa * a_max**2
    lo = coeffs.omega1 + min(bend, 0.0) - 10.0 * lam
    hi = coeffs.omega1 + max(bend, 0.0) + 10.0 * lam
    return max(lo, 1e-6 * coeffs.omega1), hi


def _omega_grid(config: Config, coeffs, osc, tau: float, default_points: int):
    lo = config.get("omega_min_rad_per_s")
    hi = config.get("omega_max_rad_per_s")
    if (lo is None) != (hi is None):
        raise ConfigError("set both omega_min_rad_per_s and omega_max_rad_per_s")
    if lo is None:
        lo, hi = _default_omega_range(coeffs, osc, tau)
    if not 0.0 < lo < hi:
        raise ConfigError("omega range must satisfy 0 < omega_min < omega_max")
    n = config.get("omega_points", default_points)
    if n < 2:
        raise ConfigError("omega_points must be at least 2")
    return np.linspace(lo, hi, n)


def _cmd_response(config: Config) -> list[str]:
    osc, geom, _, coeffs = _kappa_common(config)
    tau = _drive_torque(config)
    direction = config.get("direction", "up")
    grid = _omega_grid(config, coeffs, osc, tau, default_points=400)
    if direction == "down":
        grid = grid[::-1]
    curve = res.response_curve(coeffs, osc, tau, grid, direction)
    path = config.get("out_csv", "response.csv")
    rows = csvio.write_response_csv(path, curve, geom.lever_b)
    lines = _osc_lines(osc) + [
        f"derived.omega1_rad_per_s = {coeffs.omega1!r}",
        f"derived.kappa_per_rad2_per_s = {coeffs.kappa!r}",
    ]
    return lines + _window_lines(coeffs, osc, tau) + [f"output.{path}.rows = {rows}"]


def _sweep_protocol_fields(config: Config, osc) -> tuple[int, int, int]:
    settle = config.get("settle_cycles", math.ceil(8.0 * osc.quality_Q))
    measure = config.get("measure_cycles", 64)
    spp = config.get("samples_per_period", dynamics.MIN_SAMPLES_PER_PERIOD)
    return settle, measure, spp


def _cmd_freq_sweep(config: Config) -> list[str]:
    osc, geom, law, coeffs = _kappa_common(config)
    tau = _drive_torque(config)
    z = config["z_m"]
    grid = _omega_grid(config, coeffs, osc, tau, default_points=61)
    settle, measure, spp = _sweep_protocol_fields(config, osc)
    rtol = config.get("integrator_rtol", dynamics.DEFAULT_RTOL)
    atol = config.get("integrator_atol_rad", dynamics.DEFAULT_ATOL)
    lines = _osc_lines(osc) + [
        f"derived.omega1_rad_per_s = {coeffs.omega1!r}",
        f"derived.kappa_per_rad2_per_s = {coeffs.kappa!r}",
    ]
    for direction, path_key, default_path in (
        ("up", "out_up_csv", "freq_sweep_up.csv"),
        ("down", "out_down_csv", "freq_sweep_down.csv"),
    ):
        setpoints = tuple(grid if direction == "up" else grid[::-1])
        protocol = dynamics.SweepProtocol(
            kind="frequency",
            setpoints=setpoints,
            settle_cycles=settle,
            measure_cycles=measure,
            fixed_value=z,
            samples_per_period=spp,
        )
        result = dynamics.swept_frequency(
            osc, geom, law, tau, protocol, rtol=rtol, atol=atol
        )
        path = config.get(path_key, default_path)
        rows = csvio.write_sweep_csv(path, result, geom.lever_b)
        lines.append(f"output.{path}.rows = {rows}")
    return lines


def _cmd_dist_sweep(config: Config) -> list[str]:
    osc = _oscillator(config)
    geom = _geometry(config)
    law = CasimirSpherePlateLaw(radius_R=geom.radius_R)
    tau = _drive_torque(config)
    omega, z_start, z_end = _require(
        config, "omega_rad_per_s", "z_start_m", "z_end_m"
    )
    n = config.get("z_points", 25)
    if n < 2:
        raise ConfigError("z_points must be at least 2")
    if not 0.0 < z_end < z_start:
        raise ConfigError("need z_start_m > z_end_m > 0 (approach, then retract)")
    settle, measure, spp = _sweep_protocol_fields(config, osc)
    rtol = config.get("integrator_rtol", dynamics.DEFAULT_RTOL)
    atol = config.get("integrator_atol_rad", dynamics.DEFAULT_ATOL)
    approach_pts = tuple(np.linspace(z_start, z_end, n))
    protocol = dynamics.SweepProtocol(
        kind="distance",
        setpoints=approach_pts,
        settle_cycles=settle,
        measure_cycles=measure,
        samples_per_period=spp,
    )
    approach = dynamics.swept_distance(
        osc, geom, law, tau, omega, protocol, rtol=rtol, atol=atol
    )
    retract_protocol = dynamics.SweepProtocol(
        kind="distance",
        setpoints=approach_pts[::-1],
        settle_cycles=settle,
        measure_cycles=measure,
        samples_per_period=spp,
    )
    # The retract leg continues from the approach's end state: that carried
    # state is the whole point of the measurement.
    retract = dynamics.swept_distance(
        osc,
        geom,
        law,
        tau,
        omega,
        retract_protocol,
        initial=approach.final_state,
        initial_drive_phase=approach.final_drive_phase,
        rtol=rtol,
        atol=atol,
    )
    lines = _osc_lines(osc)
    for result, path_key, default_path in (
        (approach, "out_approach_csv", "dist_sweep_approach.csv"),
        (retract, "out_retract_csv", "dist_sweep_retract.csv"),
    ):
        path = config.get(path_key, default_path)
        rows = csvio.write_sweep_csv(path, result, geom.lever_b)
        lines.append(f"output.{path}.rows = {rows}")
    return lines


def _cmd_fit(config: Config) -> list[str]:
    (kind,) = _require(config, "fit_kind")
    (path,) = _require(config, "dataset_csv")
    osc = _oscillator(config)
    (radius,) = _require(config, "radius_R_m")
    dataset = csvio.read_dataset_csv(path, kind)
    if kind == "electrostatic":
        v = config.get("applied_V_V", dataset.applied_V)
        if v is None:
            raise ConfigError(
                "electrostatic fit needs applied_V_V (or an applied_V CSV column)"
            )
        (v0,) = _require(config, "residual_V0_V")
        result = calibration.fit_electrostatic_geometry(dataset, osc, radius, v, v0)
    else:
        b = config.get("known_b_m", config.get("lever_b_m"))
        if b is None:
            raise ConfigError("casimir fit needs known_b_m (or lever_b_m)")
        result = calibration.fit_casimir_offset(dataset, osc, radius, b)
    lines = _osc_lines(osc) + [f"derived.fit.n_points = {len(dataset)}"]
    for name in sorted(result.parameters):
        lines.append(f"derived.fit.{name} = {result.parameters[name]!r}")
    lines += [
        f"derived.fit.residual_rms_Hz = {result.residual_rms!r}",
        f"derived.fit.converged = {int(result.converged)}",
        f"derived.fit.iterations = {result.iterations}",
        f"derived.fit.at_bounds = {','.join(result.at_bounds) or 'none'}",
    ]
    return lines


def _cmd_synth(config: Config) -> list[str]:
    (kind,) = _require(config, "synth_kind")
    osc = _oscillator(config)
    (radius, lever) = _require(config, "radius_R_m", "lever_b_m")
    start = config.get("delta_z_start_m", 0.0)
    end = config.get("delta_z_end_m", 500e-9)
    n = config.get("n_points", 30)
    if n < 1:
        raise ConfigError("n_points must be at least 1")
    if start < 0.0 or end < start:
        raise ConfigError("need 0 <= delta_z_start_m <= delta_z_end_m")
    grid = np.linspace(start, end, n)
    sigma = config.get("noise_sigma_Hz", 0.0)
    seed = config.get("seed", 0)
    if kind == "electrostatic":
        (v,) = _require(config, "applied_V_V")
        z0, v0 = _require(config, "z0_m", "residual_V0_V")
        dataset = calibration.synthesize_shift_dataset(
            kind, osc, radius, grid,
            z0=z0, lever_b=lever, voltage_V=v, residual_V0=v0,
            noise_sigma=sigma, seed=seed,
        )
    else:
        (z1,) = _require(config, "z1_m")
        dataset = calibration.synthesize_shift_dataset(
            kind, osc, radius, grid,
            z1=z1, lever_b=lever, noise_sigma=sigma, seed=seed,
        )
    path = config.get("out_csv", "dataset.csv")
    rows = csvio.write_dataset_csv(path, dataset)
    return _osc_lines(osc) + [f"output.{path}.rows = {rows}"]


_DISPATCH = {
    "potential": _cmd_potential,
    "equilibria": _cmd_equilibria,
    "shift": _cmd_shift,
    "kappa": _cmd_kappa,
    "response": _cmd_response,
    "freq-sweep": _cmd_freq_sweep,
    "dist-sweep": _cmd_dist_sweep,
    "fit": _cmd_fit,
    "synth": _cmd_synth,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="casimir-mems",
        description="Statics, resonance, sweeps, and calibration fits for a "
        "torsional oscillator facing a metallic sphere.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="path to a key=value config file")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a config key (repeatable, applied after --config)",
        )
    return parser


def resolve_config(args) -> Config:
    config = default_paper_config()
    if args.config:
        try:
            file_config = load_config_file(args.config)
        except OSError as exc:
            raise ConfigError(f"cannot read {args.config}: {exc}") from exc
        config.update(file_config)
    return apply_overrides(config, args.overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        config = resolve_config(args)
        lines = _echo(config) + _DISPATCH[args.subcommand](config)
        report = "\n".join(lines) + "\n"
        sys.stdout.write(report)
        out_report = config.get("out_report")
        if out_report:
            with open(out_report, "w", encoding="utf-8") as fh:
                fh.write(report)
    except ConfigError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PullInError, StiffnessError) as exc:
        category = "pull-in" if isinstance(exc, PullInError) else "stiffness"
        print(f"error: {category}: {exc}", file=sys.stderr)
        return EXIT_DYNAMICS
    except CasimirMemsError as exc:
        print(f"error: domain: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"timing.total_s = {time.perf_counter() - t0:.3f}", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
