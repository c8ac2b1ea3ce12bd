"""CSV writers/readers for the fixed output schemas.

Every file has a one-line header; floats are written as full-precision
scientific notation ('%.17e') so outputs are byte-reproducible and
round-trip exactly.
"""
from __future__ import annotations

import csv

import numpy as np

from .calibration import KIND_ELECTROSTATIC, ShiftDataset
from .errors import DomainError

FLOAT_FMT = "%.17e"

POTENTIAL_COLUMNS = ("x_m", "u_spring_J", "u_casimir_J", "u_total_J")
RESPONSE_COLUMNS = (
    "omega_rad_per_s",
    "freq_Hz",
    "amplitude_rad",
    "amplitude_m_at_sphere",
    "n_roots",
    "branch",
    "stable",
    "direction",
)
SWEEP_COLUMNS = (
    "setpoint_value",
    "setpoint_kind",
    "amplitude_rad",
    "amplitude_m_at_sphere",
    "phase_rad",
    "converged",
    "direction",
)
TRAJECTORY_COLUMNS = ("time_s", "theta_rad", "theta_dot_rad_per_s")
DATASET_COLUMNS = ("delta_z_m", "freq_shift_Hz")


def _f(value: float) -> str:
    return FLOAT_FMT % float(value)


def write_potential_csv(path, x, u_spring, u_casimir, u_total) -> int:
    """Write the three-term potential decomposition; returns the row count."""
    rows = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(POTENTIAL_COLUMNS)
        for xi, us, uc, ut in zip(x, u_spring, u_casimir, u_total):
            writer.writerow([_f(xi), _f(us), _f(uc), _f(ut)])
            rows += 1
    return rows


def write_response_csv(path, curve, lever_b: float) -> int:
    """Write a steady-state ResponseCurve; one row per (omega, root)."""
    rows = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESPONSE_COLUMNS)
        for omega, amp, n_roots, branch in zip(
            curve.omega, curve.amplitude_rad, curve.n_roots, curve.branch
        ):
            writer.writerow(
                [
                    _f(omega),
                    _f(omega / (2.0 * np.pi)),
                    _f(amp),
                    _f(amp * lever_b),
                    int(n_roots),
                    branch,
                    1,  # the traced branch is the physically realized, stable one
                    curve.direction,
                ]
            )
            rows += 1
    return rows


def write_sweep_csv(path, result, lever_b: float) -> int:
    """Write lock-in readings of a frequency or distance sweep."""
    kind = "omega_rad_per_s" if result.kind == "frequency" else "z_m"
    rows = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        for setpoint, amp, phase, conv in zip(
            result.setpoints, result.amplitude_rad, result.phase_rad, result.converged
        ):
            writer.writerow(
                [
                    _f(setpoint),
                    kind,
                    _f(amp),
                    _f(amp * lever_b),
                    _f(phase),
                    int(bool(conv)),
                    result.direction,
                ]
            )
            rows += 1
    return rows


def write_trajectory_csv(path, trajectory) -> int:
    rows = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRAJECTORY_COLUMNS)
        for t, th, w in zip(trajectory.times, trajectory.theta, trajectory.theta_dot):
            writer.writerow([_f(t), _f(th), _f(w)])
            rows += 1
    return rows


def write_dataset_csv(path, dataset: ShiftDataset) -> int:
    """Write a shift dataset; electrostatic sets carry the applied voltage."""
    with_v = dataset.kind == KIND_ELECTROSTATIC and dataset.applied_V is not None
    header = DATASET_COLUMNS + (("applied_V",) if with_v else ())
    rows = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for dz, df in zip(dataset.delta_z, dataset.freq_shift):
            row = [_f(dz), _f(df)]
            if with_v:
                row.append(_f(dataset.applied_V))
            writer.writerow(row)
            rows += 1
    return rows


def read_dataset_csv(path, kind: str) -> ShiftDataset:
    """Read a shift dataset written by :func:`write_dataset_csv`."""
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DomainError(f"{path}: empty dataset file") from None
        if tuple(header[:2]) != DATASET_COLUMNS:
            raise DomainError(
                f"{path}: expected columns {','.join(DATASET_COLUMNS)}, got {','.join(header)}"
            )
        has_v = len(header) > 2 and header[2] == "applied_V"
        dz, df, volts = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 2:
                raise DomainError(f"{path}:{lineno}: short row")
            dz.append(float(row[0]))
            df.append(float(row[1]))
            if has_v and len(row) > 2:
                volts.append(float(row[2]))
    applied = None
    if volts:
        if np.ptp(volts) > 1e-12 * max(abs(v) for v in volts):
            raise DomainError(f"{path}: applied_V varies within one dataset")
        applied = volts[0]
    if kind != KIND_ELECTROSTATIC:
        applied = None
    return ShiftDataset(
        kind=kind,
        delta_z=np.array(dz),
        freq_shift=np.array(df),
        applied_V=applied,
    )
