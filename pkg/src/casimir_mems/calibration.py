"""Calibration fits: residual voltage, electrostatic geometry, sphere offset.

The measured observable is the shift of the resonance frequency versus the
piezo displacement delta_z. To first order the shift is

    delta_f = -b^2 F'(z) / (4 pi I omega0),    z = delta_z + offset

which gives a 1/(delta_z + z0)^2 curve for the electrostatic force and a
1/(delta_z + z1)^4 curve for the sphere-plate attraction. The electrostatic
curve is fit for (z0, b); the second curve then has only the gap offset z1
free, with b carried over.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import CODATA, PhysicalConstants
from .errors import (
    DegenerateDataError,
    DomainError,
    FitError,
    InsufficientDataError,
    NotAMaximumError,
)
from .resonance import TorsionalOscillator

KIND_ELECTROSTATIC = "electrostatic"
KIND_CASIMIR = "casimir"

#: Fit-parameter boxes; estimates landing on an edge are flagged.
BOUNDS = {
    "z0_m": (1e-9, 10e-6),
    "b_m": (1e-6, 1e-3),
    "z1_m": (10e-9, 1e-6),
}

_MULTISTART_PER_AXIS = 4
_MAX_ITERATIONS = 300
_PARAM_TOL = 1e-10


@dataclass(frozen=True)
class ShiftDataset:
    """Frequency-shift-vs-displacement data, sorted by delta_z."""

    kind: str
    delta_z: np.ndarray
    freq_shift: np.ndarray
    applied_V: float | None = None
    noise_sigma: float | None = None

    def __post_init__(self):
        if self.kind not in (KIND_ELECTROSTATIC, KIND_CASIMIR):
            raise DomainError(f"unknown dataset kind {self.kind!r}")
        dz = np.asarray(self.delta_z, dtype=float)
        df = np.asarray(self.freq_shift, dtype=float)
        if dz.ndim != 1 or dz.shape != df.shape or len(dz) == 0:
            raise DomainError("delta_z and freq_shift must be matching 1-D arrays")
        if not np.all(np.isfinite(dz)) or not np.all(np.isfinite(df)):
            raise DomainError("dataset contains non-finite values")
        if np.any(dz < 0.0):
            raise DomainError("delta_z must be non-negative")
        order = np.argsort(dz, kind="stable")
        object.__setattr__(self, "delta_z", dz[order])
        object.__setattr__(self, "freq_shift", df[order])
        if self.kind == KIND_CASIMIR and self.applied_V is not None:
            raise DomainError("applied_V is only meaningful for electrostatic data")

    def __len__(self):
        return len(self.delta_z)

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.delta_z.tolist(), self.freq_shift.tolist()))


@dataclass(frozen=True)
class FitResult:
    """Damped-least-squares outcome.

    ``cost_history`` records the residual rms after every accepted step
    (starting value included), so it is non-increasing by construction.
    """

    parameters: dict[str, float]
    residual_rms: float
    converged: bool
    iterations: int
    cost_history: tuple[float, ...]
    at_bounds: tuple[str, ...] = ()
    covariance: np.ndarray | None = field(default=None, repr=False)


def electrostatic_shift_model(
    delta_z,
    z0: float,
    b: float,
    osc: TorsionalOscillator,
    radius_R: float,
    voltage_V: float,
    residual_V0: float,
    constants: PhysicalConstants = CODATA,
):
    """First-order resonance shift (Hz) from the electrostatic gradient."""
    gap = np.asarray(delta_z, dtype=float) + z0
    k = constants.epsilon0 * radius_R * (voltage_V - residual_V0) ** 2
    return -k * b**2 / (4.0 * osc.inertia_I * osc.omega0 * gap**2)


def casimir_shift_model(
    delta_z,
    z1: float,
    osc: TorsionalOscillator,
    radius_R: float,
    lever_b: float,
    constants: PhysicalConstants = CODATA,
):
    """First-order resonance shift (Hz) from the sphere-plate force gradient."""
    gap = np.asarray(delta_z, dtype=float) + z1
    k = lever_b**2 * math.pi**2 * constants.hbar * constants.c * radius_R
    return -k / (480.0 * osc.inertia_I * osc.omega0 * gap**4)


def fit_residual_voltage(points) -> float:
    """Vertex of the resonance-frequency-vs-voltage parabola.

    The frequency shift tracks -(V - V0)^2, so the residual voltage V0 sits
    at the maximum of a least-squares parabola through the (V, f) points.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DomainError("points must be (V, freq) pairs")
    volts = pts[:, 0]
    freqs = pts[:, 1]
    if len(np.unique(volts)) < 3:
        raise InsufficientDataError("need at least 3 distinct voltages")
    try:
        a, bb, _ = np.polyfit(volts, freqs, 2)
    except np.linalg.LinAlgError as exc:
        raise DegenerateDataError("voltage scan is rank-deficient") from exc
    # Curvature below numerical noise means the points are effectively
    # collinear: there is no vertex to report.
    span = float(np.ptp(volts))
    scale = max(float(np.max(np.abs(freqs))), 1e-300) / span**2
    if abs(a) < 1e-9 * scale:
        raise DegenerateDataError("no measurable curvature in the voltage scan")
    if a > 0.0:
        raise NotAMaximumError("parabola opens upward; expected a frequency maximum")
    return float(-bb / (2.0 * a))


def _levenberg_marquardt(residual_jacobian, p0, lower, upper):
    """Box-projected damped least squares with analytic Jacobians.

    residual_jacobian(p) -> (r, J). Returns (p, r, J, history, iterations,
    converged) where history holds the residual rms of every accepted state.
    """
    p = np.clip(np.asarray(p0, dtype=float), lower, upper)
    r, jac = residual_jacobian(p)
    cost = float(np.sqrt(np.mean(r * r)))
    history = [cost]
    lam = 1e-3
    converged = False
    iterations = 0
    for iterations in range(1, _MAX_ITERATIONS + 1):
        a = jac.T @ jac
        g = jac.T @ r
        damp = np.diag(np.maximum(np.diag(a), 1e-300))
        try:
            step = np.linalg.solve(a + lam * damp, -g)
        except np.linalg.LinAlgError:
            lam *= 10.0
            continue
        p_new = np.clip(p + step, lower, upper)
        r_new, jac_new = residual_jacobian(p_new)
        cost_new = float(np.sqrt(np.mean(r_new * r_new)))
        if np.isfinite(cost_new) and cost_new <= cost:
            rel = float(np.max(np.abs(p_new - p) / np.maximum(np.abs(p_new), 1e-300)))
            p, r, jac, cost = p_new, r_new, jac_new, cost_new
            history.append(cost)
            lam = max(lam / 3.0, 1e-14)
            if rel < _PARAM_TOL:
                converged = True
                break
        else:
            lam *= 2.5
            if lam > 1e15:
                break
    return p, r, jac, history, iterations, converged


def _finish_fit(names, p, r, jac, history, iterations, converged) -> FitResult:
    at_bounds = []
    for name, value in zip(names, p):
        lo, hi = BOUNDS[name]
        if value <= lo * (1.0 + 1e-12) or value >= hi * (1.0 - 1e-12):
            at_bounds.append(name)
    n, m = jac.shape
    covariance = None
    if n > m:
        ssr = float(np.dot(r, r))
        try:
            covariance = ssr / (n - m) * np.linalg.pinv(jac.T @ jac)
        except np.linalg.LinAlgError:
            covariance = None
    return FitResult(
        parameters={name: float(v) for name, v in zip(names, p)},
        residual_rms=history[-1],
        converged=converged,
        iterations=iterations,
        cost_history=tuple(history),
        at_bounds=tuple(at_bounds),
        covariance=covariance,
    )


def _multistart(residual_jacobian, names) -> FitResult:
    """Run the damped fit from a log-spaced grid of starts; keep the best.

    Candidates are compared in a fixed order: converged beats not, then
    lower residual rms, then the smaller gap offset (first parameter).
    """
    axes = [
        np.geomspace(BOUNDS[name][0], BOUNDS[name][1], _MULTISTART_PER_AXIS)
        for name in names
    ]
    lower = np.array([BOUNDS[name][0] for name in names])
    upper = np.array([BOUNDS[name][1] for name in names])
    grid = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=-1)
    best = None
    best_key = None
    for p0 in grid:
        p, r, jac, history, iterations, converged = _levenberg_marquardt(
            residual_jacobian, p0, lower, upper
        )
        key = (0 if converged else 1, history[-1], p[0])
        if best_key is None or key < best_key:
            best_key = key
            best = (p, r, jac, history, iterations, converged)
    if best is None:  # unreachable: the grid is never empty
        raise FitError("no fit candidates produced")
    return _finish_fit(names, *best)


def fit_electrostatic_geometry(
    dataset: ShiftDataset,
    osc: TorsionalOscillator,
    radius_R: float,
    voltage_V: float,
    residual_V0: float,
    constants: PhysicalConstants = CODATA,
) -> FitResult:
    """Recover (z0, b) from an electrostatic frequency-shift curve."""
    if dataset.kind != KIND_ELECTROSTATIC:
        raise DomainError("expected an electrostatic dataset")
    if voltage_V == residual_V0:
        raise DomainError("V equals V0: the electrostatic signal vanishes")
    if len(dataset) < 4:
        raise InsufficientDataError("two-parameter fit needs at least 4 points")
    if not radius_R > 0.0:
        raise DomainError("radius_R must be positive")
    dz = dataset.delta_z
    df = dataset.freq_shift
    k = constants.epsilon0 * radius_R * (voltage_V - residual_V0) ** 2
    k /= 4.0 * osc.inertia_I * osc.omega0

    def residual_jacobian(p):
        z0, b = p
        gap = dz + z0
        model = -k * b**2 / gap**2
        r = model - df
        jac = np.empty((len(dz), 2))
        jac[:, 0] = 2.0 * k * b**2 / gap**3
        jac[:, 1] = -2.0 * k * b / gap**2
        return r, jac

    return _multistart(residual_jacobian, ("z0_m", "b_m"))


def fit_casimir_offset(
    dataset: ShiftDataset,
    osc: TorsionalOscillator,
    radius_R: float,
    lever_b: float,
    constants: PhysicalConstants = CODATA,
) -> FitResult:
    """Recover the closest-approach offset z1 with the lever arm held fixed."""
    if dataset.kind != KIND_CASIMIR:
        raise DomainError("expected a casimir dataset")
    if len(dataset) < 2:
        raise InsufficientDataError("offset fit needs at least 2 points")
    if not radius_R > 0.0 or not lever_b > 0.0:
        raise DomainError("radius_R and lever_b must be positive")
    dz = dataset.delta_z
    df = dataset.freq_shift
    k = lever_b**2 * math.pi**2 * constants.hbar * constants.c * radius_R
    k /= 480.0 * osc.inertia_I * osc.omega0

    def residual_jacobian(p):
        (z1,) = p
        gap = dz + z1
        model = -k / gap**4
        r = model - df
        jac = (4.0 * k / gap**5).reshape(-1, 1)
        return r, jac

    return _multistart(residual_jacobian, ("z1_m",))


def synthesize_shift_dataset(
    kind: str,
    osc: TorsionalOscillator,
    radius_R: float,
    delta_z,
    *,
    z0: float | None = None,
    lever_b: float | None = None,
    voltage_V: float | None = None,
    residual_V0: float = 0.0,
    z1: float | None = None,
    noise_sigma: float = 0.0,
    seed: int | None = None,
    constants: PhysicalConstants = CODATA,
) -> ShiftDataset:
    """Evaluate a shift model on a grid, optionally with Gaussian noise.

    Deterministic for a fixed seed; noise_sigma=0 gives exact model points.
    """
    dz = np.asarray(delta_z, dtype=float)
    if noise_sigma < 0.0:
        raise DomainError("noise_sigma must be non-negative")
    if kind == KIND_ELECTROSTATIC:
        if z0 is None or lever_b is None or voltage_V is None:
            raise DomainError("electrostatic synthesis needs z0, lever_b, voltage_V")
        if voltage_V == residual_V0:
            raise DomainError("V equals V0: the electrostatic signal vanishes")
        shifts = electrostatic_shift_model(
            dz, z0, lever_b, osc, radius_R, voltage_V, residual_V0, constants
        )
        applied = voltage_V
    elif kind == KIND_CASIMIR:
        if z1 is None or lever_b is None:
            raise DomainError("casimir synthesis needs z1 and lever_b")
        shifts = casimir_shift_model(dz, z1, osc, radius_R, lever_b, constants)
        applied = None
    else:
        raise DomainError(f"unknown dataset kind {kind!r}")
    if noise_sigma > 0.0:
        rng = np.random.default_rng(seed)
        shifts = shifts + rng.normal(0.0, noise_sigma, size=dz.shape)
    return ShiftDataset(
        kind=kind,
        delta_z=dz,
        freq_shift=shifts,
        applied_V=applied,
        noise_sigma=noise_sigma if noise_sigma > 0.0 else None,
    )
