"""Driven torsional oscillator in the cubic-Taylor (Duffing-like) regime.

The sphere force F acting at lever arm b, expanded about the working gap z
to third order in the angle, turns the linear oscillator into

    theta'' + 2*gamma*theta' + omega1^2*theta + alpha*theta^2 + beta*theta^3
        = (tau/I) cos(omega t)

with

    omega1 = omega0 * (1 - b^2 F'(z) / (2 I omega0^2))      (first order)
    alpha  =  b^3 F''(z) / (2 I)
    beta   = -b^4 F'''(z) / (6 I)

and the single nonlinearity parameter

    kappa = 3*beta/(8*omega1) - 5*alpha^2/(12*omega1^3).

The steady-state amplitude A at drive frequency omega solves

    A^2 * [ (omega - omega1 - kappa A^2)^2 + lam^2 ] = tau^2 / (4 I^2 omega1^2)

a cubic in A^2 with one or three positive roots; with three, the middle
amplitude is dynamically unstable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, InstabilityError
from .forces import SpherePlateGeometry

BRANCH_SINGLE = "single"
BRANCH_LOWER = "lower"
BRANCH_UPPER = "upper"

_FREQUENCY_MODELS = ("linear", "exact")


@dataclass(frozen=True)
class TorsionalOscillator:
    """Modal parameters of the torsional mode.

    ``omega0 = sqrt(spring_k/inertia_I)`` and ``gamma = omega0/(2*quality_Q)``
    are stored redundantly and validated to 1e-9 relative. ``quality_Q`` may
    be ``math.inf`` (gamma = 0) for undamped test scenarios.
    """

    spring_k: float  # N*m/rad
    inertia_I: float  # kg*m^2
    omega0: float  # rad/s
    gamma: float  # 1/s
    quality_Q: float

    def __post_init__(self) -> None:
        for name in ("spring_k", "inertia_I", "omega0", "quality_Q"):
            if not getattr(self, name) > 0.0:
                raise DomainError(f"{name} must be strictly positive")
        if self.gamma < 0.0:
            raise DomainError("gamma must be non-negative")
        w = math.sqrt(self.spring_k / self.inertia_I)
        if abs(self.omega0 - w) > 1e-9 * w:
            raise DomainError(
                f"omega0={self.omega0!r} inconsistent with sqrt(spring_k/inertia_I)={w!r}"
            )
        g = self.omega0 / (2.0 * self.quality_Q)
        if abs(self.gamma - g) > 1e-9 * self.omega0:
            raise DomainError(
                f"gamma={self.gamma!r} inconsistent with omega0/(2*quality_Q)={g!r}"
            )
        if not self.gamma < self.omega0:
            raise DomainError("oscillator must be underdamped (gamma < omega0)")

    @classmethod
    def from_frequency(cls, f0: float, inertia_I: float, quality_Q: float) -> "TorsionalOscillator":
        """Build from the measured resonance frequency f0 in Hz."""
        if not f0 > 0.0:
            raise DomainError("f0 must be strictly positive")
        omega0 = 2.0 * math.pi * f0
        return cls(
            spring_k=inertia_I * omega0 * omega0,
            inertia_I=inertia_I,
            omega0=omega0,
            gamma=omega0 / (2.0 * quality_Q),
            quality_Q=quality_Q,
        )

    @classmethod
    def from_stiffness(cls, spring_k: float, inertia_I: float, quality_Q: float) -> "TorsionalOscillator":
        if not (spring_k > 0.0 and inertia_I > 0.0):
            raise DomainError("spring_k and inertia_I must be strictly positive")
        omega0 = math.sqrt(spring_k / inertia_I)
        return cls(
            spring_k=spring_k,
            inertia_I=inertia_I,
            omega0=omega0,
            gamma=omega0 / (2.0 * quality_Q),
            quality_Q=quality_Q,
        )


@dataclass(frozen=True)
class DriveConfig:
    """Harmonic torque drive tau*cos(omega*t)."""

    torque_tau: float  # N*m
    omega: float  # rad/s

    def __post_init__(self) -> None:
        if self.torque_tau < 0.0:
            raise DomainError("torque_tau must be non-negative")
        if not self.omega > 0.0:
            raise DomainError("omega must be strictly positive")


@dataclass(frozen=True)
class TaylorCoefficients:
    """Expansion coefficients of the sphere force at a working gap."""

    omega1: float  # rad/s
    alpha: float  # rad^-1 s^-2
    beta: float  # rad^-2 s^-2
    kappa: float  # rad^-2 s^-1
    source_z: float  # m

    def __post_init__(self) -> None:
        if not self.omega1 > 0.0:
            raise DomainError("omega1 must be strictly positive")
        k = 3.0 * self.beta / (8.0 * self.omega1) - 5.0 * self.alpha**2 / (12.0 * self.omega1**3)
        scale = max(abs(k), abs(self.kappa), 1e-300)
        if abs(self.kappa - k) > 1e-12 * scale:
            raise DomainError("kappa inconsistent with alpha, beta, omega1")


class ShiftedFrequency(NamedTuple):
    """First-order shifted frequency plus the exact eigenfrequency."""

    omega1: float
    omega_exact: float


@dataclass(frozen=True)
class AmplitudeRoot:
    amplitude_A: float  # rad
    stable: bool


@dataclass(frozen=True)
class AmplitudeSolution:
    """Positive steady-state amplitudes at one drive frequency, ascending."""

    roots: tuple[AmplitudeRoot, ...]
    omega: float
    near_degenerate: bool = False

    @property
    def stable_amplitudes(self) -> tuple[float, ...]:
        return tuple(r.amplitude_A for r in self.roots if r.stable)


@dataclass(frozen=True)
class ResponseCurve:
    """Branch-followed swept response (one amplitude per grid frequency)."""

    omega: np.ndarray  # traversal order
    amplitude_rad: np.ndarray
    n_roots: np.ndarray
    branch: tuple[str, ...]
    direction: str


def _effective_stiffness_ratio(osc: TorsionalOscillator, lever_b: float, force_gradient: float) -> float:
    return lever_b * lever_b * force_gradient / (osc.inertia_I * osc.omega0 * osc.omega0)


def linearized_shift(
    osc: TorsionalOscillator, lever_b: float, force_gradient: float
) -> ShiftedFrequency:
    """Resonance frequency under a force gradient at lever arm b.

    Returns the first-order value omega0*(1 - b^2 F'/(2 I omega0^2)) together
    with the exact eigenfrequency sqrt(omega0^2 - b^2 F'/I) of the linearized
    equation of motion; positive F' always lowers both.
    """
    if not lever_b > 0.0:
        raise DomainError("lever_b must be strictly positive")
    r = _effective_stiffness_ratio(osc, lever_b, force_gradient)
    if r >= 1.0:
        raise InstabilityError(
            f"force gradient {force_gradient!r} N/m cancels the restoring stiffness "
            f"(b^2 F'/(I omega0^2) = {r:.6g} >= 1); plate pulls in"
        )
    if r <= -1.0:
        raise DomainError(
            f"force gradient ratio {r:.6g} outside the perturbative regime (|ratio| < 1)"
        )
    omega1 = osc.omega0 * (1.0 - 0.5 * r)
    omega_exact = osc.omega0 * math.sqrt(1.0 - r)
    return ShiftedFrequency(omega1=omega1, omega_exact=omega_exact)


def taylor_coefficients(
    osc: TorsionalOscillator,
    geom: SpherePlateGeometry,
    force_law,
    z: float,
    frequency_model: str = "linear",
) -> TaylorCoefficients:
    """Expansion coefficients of a force law at gap z.

    ``frequency_model`` selects how omega1 is formed from the force
    gradient: "linear" is the first-order expression; "exact" uses the
    full eigenvalue sqrt(omega0^2 - b^2 F'/I), which matters once the
    relative shift is no longer tiny.
    """
    if frequency_model not in _FREQUENCY_MODELS:
        raise DomainError(f"frequency_model must be one of {_FREQUENCY_MODELS}")
    geom.validate_gap(z)
    b = geom.lever_b
    I = osc.inertia_I
    f1 = force_law.derivative(z, 1)
    f2 = force_law.derivative(z, 2)
    f3 = force_law.derivative(z, 3)
    shifted = linearized_shift(osc, b, f1)
    omega1 = shifted.omega1 if frequency_model == "linear" else shifted.omega_exact
    alpha = b**3 * f2 / (2.0 * I)
    beta = -(b**4) * f3 / (6.0 * I)
    kappa = 3.0 * beta / (8.0 * omega1) - 5.0 * alpha**2 / (12.0 * omega1**3)
    return TaylorCoefficients(omega1=omega1, alpha=alpha, beta=beta, kappa=kappa, source_z=z)


def _cubic_positive_roots(kappa: float, detuning: float, lam: float, P: float) -> list[float]:
    """Positive real roots Y of kappa^2 Y^3 - 2 kappa D Y^2 + (D^2+lam^2) Y - P.

    Closed-form (trigonometric/Cardano by discriminant) with two Newton
    polish steps per root.
    """
    if kappa == 0.0 or P == 0.0:
        return [P / (detuning * detuning + lam * lam)]

    a3 = kappa * kappa
    b2 = -2.0 * kappa * detuning / a3
    b1 = (detuning * detuning + lam * lam) / a3
    b0 = -P / a3
    p = b1 - b2 * b2 / 3.0
    q = 2.0 * b2**3 / 27.0 - b2 * b1 / 3.0 + b0
    shift = -b2 / 3.0
    disc = -4.0 * p**3 - 27.0 * q * q

    roots: list[float]
    if disc > 0.0:
        # three real roots
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * m)
        arg = min(1.0, max(-1.0, arg))
        theta = math.acos(arg)
        roots = [shift + m * math.cos((theta - 2.0 * math.pi * k) / 3.0) for k in range(3)]
    else:
        if p == 0.0 and q == 0.0:
            roots = [shift]
        else:
            s = math.sqrt(max(q * q / 4.0 + p**3 / 27.0, 0.0))
            u = math.copysign(abs(-q / 2.0 + s) ** (1.0 / 3.0), -q / 2.0 + s)
            v = math.copysign(abs(-q / 2.0 - s) ** (1.0 / 3.0), -q / 2.0 - s)
            roots = [shift + u + v]

    c2, c1, c0 = b2, b1, b0
    polished = []
    for y0 in roots:
        y = y0
        for _ in range(2):
            f = ((y + c2) * y + c1) * y + c0
            df = (3.0 * y + 2.0 * c2) * y + c1
            if df != 0.0:
                y -= f / df
        if y > 0.0:
            polished.append(y)
    # The sign structure of the physical cubic admits 1 or 3 positive
    # roots; if polishing flipped a near-zero root across the axis, fall
    # back to the unpolished values, which respect that structure.
    if len(polished) not in (1, 3):
        polished = [y for y in roots if y > 0.0]
    return sorted(polished)


def steady_state_amplitudes(
    coeffs: TaylorCoefficients, osc: TorsionalOscillator, drive: DriveConfig
) -> AmplitudeSolution:
    """All positive steady-state amplitudes at the drive frequency.

    With three roots the smallest and largest amplitudes are stable and the
    middle one is not. Near-coincident root pairs set ``near_degenerate``.
    """
    lam = osc.gamma
    if not lam > 0.0:
        raise DomainError("steady state requires positive damping (gamma > 0)")
    w1 = coeffs.omega1
    P = drive.torque_tau**2 / (4.0 * osc.inertia_I**2 * w1 * w1)
    detuning = drive.omega - w1
    ys = _cubic_positive_roots(coeffs.kappa, detuning, lam, P)
    amps = [math.sqrt(y) for y in ys]
    near = any(
        abs(amps[i + 1] - amps[i]) < 1e-6 * max(amps[i + 1], 1e-300)
        for i in range(len(amps) - 1)
    )
    if len(amps) == 3:
        stab = (True, False, True)
    else:
        stab = tuple(True for _ in amps)
    roots = tuple(AmplitudeRoot(a, s) for a, s in zip(amps, stab))
    return AmplitudeSolution(roots=roots, omega=drive.omega, near_degenerate=near)


def _root_count(coeffs: TaylorCoefficients, osc: TorsionalOscillator, tau: float, omega: float) -> int:
    sol = steady_state_amplitudes(coeffs, osc, DriveConfig(torque_tau=tau, omega=omega))
    return len(sol.roots)


def hysteresis_window(
    coeffs: TaylorCoefficients, osc: TorsionalOscillator, tau: float
) -> tuple[float, float] | None:
    """Endpoints of the triple-root drive-frequency interval, if any.

    Found by scanning for a root-count change and bisecting each edge;
    returns None when the response is single-valued at all frequencies.
    """
    if coeffs.kappa == 0.0 or tau == 0.0:
        return None
    lam = osc.gamma
    w1 = coeffs.omega1
    a_max_sq = tau**2 / (4.0 * osc.inertia_I**2 * w1 * w1) / (lam * lam)
    span = 1.6 * abs(coeffs.kappa) * a_max_sq + 8.0 * lam
    for _ in range(4):
        grid = np.linspace(max(w1 - span, 1e-12), w1 + span, 4001)
        counts = np.array([_root_count(coeffs, osc, tau, float(w)) for w in grid])
        inside = np.where(counts == 3)[0]
        if len(inside) == 0:
            return None
        if inside[0] > 0 and inside[-1] < len(grid) - 1:
            break
        span *= 2.5  # window touched the scan boundary; widen and rescan
    else:
        raise DomainError("triple-root interval did not close within the scanned span")

    def bisect(lo: float, hi: float, want_inside_hi: bool) -> float:
        # invariant: root count differs between lo and hi
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if (_root_count(coeffs, osc, tau, mid) == 3) == want_inside_hi:
                hi = mid
            else:
                lo = mid
            if hi - lo <= 1e-9 * max(1.0, abs(mid)):
                break
        return 0.5 * (lo + hi)

    lo_edge = bisect(float(grid[inside[0] - 1]), float(grid[inside[0]]), True)
    hi_edge = bisect(float(grid[inside[-1]]), float(grid[inside[-1] + 1]), False)
    return (lo_edge, hi_edge)


def response_curve(
    coeffs: TaylorCoefficients,
    osc: TorsionalOscillator,
    tau: float,
    omega_grid,
    direction: str,
) -> ResponseCurve:
    """Hysteretic branch-following over a monotone frequency grid.

    At each frequency the stable root continuously connected to the
    previous amplitude is kept; when that branch disappears the response
    jumps to the remaining stable root. The starting branch is selected by
    walking in from far outside the swept interval on the approach side.
    """
    if direction not in ("up", "down"):
        raise DomainError("direction must be 'up' or 'down'")
    grid = np.asarray(omega_grid, dtype=float)
    if grid.ndim != 1 or len(grid) == 0:
        raise DomainError("omega_grid must be a non-empty 1-D sequence")
    d = np.diff(grid)
    if len(d) and not (np.all(d > 0.0) or np.all(d < 0.0)):
        raise DomainError("omega_grid must be strictly monotone")
    grid = np.sort(grid)
    if direction == "down":
        grid = grid[::-1]

    lam = osc.gamma
    w1 = coeffs.omega1
    a_max_sq = tau**2 / (4.0 * osc.inertia_I**2 * w1 * w1) / max(lam * lam, 1e-300)
    reach = 40.0 * lam + 2.0 * abs(coeffs.kappa) * a_max_sq
    start = grid[0] - reach if direction == "up" else grid[0] + reach
    prev = None
    for w in np.linspace(start, grid[0], 257)[:-1]:
        if w <= 0.0:
            continue
        sol = steady_state_amplitudes(coeffs, osc, DriveConfig(torque_tau=tau, omega=float(w)))
        stable = sol.stable_amplitudes
        prev = stable[0] if prev is None else min(stable, key=lambda a: abs(a - prev))

    amps = np.empty(len(grid))
    nroots = np.empty(len(grid), dtype=int)
    branches = []
    for i, w in enumerate(grid):
        sol = steady_state_amplitudes(coeffs, osc, DriveConfig(torque_tau=tau, omega=float(w)))
        stable = sol.stable_amplitudes
        pick = stable[0] if prev is None else min(stable, key=lambda a: abs(a - prev))
        prev = pick
        amps[i] = pick
        nroots[i] = len(sol.roots)
        if len(sol.roots) == 1:
            branches.append(BRANCH_SINGLE)
        else:
            branches.append(BRANCH_UPPER if pick == max(stable) else BRANCH_LOWER)
    return ResponseCurve(
        omega=grid,
        amplitude_rad=amps,
        n_roots=nroots,
        branch=tuple(branches),
        direction=direction,
    )
