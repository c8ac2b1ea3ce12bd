"""Time-domain integration of the full (untruncated) equation of motion.

The oscillation coordinate theta is measured about the sphere-loaded static
equilibrium at the working gap z, so the sphere torque enters as

    I theta'' + 2 I gamma theta' + k theta
        = tau cos(omega t) - b [ F(z - b theta) - F(z) ]

with the full force law F, not its cubic Taylor truncation. Quasi-static
frequency and distance sweeps carry the oscillator state (and the drive
phase) from setpoint to setpoint; that carried state is exactly what makes
the measured response history-dependent.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from . import _integrator as _core
from .errors import (
    DomainError,
    InsufficientDataError,
    PullInError,
    StiffnessError,
)
from .forces import SpherePlateGeometry, CasimirSpherePlateLaw, ElectrostaticSphereLaw
from .resonance import DriveConfig, TorsionalOscillator

#: Defaults for the adaptive integrator.
DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-14  # rad; velocity tolerance is this times omega0

#: Gap below which the run is declared pulled-in (model invalid at contact).
CONTACT_GAP = 1e-9

#: Minimum recorded samples per drive period.
MIN_SAMPLES_PER_PERIOD = 64

#: Two consecutive lock-in windows must agree to this relative level.
CONVERGENCE_LEVEL = 2e-3


def _cap_threads() -> None:
    raw = os.environ.get("CASIMIR_MEMS_THREADS")
    if not raw:
        return
    try:
        cap = max(1, int(raw))
    except ValueError:
        return
    try:
        import numba

        numba.set_num_threads(min(numba.get_num_threads(), cap))
    except Exception:
        pass


_cap_threads()


@dataclass(frozen=True)
class OscillatorState:
    """Instantaneous oscillator state (angle about loaded equilibrium)."""

    theta: float = 0.0
    theta_dot: float = 0.0
    time: float = 0.0

    def __post_init__(self) -> None:
        for name in ("theta", "theta_dot", "time"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled integration output."""

    times: np.ndarray
    theta: np.ndarray
    theta_dot: np.ndarray
    final_state: OscillatorState


@dataclass(frozen=True)
class SweepProtocol:
    """Quasi-static sweep schedule.

    ``setpoints`` are drive frequencies (rad/s) for kind="frequency" or
    working gaps (m) for kind="distance" and must be monotone.
    ``fixed_value`` holds the working gap for frequency sweeps (the fixed
    drive frequency of a distance sweep is passed to swept_distance
    directly). ``settle_cycles`` must allow the transient to die out:
    at least 10*Q/pi drive periods.
    """

    kind: str
    setpoints: tuple[float, ...]
    settle_cycles: int
    measure_cycles: int = 64
    fixed_value: float | None = None
    samples_per_period: int = MIN_SAMPLES_PER_PERIOD

    def __post_init__(self) -> None:
        if self.kind not in ("frequency", "distance"):
            raise DomainError("kind must be 'frequency' or 'distance'")
        pts = np.asarray(self.setpoints, dtype=float)
        if pts.ndim != 1 or len(pts) == 0:
            raise DomainError("setpoints must be a non-empty 1-D sequence")
        if np.any(pts <= 0.0):
            raise DomainError("setpoints must be strictly positive")
        d = np.diff(pts)
        if len(d) and not (np.all(d > 0.0) or np.all(d < 0.0)):
            raise DomainError("setpoints must be monotone")
        if self.settle_cycles < 0 or self.measure_cycles < 2:
            raise DomainError("settle_cycles must be >= 0 and measure_cycles >= 2")
        if self.samples_per_period < MIN_SAMPLES_PER_PERIOD:
            raise DomainError(f"samples_per_period must be >= {MIN_SAMPLES_PER_PERIOD}")

    @classmethod
    def for_oscillator(
        cls,
        kind: str,
        setpoints,
        osc: TorsionalOscillator,
        fixed_value: float | None = None,
        measure_cycles: int = 64,
    ) -> "SweepProtocol":
        """Protocol with the default settling budget of 8*Q drive periods."""
        return cls(
            kind=kind,
            setpoints=tuple(float(s) for s in setpoints),
            settle_cycles=math.ceil(8.0 * osc.quality_Q),
            measure_cycles=measure_cycles,
            fixed_value=fixed_value,
        )


@dataclass(frozen=True)
class SweepResult:
    """Per-setpoint steady-state readings plus the carried end state."""

    kind: str
    direction: str
    setpoints: np.ndarray
    amplitude_rad: np.ndarray
    phase_rad: np.ndarray
    converged: np.ndarray  # bool per setpoint
    fixed_value: float | None
    final_state: OscillatorState
    final_drive_phase: float


def _min_settle_cycles(osc: TorsionalOscillator) -> int:
    if not osc.gamma > 0.0:
        raise DomainError("sweeps require positive damping (finite quality_Q)")
    return math.ceil(10.0 * osc.quality_Q / math.pi)


def _working_gap(geom: SpherePlateGeometry, force_law, z: float | None) -> float:
    if z is not None:
        return geom.validate_gap(z)
    if isinstance(force_law, ElectrostaticSphereLaw):
        return geom.electrostatic_gap()
    if isinstance(force_law, CasimirSpherePlateLaw):
        return geom.casimir_gap()
    return 1.0  # no sphere force; gap is irrelevant


def _law_params(force_law, z: float) -> tuple[float, float, float]:
    c1, c3 = force_law.power_terms()
    f_static = -(c1 / z + c3 / z**3) if (c1 != 0.0 or c3 != 0.0) else 0.0
    return c1, c3, f_static


def _raise_for_status(status: int, time_abs: float, context: str) -> None:
    if status == _core.STATUS_PULL_IN:
        raise PullInError(
            f"gap closed below {CONTACT_GAP:.1e} m at t={time_abs:.9e} s ({context})",
            time=time_abs,
        )
    if status == _core.STATUS_STEP_UNDERFLOW:
        raise StiffnessError(f"step size underflow at t={time_abs:.9e} s ({context})")


def integrate(
    osc: TorsionalOscillator,
    geom: SpherePlateGeometry,
    force_law,
    drive: DriveConfig,
    initial: OscillatorState | None = None,
    duration: float = 0.0,
    z: float | None = None,
    samples_per_period: int = MIN_SAMPLES_PER_PERIOD,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> Trajectory:
    """Integrate the full equation of motion for ``duration`` seconds.

    The trajectory is sampled uniformly at ``samples_per_period`` points per
    drive period (>= 64); samples are exact integrator states. The working
    gap defaults to the geometry's offset sum for the given law.
    """
    if initial is None:
        initial = OscillatorState()
    if not duration > 0.0:
        raise DomainError("duration must be strictly positive")
    if samples_per_period < MIN_SAMPLES_PER_PERIOD:
        raise DomainError(f"samples_per_period must be >= {MIN_SAMPLES_PER_PERIOD}")
    gap = _working_gap(geom, force_law, z)
    c1, c3, f_static = _law_params(force_law, gap)
    if (c1 != 0.0 or c3 != 0.0) and gap - geom.lever_b * initial.theta <= CONTACT_GAP:
        raise DomainError("initial state already violates the contact gap")

    period = 2.0 * math.pi / drive.omega
    dt = period / samples_per_period
    n_samples = int(math.floor(duration / dt)) + 1
    theta = np.empty(n_samples)
    thdot = np.empty(n_samples)
    phi0 = math.fmod(drive.omega * initial.time, 2.0 * math.pi)

    status, th, w, t_loc, filled = _core._run_trajectory(
        initial.theta,
        initial.theta_dot,
        phi0,
        drive.omega,
        dt,
        n_samples,
        theta,
        thdot,
        rtol,
        atol,
        atol * osc.omega0,
        osc.omega0**2,
        2.0 * osc.gamma,
        drive.torque_tau / osc.inertia_I,
        geom.lever_b / osc.inertia_I,
        geom.lever_b,
        gap,
        c1,
        c3,
        f_static,
        CONTACT_GAP,
        period,
    )
    _raise_for_status(status, initial.time + t_loc, f"integrate at gap {gap:.4e} m")
    times = initial.time + dt * np.arange(n_samples)
    final = OscillatorState(theta=float(th), theta_dot=float(w), time=float(initial.time + t_loc))
    return Trajectory(times=times, theta=theta, theta_dot=thdot, final_state=final)


def extract_steady_amplitude(
    times: np.ndarray, theta: np.ndarray, omega: float
) -> tuple[float, float, bool]:
    """Lock-in style amplitude/phase of theta at the drive frequency.

    Projects onto cos/sin(omega*t) over an integer number of periods of a
    uniformly sampled segment (sampling must be period-commensurate, as
    produced by :func:`integrate`). The segment is split into two halves;
    the reading comes from the later half and ``converged`` reports whether
    the halves agree to 0.2%.
    """
    times = np.asarray(times, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if times.ndim != 1 or times.shape != theta.shape or len(times) < 3:
        raise InsufficientDataError("need matching 1-D times/theta with at least 3 samples")
    if not omega > 0.0:
        raise DomainError("omega must be strictly positive")
    dt = np.diff(times)
    if np.max(np.abs(dt - dt[0])) > 1e-9 * dt[0]:
        raise InsufficientDataError("samples must be uniformly spaced")
    dt = float(dt[0])
    period = 2.0 * math.pi / omega
    spp = period / dt
    spp_i = round(spp)
    if spp_i < 2 or abs(spp - spp_i) > 1e-6 * spp:
        raise InsufficientDataError(
            "sampling must be commensurate with the drive period (integer samples per period)"
        )
    total_periods = (len(times) - 1) // spp_i
    half_periods = total_periods // 2
    if half_periods < 1:
        raise InsufficientDataError(
            f"segment spans {total_periods} whole periods; need at least 2"
        )

    n = half_periods * spp_i

    def project(sl: slice) -> tuple[float, float]:
        t = times[sl]
        th = theta[sl]
        c = np.cos(omega * t)
        s = np.sin(omega * t)
        ac = 2.0 / n * float(np.dot(th, c))
        as_ = 2.0 / n * float(np.dot(th, s))
        return math.hypot(ac, as_), math.atan2(-as_, ac)

    a1, _ = project(slice(len(times) - 2 * n, len(times) - n))
    a2, phase = project(slice(len(times) - n, len(times)))
    converged = abs(a2 - a1) <= CONVERGENCE_LEVEL * max(abs(a2), 1e-300)
    return a2, phase, converged


def _run_sweep(
    osc: TorsionalOscillator,
    geom: SpherePlateGeometry,
    force_law,
    tau: float,
    protocol: SweepProtocol,
    omegas: np.ndarray,
    gaps: np.ndarray,
    direction: str,
    initial: OscillatorState,
    initial_drive_phase: float,
    rtol: float,
    atol: float,
) -> SweepResult:
    min_settle = _min_settle_cycles(osc)
    if protocol.settle_cycles < min_settle:
        raise DomainError(
            f"settle_cycles={protocol.settle_cycles} below the minimum {min_settle} "
            f"(10*Q/pi) needed for transients to decay"
        )
    if tau < 0.0:
        raise DomainError("tau must be non-negative")

    spp = protocol.samples_per_period
    window_periods = max(1, protocol.measure_cycles // 2)
    n_windows = 2
    amp_w = np.empty(n_windows)
    ph_w = np.empty(n_windows)

    n = len(omegas)
    amps = np.empty(n)
    phases = np.empty(n)
    conv = np.empty(n, dtype=bool)
    th = initial.theta
    w = initial.theta_dot
    t_abs = initial.time
    phi0 = initial_drive_phase

    for i in range(n):
        om = float(omegas[i])
        gap = float(gaps[i])
        c1, c3, f_static = _law_params(force_law, gap)
        status, th, w, t_loc = _core._run_settle_measure(
            th,
            w,
            phi0,
            om,
            protocol.settle_cycles,
            window_periods,
            n_windows,
            spp,
            amp_w,
            ph_w,
            rtol,
            atol,
            atol * osc.omega0,
            osc.omega0**2,
            2.0 * osc.gamma,
            tau / osc.inertia_I,
            geom.lever_b / osc.inertia_I,
            geom.lever_b,
            gap,
            c1,
            c3,
            f_static,
            CONTACT_GAP,
        )
        setpoint = (
            f"setpoint {i}: omega={om:.6e} rad/s, gap={gap:.4e} m"
        )
        _raise_for_status(status, t_abs + t_loc, setpoint)
        amps[i] = amp_w[-1]
        phases[i] = ph_w[-1]
        conv[i] = abs(amp_w[-1] - amp_w[-2]) <= CONVERGENCE_LEVEL * max(abs(amp_w[-1]), 1e-300)
        t_abs += t_loc
        phi0 = math.fmod(phi0 + om * t_loc, 2.0 * math.pi)

    final = OscillatorState(theta=float(th), theta_dot=float(w), time=float(t_abs))
    setvals = omegas if protocol.kind == "frequency" else gaps
    return SweepResult(
        kind=protocol.kind,
        direction=direction,
        setpoints=np.array(setvals, dtype=float),
        amplitude_rad=amps,
        phase_rad=phases,
        converged=conv,
        fixed_value=protocol.fixed_value,
        final_state=final,
        final_drive_phase=phi0,
    )


def swept_frequency(
    osc: TorsionalOscillator,
    geom: SpherePlateGeometry,
    force_law,
    tau: float,
    protocol: SweepProtocol,
    initial: OscillatorState | None = None,
    initial_drive_phase: float = 0.0,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> SweepResult:
    """Steady amplitudes along a monotone drive-frequency schedule.

    The working gap is ``protocol.fixed_value`` (meters). State is carried
    across setpoints, so up and down schedules can disagree where the
    response is multivalued.
    """
    if protocol.kind != "frequency":
        raise DomainError("swept_frequency needs a frequency-kind protocol")
    gap = _working_gap(geom, force_law, protocol.fixed_value)
    omegas = np.asarray(protocol.setpoints, dtype=float)
    gaps = np.full_like(omegas, gap)
    direction = "up" if (len(omegas) < 2 or omegas[-1] > omegas[0]) else "down"
    if initial is None:
        initial = OscillatorState()
    return _run_sweep(
        osc, geom, force_law, tau, protocol, omegas, gaps, direction,
        initial, initial_drive_phase, rtol, atol,
    )


def swept_distance(
    osc: TorsionalOscillator,
    geom: SpherePlateGeometry,
    force_law,
    tau: float,
    omega_fixed: float,
    protocol: SweepProtocol,
    initial: OscillatorState | None = None,
    initial_drive_phase: float = 0.0,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> SweepResult:
    """Steady amplitudes along a monotone working-gap schedule.

    Approach (decreasing gap) and retract (increasing gap) histories are
    produced by running this twice, chaining the second call from the first
    call's ``final_state`` and ``final_drive_phase``.
    """
    if protocol.kind != "distance":
        raise DomainError("swept_distance needs a distance-kind protocol")
    if not omega_fixed > 0.0:
        raise DomainError("omega_fixed must be strictly positive")
    gaps = np.asarray(protocol.setpoints, dtype=float)
    for gap in gaps:
        geom.validate_gap(float(gap))
    omegas = np.full_like(gaps, omega_fixed)
    direction = "approach" if (len(gaps) < 2 or gaps[-1] < gaps[0]) else "retract"
    if initial is None:
        initial = OscillatorState()
    return _run_sweep(
        osc, geom, force_law, tau, protocol, omegas, gaps, direction,
        initial, initial_drive_phase, rtol, atol,
    )
