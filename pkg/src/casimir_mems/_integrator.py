"""Compiled adaptive Dormand-Prince 5(4) core for the equation of motion.

State is (theta, theta_dot) about the sphere-loaded equilibrium at working
gap z; the instantaneous gap is z - b*theta and the sphere torque is the
static-subtracted -b*(F(z - b*theta) - F(z)) with F(g) = -(c1/g + c3/g^3).

Steps are capped at the next uniform sample time so recorded samples are
exact integrator states (no dense-output interpolation).
"""
from __future__ import annotations

import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_PULL_IN = 1
STATUS_STEP_UNDERFLOW = 2

# Dormand-Prince 5(4) tableau (FSAL).
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)


@njit(cache=True)
def _accel(t, th, w, w0sq, twog, tauI, om, phi0, bI, b, z, c1, c3, f_static):
    if c1 != 0.0 or c3 != 0.0:
        g = z - b * th
        if g <= 0.0:
            return np.nan
        force = -(c1 / g + c3 / (g * g * g))
    else:
        force = 0.0
    return tauI * np.cos(om * t + phi0) - w0sq * th - twog * w - bI * (force - f_static)


@njit(cache=True)
def _advance(
    th,
    w,
    t,
    t_target,
    h,
    rtol,
    atol_th,
    atol_w,
    w0sq,
    twog,
    tauI,
    om,
    phi0,
    bI,
    b,
    z,
    c1,
    c3,
    f_static,
    gap_min,
    h_max,
):
    """Integrate from t to exactly t_target. Returns (status, th, w, h, t)."""
    has_gap = c1 != 0.0 or c3 != 0.0
    if t_target - t <= 1e-14 * max(abs(t_target), 1e-30):
        return STATUS_OK, th, w, h, t_target
    k1_th = w
    k1_w = _accel(t, th, w, w0sq, twog, tauI, om, phi0, bI, b, z, c1, c3, f_static)
    while t < t_target:
        if h > h_max:
            h = h_max
        hit_target = False
        if t + h >= t_target:
            h = t_target - t
            hit_target = True
        if h <= 1e-16 * max(abs(t), 1e-12):
            return STATUS_STEP_UNDERFLOW, th, w, h, t

        y2t = th + h * _A21 * k1_th
        y2w = w + h * _A21 * k1_w
        k2_th = y2w
        k2_w = _accel(t + _C2 * h, y2t, y2w, w0sq, twog, tauI, om, phi0, bI, b, z, c1, c3, f_static)

        y3t = th + h * (_A31 * k1_th + _A32 * k2_th)
        y3w = w + h * (_A31 * k1_w + _A32 * k2_w)
        k3_th = y3w
        k3_w = _accel(t + _C3 * h, y3t, y3w, w0sq, twog, tauI, om, phi0, bI, b, z, c1, c3, f_static)

        y4t = th + h * (_A41 * k1_th + _A42 * k2_th + _A43 * k3_th)
        y4w = w + h * (_A41 * k1_w + _A42 * k2_w + _A43 * k3_w)
        k4_th = y4w
        k4_w = _accel(t + _C4 * h, y4t, y4w, w0sq, twog, tauI, om, phi0, bI, b, z, c1, c3, f_static)

        y5t = th + h * (_A51 * k1_th + _A52 * k2_th + _A53 * k3_th + _A54 * k4_th)
        y5w = w + h * (_A51 * k1_w + _A52 * k2_w + _A53 * k3_w + _A54 * k4_w)
        k5_th = y5w
        k5_w = _accel(t + _C5 * h, y5t, y5w, w0sq, twog, tauI, om, phi0, bI, b, z, c1, c3, f_static)

        y6t = th + h * (_A61 * k1_th + _A62 * k2_th + _A63 * k3_th + _A64 * k4_th + _A65 * k5_th)
        y6w = w + h * (_A61 * k1_w + _A62 * k2_w + _A63 * k3_w + _A64 * k4_w + _A65 * k5_w)
        k6_th = y6w
        k6_w = _accel(t + h, y6t, y6w, w0sq, twog, tauI, om, phi0, bI, b, z, c1, c3, f_static)

        y7t = th + h * (_B1 * k1_th + _B3 * k3_th + _B4 * k4_th + _B5 * k5_th + _B6 * k6_th)
        y7w = w + h * (_B1 * k1_w + _B3 * k3_w + _B4 * k4_w + _B5 * k5_w + _B6 * k6_w)
        k7_th = y7w
        k7_w = _accel(t + h, y7t, y7w, w0sq, twog, tauI, om, phi0, bI, b, z, c1, c3, f_static)

        err_th = h * (
            _E1 * k1_th + _E3 * k3_th + _E4 * k4_th + _E5 * k5_th + _E6 * k6_th + _E7 * k7_th
        )
        err_w = h * (
            _E1 * k1_w + _E3 * k3_w + _E4 * k4_w + _E5 * k5_w + _E6 * k6_w + _E7 * k7_w
        )
        sc_th = atol_th + rtol * max(abs(th), abs(y7t))
        sc_w = atol_w + rtol * max(abs(w), abs(y7w))
        e1 = err_th / sc_th
        e2 = err_w / sc_w
        err = np.sqrt(0.5 * (e1 * e1 + e2 * e2))

        if not np.isfinite(err):
            h *= 0.25
            continue
        if err <= 1.0:
            t = t_target if hit_target else t + h
            th = y7t
            w = y7w
            k1_th = k7_th
            k1_w = k7_w
            if has_gap and z - b * th <= gap_min:
                return STATUS_PULL_IN, th, w, h, t
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            h *= fac
        else:
            h *= max(0.2, 0.9 * err ** -0.2)
    return STATUS_OK, th, w, h, t


@njit(cache=True)
def _run_trajectory(
    th,
    w,
    phi0,
    om,
    dt,
    n_samples,
    out_theta,
    out_thdot,
    rtol,
    atol_th,
    atol_w,
    w0sq,
    twog,
    tauI,
    bI,
    b,
    z,
    c1,
    c3,
    f_static,
    gap_min,
    h_max,
):
    """Fill samples at t_j = j*dt (local time). Sample 0 is the initial state."""
    out_theta[0] = th
    out_thdot[0] = w
    h = dt / 8.0
    t = 0.0
    for j in range(1, n_samples):
        status, th, w, h, t = _advance(
            th, w, t, j * dt, h, rtol, atol_th, atol_w,
            w0sq, twog, tauI, om, phi0, bI, b, z, c1, c3, f_static, gap_min, h_max,
        )
        if status != STATUS_OK:
            return status, th, w, t, j
        out_theta[j] = th
        out_thdot[j] = w
    return STATUS_OK, th, w, t, n_samples


@njit(cache=True)
def _run_settle_measure(
    th,
    w,
    phi0,
    om,
    n_settle,
    window_periods,
    n_windows,
    spp,
    amp_out,
    phase_out,
    rtol,
    atol_th,
    atol_w,
    w0sq,
    twog,
    tauI,
    bI,
    b,
    z,
    c1,
    c3,
    f_static,
    gap_min,
):
    """Settle for n_settle periods, then project n_windows lock-in windows.

    amp_out/phase_out receive one (amplitude, relative phase) pair per
    window. Returns (status, th, w, t_end).
    """
    period = 2.0 * np.pi / om
    dt = period / spp
    h = dt / 8.0
    t = 0.0
    h_max = period
    if n_settle > 0:
        status, th, w, h, t = _advance(
            th, w, t, n_settle * period, h, rtol, atol_th, atol_w,
            w0sq, twog, tauI, om, phi0, bI, b, z, c1, c3, f_static, gap_min, h_max,
        )
        if status != STATUS_OK:
            return status, th, w, t

    n_win_samples = window_periods * spp
    t_measure0 = t
    m = 0  # global sample index keeps the grid exact (no additive drift)
    for win in range(n_windows):
        sc = 0.0
        ss = 0.0
        for _ in range(n_win_samples):
            arg = om * t + phi0
            sc += th * np.cos(arg)
            ss += th * np.sin(arg)
            m += 1
            status, th, w, h, t = _advance(
                th, w, t, t_measure0 + m * dt, h, rtol, atol_th, atol_w,
                w0sq, twog, tauI, om, phi0, bI, b, z, c1, c3, f_static, gap_min, h_max,
            )
            if status != STATUS_OK:
                return status, th, w, t
        amp_out[win] = 2.0 / n_win_samples * np.sqrt(sc * sc + ss * ss)
        phase_out[win] = np.arctan2(-ss, sc)
    return STATUS_OK, th, w, t
