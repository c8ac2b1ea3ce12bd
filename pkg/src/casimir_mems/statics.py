"""One-dimensional spring-plus-sphere potential landscape.

A plate on a linear spring (constant ``k``, N/m) faces a sphere at separation
``d`` from the spring's natural equilibrium. Displacement ``x`` of the plate
toward the sphere leaves a gap ``d - x``. The total energy

    U(x) = 1/2 k x^2 - K / (d - x)^2,   K = pi^3 hbar c R / 720

develops a local minimum and a barrier once ``d`` exceeds a critical value;
the contact-side global minimum (U -> -inf as x -> d) lies outside the
model's validity and is represented by a truncation flag, not a point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .constants import PhysicalConstants, CODATA
from .errors import DomainError
from .forces import casimir_interaction_energy, casimir_sphere_plate

#: Gap below which this model is not trusted (adhesion/crossover physics);
#: equilibrium search is restricted to gaps of at least this size.
DEFAULT_GAP_FLOOR = 10e-9

#: Two roots closer than this (in m) are reported as one degenerate pair.
DEGENERACY_SPACING = 1e-12

KIND_MINIMUM = "stable-minimum"
KIND_MAXIMUM = "unstable-maximum"


@dataclass(frozen=True)
class SpringSphereModel:
    """Plate on a spring facing a sphere.

    Attributes
    ----------
    spring_k : float
        Linear spring constant, N/m.
    sphere_R : float
        Sphere radius, m.
    separation_d : float
        Sphere-to-plate distance at zero spring extension, m.
    gap_floor : float
        Smallest gap, m, at which the model is evaluated during
        equilibrium search (default 10 nm).
    constants : PhysicalConstants
    """

    spring_k: float
    sphere_R: float
    separation_d: float
    gap_floor: float = DEFAULT_GAP_FLOOR
    constants: PhysicalConstants = field(default=CODATA)

    def __post_init__(self) -> None:
        for name in ("spring_k", "sphere_R", "separation_d", "gap_floor"):
            if not getattr(self, name) > 0.0:
                raise DomainError(f"{name} must be strictly positive")
        if self.gap_floor >= self.separation_d:
            raise DomainError("gap_floor must be smaller than separation_d")

    def _check_x(self, x: float) -> None:
        if not 0.0 <= x < self.separation_d:
            raise DomainError(
                f"displacement x must lie in [0, separation_d), got {x!r} "
                f"with separation_d={self.separation_d!r}"
            )

    @property
    def casimir_C(self) -> float:
        """Force coefficient C with F = -C/gap^3."""
        return math.pi**3 * self.constants.hbar * self.constants.c * self.sphere_R / 360.0


@dataclass(frozen=True)
class Equilibrium:
    x: float
    kind: str  # KIND_MINIMUM or KIND_MAXIMUM


@dataclass(frozen=True)
class EquilibriumSet:
    """Classified equilibria of the total potential.

    ``bistable`` is true when a stable minimum and a barrier maximum
    coexist inside the searched domain. ``degenerate`` marks a fused
    (tangency) root pair. ``truncated_at_contact`` records that the
    potential is unbounded below toward x -> d, so the contact-side
    global minimum is never listed as a point.
    """

    equilibria: tuple[Equilibrium, ...]
    barrier_height: float | None
    bistable: bool
    degenerate: bool = False
    truncated_at_contact: bool = True


def spring_energy(model: SpringSphereModel, x: float) -> float:
    """Elastic addend 1/2 k x^2, J."""
    model._check_x(x)
    return 0.5 * model.spring_k * x * x


def sphere_energy(model: SpringSphereModel, x: float) -> float:
    """Sphere-attraction addend at gap d - x, J."""
    model._check_x(x)
    return casimir_interaction_energy(
        model.sphere_R, model.separation_d - x, model.constants
    )


def total_potential(model: SpringSphereModel, x: float) -> float:
    """Total energy, J: exactly spring_energy(x) + sphere_energy(x)."""
    return spring_energy(model, x) + sphere_energy(model, x)


def potential_gradient(model: SpringSphereModel, x: float) -> float:
    """dU/dx in N: k*x - C/(d - x)^3 (force balance residual)."""
    model._check_x(x)
    return model.spring_k * x + casimir_sphere_plate(
        model.sphere_R, model.separation_d - x, model.constants
    )


def _curvature(model: SpringSphereModel, x: float) -> float:
    gap = model.separation_d - x
    return model.spring_k - 3.0 * model.casimir_C / gap**4


def find_equilibria(model: SpringSphereModel, scan_points: int = 4000) -> EquilibriumSet:
    """Locate and classify all force-balance roots with gap >= gap_floor.

    The gradient k*x - C/(d-x)^3 is scanned on a grid log-spaced both in x
    (roots can sit at x ~ C/(k d^3), many decades below d) and in the
    remaining gap; sign changes are refined by Brent's method.
    """
    d = model.separation_d
    x_hi = d - model.gap_floor
    if x_hi <= 0.0:
        return EquilibriumSet((), None, False)

    # Log-spaced x from far below any conceivable root, then log-spaced
    # approach to the gap floor from the contact side.
    x_lo = min(model.casimir_C / (model.spring_k * d**3) * 1e-6, x_hi * 1e-9)
    x_log = np.geomspace(x_lo, 0.5 * d, scan_points // 2)
    gap_log = d - np.geomspace(model.gap_floor, 0.5 * d, scan_points // 2)
    grid = np.concatenate(([0.0], x_log, gap_log))
    grid = np.unique(np.clip(grid, 0.0, x_hi))

    g = np.array([potential_gradient(model, float(x)) for x in grid])
    roots: list[float] = []
    for i in range(len(grid) - 1):
        a, b = float(grid[i]), float(grid[i + 1])
        ga, gb = g[i], g[i + 1]
        if ga == 0.0:
            if not roots or abs(a - roots[-1]) > DEGENERACY_SPACING:
                roots.append(a)
            continue
        if ga * gb < 0.0:
            r = brentq(lambda x: potential_gradient(model, x), a, b, xtol=1e-18, rtol=8.9e-16)
            roots.append(float(r))
    if g[-1] == 0.0:
        roots.append(float(grid[-1]))

    degenerate = False
    merged: list[float] = []
    for r in sorted(roots):
        if merged and abs(r - merged[-1]) <= DEGENERACY_SPACING:
            degenerate = True
            continue
        merged.append(r)

    eqs = tuple(
        Equilibrium(x=r, kind=KIND_MINIMUM if _curvature(model, r) > 0.0 else KIND_MAXIMUM)
        for r in merged
    )
    minima = [e for e in eqs if e.kind == KIND_MINIMUM]
    maxima = [e for e in eqs if e.kind == KIND_MAXIMUM]
    bistable = bool(minima and maxima) and not degenerate
    barrier = None
    if minima and maxima:
        barrier = total_potential(model, maxima[-1].x) - total_potential(model, minima[0].x)
    return EquilibriumSet(eqs, barrier, bistable, degenerate=degenerate)


def critical_separation(spring_k: float, sphere_R: float,
                        constants: PhysicalConstants = CODATA) -> float:
    """Separation below which no interior minimum survives.

    At tangency the force balance k*x = C/(d-x)^4 * (d-x) and its derivative
    hold simultaneously: gap u* = (3C/k)^(1/4), x = u*/3, so

        d_c = (4/3) * (3C/k)^(1/4).
    """
    if not spring_k > 0.0:
        raise DomainError("spring_k must be strictly positive")
    if not sphere_R > 0.0:
        raise DomainError("sphere_R must be strictly positive")
    C = math.pi**3 * constants.hbar * constants.c * sphere_R / 360.0
    return (4.0 / 3.0) * (3.0 * C / spring_k) ** 0.25


def critical_separation_bisect(
    spring_k: float,
    sphere_R: float,
    constants: PhysicalConstants = CODATA,
    tol: float = 1e-11,
) -> float:
    """Independent route to the critical separation.

    Plain bisection on the bistable flag of :func:`find_equilibria`;
    serves as the cross-check for :func:`critical_separation`.
    """
    d_ref = critical_separation(spring_k, sphere_R, constants)
    lo, hi = 0.5 * d_ref, 2.0 * d_ref

    def bistable_at(d: float) -> bool:
        return find_equilibria(
            SpringSphereModel(spring_k, sphere_R, d, constants=constants)
        ).bistable

    if bistable_at(lo) or not bistable_at(hi):
        raise DomainError("bisection bracket failed; model not bistable near closed form")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if bistable_at(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
