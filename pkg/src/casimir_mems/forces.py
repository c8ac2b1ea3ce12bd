"""Closed-form Casimir and electrostatic force laws with analytic derivatives.

Sign convention: ``z`` is the sphere-to-plate gap; forces pulling the plate
toward the sphere are negative. With that choice all Casimir forces are
strictly negative and all first derivatives strictly positive, so an
attractive gradient always lowers the resonance frequency.

Perfect-conductor formulas only; conductivity and roughness corrections are
out of scope.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .constants import CODATA, PhysicalConstants
from .errors import DomainError, ProximityWarning, UnsupportedOrderError

#: Largest supported analytic derivative order.
MAX_DERIVATIVE_ORDER = 6

#: Gap-to-radius ratio above which the sphere-plate formulas start to degrade.
PROXIMITY_RATIO = 1.0 / 50.0


def _require_positive(value: float, name: str) -> None:
    if not value > 0.0:
        raise DomainError(f"{name} must be strictly positive, got {value!r}")


def casimir_sphere_plate(R: float, z: float, constants: PhysicalConstants = CODATA) -> float:
    r"""Sphere-plate Casimir force.

    .. math:: F(z) = -\frac{\pi^3 \hbar c R}{360\, z^3}

    Parameters
    ----------
    R : float
        Sphere radius, m.
    z : float
        Sphere-to-plate gap, m.

    Returns
    -------
    float
        Force in N; negative (attractive).
    """
    _require_positive(R, "R")
    _require_positive(z, "z")
    return -math.pi**3 * constants.hbar * constants.c * R / (360.0 * z**3)


def casimir_sphere_plate_derivative(
    R: float, z: float, order: int, constants: PhysicalConstants = CODATA
) -> float:
    r"""n-th spatial derivative of the sphere-plate Casimir force.

    For :math:`F(z) = -C z^{-3}` with :math:`C = \pi^3 \hbar c R / 360`,

    .. math:: F^{(n)}(z) = (-1)^{n+1}\, C\, \frac{(n+2)!}{2}\, z^{-(n+3)}

    so order 1 is :math:`+\pi^3 \hbar c R / (120 z^4)` and the sign
    alternates with order.

    Parameters
    ----------
    order : int
        Derivative order, 1..6.

    Returns
    -------
    float
        Derivative in N/m^order.
    """
    _require_positive(R, "R")
    _require_positive(z, "z")
    if not isinstance(order, int) or isinstance(order, bool):
        raise UnsupportedOrderError(f"order must be an integer, got {order!r}")
    if not 1 <= order <= MAX_DERIVATIVE_ORDER:
        raise UnsupportedOrderError(
            f"order must be in [1, {MAX_DERIVATIVE_ORDER}], got {order}"
        )
    C = math.pi**3 * constants.hbar * constants.c * R / 360.0
    sign = -1.0 if order % 2 == 0 else 1.0
    return sign * C * (math.factorial(order + 2) / 2.0) * z ** -(order + 3)


def casimir_interaction_energy(R: float, z: float, constants: PhysicalConstants = CODATA) -> float:
    r"""Sphere-plate Casimir interaction energy, zero at infinite gap.

    .. math:: U(z) = -\frac{\pi^3 \hbar c R}{720\, z^2}

    The negative z-derivative of this energy is :func:`casimir_sphere_plate`.
    """
    _require_positive(R, "R")
    _require_positive(z, "z")
    return -math.pi**3 * constants.hbar * constants.c * R / (720.0 * z**2)


def casimir_parallel_plate(
    geom: "ParallelPlateGeometry", constants: PhysicalConstants = CODATA
) -> float:
    r"""Casimir force between parallel plates.

    .. math:: F = -\frac{\pi^2 \hbar c A}{240\, z^4}
    """
    return (
        -math.pi**2
        * constants.hbar
        * constants.c
        * geom.area_A
        / (240.0 * geom.gap_z**4)
    )


def electrostatic_gradient(
    R: float,
    config: "ElectrostaticConfig",
    delta_z: float,
    z0: float,
    constants: PhysicalConstants = CODATA,
) -> float:
    r"""Gradient of the sphere-plate electrostatic force.

    .. math:: F'(z) = \frac{\varepsilon_0 \pi R (V - V_0)^2}{(\Delta z + z_0)^2}

    Valid for total gap much smaller than R. Non-negative; zero exactly when
    the applied voltage equals the residual voltage.
    """
    _require_positive(R, "R")
    gap = delta_z + z0
    if not gap > 0.0:
        raise DomainError(f"total gap delta_z + z0 must be strictly positive, got {gap!r}")
    dv = config.voltage_V - config.residual_V0
    return constants.epsilon0 * math.pi * R * dv * dv / (gap * gap)


@dataclass(frozen=True)
class ParallelPlateGeometry:
    """Two parallel plates of area ``area_A`` separated by ``gap_z``."""

    area_A: float
    gap_z: float

    def __post_init__(self) -> None:
        _require_positive(self.area_A, "area_A")
        _require_positive(self.gap_z, "gap_z")


@dataclass(frozen=True)
class ElectrostaticConfig:
    """Applied and residual voltages on the sphere.

    ``voltage_V == residual_V0`` is the legal null case (no net force).
    """

    voltage_V: float
    residual_V0: float

    def __post_init__(self) -> None:
        for name in ("voltage_V", "residual_V0"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")


@dataclass(frozen=True)
class SpherePlateGeometry:
    """Sphere-above-plate measurement geometry.

    Attributes
    ----------
    radius_R : float
        Sphere radius, m.
    lever_b : float
        Lateral distance of the sphere from the plate rotation axis, m;
        converts plate angle to local displacement ``b*theta``.
    z0 : float
        Electrostatic contact offset, m (gap left at closest approach).
    z1 : float
        Casimir contact offset, m.
    delta_z : float
        Piezo-controlled extension above the offset, m.
    """

    radius_R: float
    lever_b: float
    z0: float
    z1: float
    delta_z: float = 0.0

    def __post_init__(self) -> None:
        _require_positive(self.radius_R, "radius_R")
        _require_positive(self.lever_b, "lever_b")
        # offsets may be zero; the combined gap is checked where it is used
        for name in ("z0", "z1", "delta_z"):
            if not getattr(self, name) >= 0.0:
                raise DomainError(f"{name} must be non-negative")

    def validate_gap(self, z: float, *, field: str = "z") -> float:
        """Check a total gap and warn when it is not small against R."""
        if not z > 0.0:
            raise DomainError(f"{field} must be strictly positive, got {z!r}")
        if z >= self.radius_R * PROXIMITY_RATIO:
            warnings.warn(
                f"gap {z:.3e} m is not small against sphere radius "
                f"{self.radius_R:.3e} m; proximity-form force laws degrade",
                ProximityWarning,
                stacklevel=2,
            )
        return z

    def electrostatic_gap(self) -> float:
        return self.validate_gap(self.delta_z + self.z0, field="delta_z + z0")

    def casimir_gap(self) -> float:
        return self.validate_gap(self.delta_z + self.z1, field="delta_z + z1")


class _PowerForceLaw:
    """Force of the form F(g) = -(c1/g + c3/g^3) with analytic derivatives.

    ``power_terms()`` exposes the (coefficient, exponent) pairs so the
    compiled integrator can evaluate the same law without Python calls.
    """

    _c1: float
    _c3: float

    def force(self, z: float) -> float:
        _require_positive(z, "z")
        return -(self._c1 / z + self._c3 / z**3)

    def derivative(self, z: float, order: int) -> float:
        _require_positive(z, "z")
        if not isinstance(order, int) or isinstance(order, bool):
            raise UnsupportedOrderError(f"order must be an integer, got {order!r}")
        if not 1 <= order <= MAX_DERIVATIVE_ORDER:
            raise UnsupportedOrderError(
                f"order must be in [1, {MAX_DERIVATIVE_ORDER}], got {order}"
            )
        sign = -1.0 if order % 2 == 0 else 1.0
        term1 = self._c1 * math.factorial(order) * z ** -(order + 1)
        term3 = self._c3 * (math.factorial(order + 2) / 2.0) * z ** -(order + 3)
        return sign * (term1 + term3)

    def power_terms(self) -> tuple[float, float]:
        """(c1, c3) such that F(g) = -(c1/g + c3/g^3)."""
        return (self._c1, self._c3)


class CasimirSpherePlateLaw(_PowerForceLaw):
    """Sphere-plate Casimir force as an evaluatable law object."""

    def __init__(self, radius_R: float, constants: PhysicalConstants = CODATA):
        _require_positive(radius_R, "radius_R")
        self.constants = constants
        self.radius_R = radius_R
        self._c1 = 0.0
        self._c3 = math.pi**3 * constants.hbar * constants.c * radius_R / 360.0


class ElectrostaticSphereLaw(_PowerForceLaw):
    """Sphere-plate electrostatic force law, F(z) = -eps0*pi*R*(V-V0)^2/z."""

    def __init__(
        self,
        radius_R: float,
        config: ElectrostaticConfig,
        constants: PhysicalConstants = CODATA,
    ):
        _require_positive(radius_R, "radius_R")
        self.constants = constants
        self.radius_R = radius_R
        self.config = config
        dv = config.voltage_V - config.residual_V0
        self._c1 = constants.epsilon0 * math.pi * radius_R * dv * dv
        self._c3 = 0.0


class NullForceLaw(_PowerForceLaw):
    """No sphere present; force and all derivatives vanish."""

    def __init__(self) -> None:
        self._c1 = 0.0
        self._c3 = 0.0

    def force(self, z: float) -> float:  # gap may be anything positive
        _require_positive(z, "z")
        return 0.0

    def derivative(self, z: float, order: int) -> float:
        super().derivative(z, order)  # reuse the order/domain validation
        return 0.0
