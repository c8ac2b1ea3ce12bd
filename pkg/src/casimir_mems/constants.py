"""Physical constants used by every formula in the toolkit."""
from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError


@dataclass(frozen=True)
class PhysicalConstants:
    """SI constants: single source of truth for all force laws.

    Attributes
    ----------
    hbar : float
        Reduced Planck constant, J*s.
    c : float
        Speed of light in vacuum, m/s.
    epsilon0 : float
        Vacuum permittivity, F/m.
    """

    hbar: float = 1.054_571_817e-34
    c: float = 2.997_924_58e8
    epsilon0: float = 8.854_187_8128e-12

    def __post_init__(self) -> None:
        for name in ("hbar", "c", "epsilon0"):
            if not getattr(self, name) > 0.0:
                raise DomainError(f"{name} must be strictly positive")


#: Default CODATA values; pass a custom instance only for unit experiments.
CODATA = PhysicalConstants()
