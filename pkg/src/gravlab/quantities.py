"""Physical constants in SI units.

All physics modules take a ``const`` keyword defaulting to :data:`CONSTANTS`
so sensitivity studies can swap in modified values without global state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

from scipy import constants as _sc

from .errors import InvalidInputError


@dataclass(frozen=True)
class PhysicalConstants:
    """Base constants; Planck units are derived on access.

    Attributes
    ----------
    G_N : float
        Newton constant, m^3 kg^-1 s^-2.
    hbar : float
        Reduced Planck constant, J s.
    c : float
        Speed of light, m/s.
    k_B : float
        Boltzmann constant, J/K.
    amu : float
        Atomic mass unit, kg.
    alpha : float
        Fine-structure constant.
    """

    G_N: float = _sc.G
    hbar: float = _sc.hbar
    c: float = _sc.c
    k_B: float = _sc.k
    amu: float = _sc.atomic_mass
    alpha: float = _sc.fine_structure

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidInputError(f"constant {f.name} must be positive, got {value!r}")

    @property
    def M_p(self) -> float:
        """Planck mass sqrt(hbar c / G), kg."""
        return math.sqrt(self.hbar * self.c / self.G_N)

    @property
    def P_p(self) -> float:
        """Planck momentum M_p c, kg m/s."""
        return self.M_p * self.c

    @property
    def L_p(self) -> float:
        """Planck length hbar / P_p, m."""
        return self.hbar / self.P_p

    def with_overrides(self, **overrides: float) -> "PhysicalConstants":
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise InvalidInputError(f"unknown constants: {sorted(unknown)}")
        return replace(self, **{k: float(v) for k, v in overrides.items()})


CONSTANTS = PhysicalConstants()


def derived_planck_units(constants: PhysicalConstants = CONSTANTS) -> tuple[float, float, float]:
    """Return ``(M_p, P_p, L_p)`` built from ``(G_N, hbar, c)``."""
    for name in ("G_N", "hbar", "c"):
        value = getattr(constants, name)
        if not value > 0:
            raise InvalidInputError(f"{name} must be positive")
    return constants.M_p, constants.P_p, constants.L_p


def require_positive(**values: float) -> None:
    """Raise :class:`InvalidInputError` unless every value is finite and > 0."""
    for name, value in values.items():
        try:
            ok = math.isfinite(value) and value > 0
        except TypeError:
            ok = False
        if not ok:
            raise InvalidInputError(f"{name} must be a positive finite number, got {value!r}")
