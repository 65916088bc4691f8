"""Order-of-magnitude rates: emission, background gravitons, bremsstrahlung.

These are dimensional estimates, not precise predictions. Every function
here returns a plain float; :data:`ORDER_OF_MAGNITUDE` lists the ones whose
results the harness tags with the ``order-of-magnitude`` flag.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidInputError, InvalidRegimeError
from .quantities import CONSTANTS, PhysicalConstants, require_positive

#: Quoted effective graviton absorption cross-section (1e-65 cm^2), in m^2.
QUOTED_GRAVITON_CROSS_SECTION = 1e-69
#: Quoted solar graviton flux, 1e-4 per cm^2 per s, in m^-2 s^-1.
SOLAR_GRAVITON_FLUX = 1e-4 * 1e4

ORDER_OF_MAGNITUDE = frozenset({
    "em_gr_ratio", "emission_rates", "background_thermalization_rate",
    "resonator_graviton_decoherence_time", "penrose_style_matterwave_time",
})


@dataclass(frozen=True)
class EmitterParams:
    """A body of ``N`` elementary dipoles, size ``L``, angular frequency ``omega``.

    ``Q`` (mass quadrupole) defaults to ``m L^2``.
    """

    N: float
    L: float
    omega: float
    m: float
    Q: float | None = None

    def __post_init__(self):
        require_positive(N=self.N, L=self.L, omega=self.omega, m=self.m)
        if self.Q is None:
            object.__setattr__(self, "Q", self.m * self.L ** 2)
        else:
            require_positive(Q=self.Q)

    @classmethod
    def from_cyclic(cls, N: float, L: float, f_hz: float, m: float, Q: float | None = None):
        """Build from an ordinary frequency in Hz."""
        return cls(N=N, L=L, omega=2.0 * math.pi * f_hz, m=m, Q=Q)

    def d2(self, const: PhysicalConstants = CONSTANTS) -> float:
        """Squared dipole proxy ``N^2 alpha hbar c L^2`` (Gaussian-style units)."""
        return self.N ** 2 * const.alpha * const.hbar * const.c * self.L ** 2


#: Fiducial resonator: one dipole, 1 um, 1 MHz read as 1e6 rad/s, 1 ng.
FIDUCIAL_EMITTER = EmitterParams(N=1.0, L=1e-6, omega=1e6, m=1e-12)


@dataclass(frozen=True)
class EmissionRates:
    gamma_em: float
    gamma_gr: float

    @property
    def ratio(self) -> float:
        return self.gamma_em / self.gamma_gr


def emission_rates(p: EmitterParams, const: PhysicalConstants = CONSTANTS) -> EmissionRates:
    """``Gamma_EM ~ d^2 w^3 / (hbar c^3)`` and ``Gamma_GR ~ G Q^2 w^5 / (hbar c^5)``."""
    gamma_em = p.d2(const) * p.omega ** 3 / (const.hbar * const.c ** 3)
    gamma_gr = const.G_N * p.Q ** 2 * p.omega ** 5 / (const.hbar * const.c ** 5)
    return EmissionRates(gamma_em, gamma_gr)


def em_gr_ratio(p: EmitterParams, const: PhysicalConstants = CONSTANTS) -> float:
    """Photon-to-graviton spontaneous emission ratio.

    With ``Q = m L^2`` this is ``N^2 alpha hbar c^3 / (G m^2 L^2 w^2)``.
    """
    return emission_rates(p, const).ratio


def em_gr_ratio_cyclic(p: EmitterParams, const: PhysicalConstants = CONSTANTS) -> float:
    """Same ratio if ``p.omega`` was meant in Hz rather than rad/s."""
    q = EmitterParams(N=p.N, L=p.L, omega=2.0 * math.pi * p.omega, m=p.m, Q=p.Q)
    return em_gr_ratio(q, const)


def planck_cross_section(const: PhysicalConstants = CONSTANTS) -> float:
    """``4 pi^2 L_p^2`` in m^2 (about 1.0e-68)."""
    return 4.0 * math.pi ** 2 * const.L_p ** 2


def number_density_from_flux(flux: float, const: PhysicalConstants = CONSTANTS) -> float:
    """Number density (m^-3) of massless quanta carrying ``flux`` (m^-2 s^-1)."""
    if flux < 0:
        raise InvalidInputError("flux must be non-negative")
    return flux / const.c


def background_thermalization_rate(n_grav: float, sigma: float = QUOTED_GRAVITON_CROSS_SECTION,
                                   const: PhysicalConstants = CONSTANTS) -> float:
    """Absorption-limited decoherence rate ``c n sigma`` in 1/s.

    The default ``sigma`` is the quoted 1e-69 m^2; :func:`planck_cross_section`
    gives the formula value, about ten times larger.
    """
    if n_grav < 0 or sigma < 0:
        raise InvalidInputError("n_grav and sigma must be non-negative")
    return const.c * n_grav * sigma


def solar_graviton_decoherence_rate(sigma: float = QUOTED_GRAVITON_CROSS_SECTION,
                                    flux: float = SOLAR_GRAVITON_FLUX,
                                    const: PhysicalConstants = CONSTANTS) -> float:
    return background_thermalization_rate(number_density_from_flux(flux, const), sigma, const)


def bremsstrahlung_exponent(p: float, m: float, tau: float,
                            const: PhysicalConstants = CONSTANTS) -> float:
    """``(p/P_p)^2 ln(m c^2 tau / hbar)``."""
    if p < 0:
        raise InvalidInputError("p must be non-negative")
    require_positive(m=m, tau=tau)
    arg = m * const.c ** 2 * tau / const.hbar
    if arg <= 1.0:
        raise InvalidRegimeError(f"m c^2 tau / hbar = {arg:.3g} must exceed 1")
    return (p / const.P_p) ** 2 * math.log(arg)


def bremsstrahlung_coherence_factor(p: float, m: float, tau: float,
                                    const: PhysicalConstants = CONSTANTS) -> float:
    """Surviving off-diagonal fraction after soft-graviton emission."""
    return math.exp(-bremsstrahlung_exponent(p, m, tau, const))


def bremsstrahlung_decoherence(p: float, m: float, tau: float,
                               const: PhysicalConstants = CONSTANTS) -> float:
    """``1 - factor`` computed without cancellation."""
    return -math.expm1(-bremsstrahlung_exponent(p, m, tau, const))


def resonator_graviton_decoherence_time(Q: float, omega: float,
                                        const: PhysicalConstants = CONSTANTS) -> float:
    """``hbar c^5 / (G Q^2 w^5)``, the inverse graviton emission rate."""
    require_positive(Q=Q, omega=omega)
    return const.hbar * const.c ** 5 / (const.G_N * Q ** 2 * omega ** 5)


def penrose_style_matterwave_time(m: float, R0: float, const: PhysicalConstants = CONSTANTS) -> float:
    """``hbar R0 / (G m^2)``: inverse plateau rate with geometric factor 1."""
    require_positive(m=m, R0=R0)
    return const.hbar * R0 / (const.G_N * m * m)
