"""Quantum (EFT) predictions: coupled oscillators and twin interferometers.

The Newtonian interaction is an operator on the joint Hilbert space, so it
entangles. Two paradigms are covered:

* two harmonic oscillators coupled through the quadrupole term of the
  multipole-expanded Newton potential (beam-splitter coupling ``lambda_g``);
* two interferometers whose arms pick up branch-dependent Newtonian phases.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import InvalidInputError
from .qstate import (HilbertSpec, OperatorMatrix, Propagator, StateVector,
                     _check_truncation, _coherent_amplitudes, identity,
                     ladder_operators, tensor)
from .quantities import CONSTANTS, PhysicalConstants, require_positive

#: Value displayed next to the coupling formula for m = 1 ng, w = 1 rad/s, d = 1 um.
DISPLAYED_COUPLING_HZ = 6e-8
#: Prefactor displayed next to the differential phase for 1 ng, 1 um, 1 s, 1 mm.
DISPLAYED_DELTA_PHI = 60.0

ARMS = ("L", "R")
ARM_PAIRS = ("LL", "LR", "RL", "RR")


@dataclass(frozen=True)
class OscillatorPair:
    """Two identical resonators a distance ``d`` apart (SI units)."""

    m: float
    omega: float
    d: float
    dim: int = 12
    rwa: bool = True

    def __post_init__(self):
        require_positive(m=self.m, omega=self.omega, d=self.d)
        if int(self.dim) != self.dim or self.dim < 2:
            raise InvalidInputError(f"dim must be an integer >= 2, got {self.dim!r}")

    @classmethod
    def with_coupling(cls, m: float, omega: float, coupling: float, dim: int = 12,
                      rwa: bool = True, const: PhysicalConstants = CONSTANTS) -> "OscillatorPair":
        """Pick the separation ``d`` that gives the requested ``lambda_g``."""
        require_positive(coupling=coupling)
        d = (const.G_N * m / (omega * coupling)) ** (1.0 / 3.0)
        return cls(m=m, omega=omega, d=d, dim=dim, rwa=rwa)

    @property
    def density(self) -> float:
        """``m / d^3``; physically bounded by the resonator material density."""
        return self.m / self.d ** 3

    def x_zpf(self, const: PhysicalConstants = CONSTANTS) -> float:
        return math.sqrt(const.hbar / (2.0 * self.m * self.omega))

    @property
    def spec(self) -> HilbertSpec:
        return HilbertSpec((self.dim, self.dim))


def coupling_lambda(pair: OscillatorPair, const: PhysicalConstants = CONSTANTS) -> float:
    """Beam-splitter coupling ``lambda_g = G m / (omega d^3)`` in rad/s."""
    return const.G_N * pair.m / (pair.omega * pair.d ** 3)


def coupling_lambda_displayed(pair: OscillatorPair) -> float:
    """The displayed fiducial scaling (6e-8 Hz per ng, per rad/s, per um^3).

    Kept only to flag the ~1e3 mismatch with the formula itself.
    """
    return (DISPLAYED_COUPLING_HZ * (pair.m / 1e-12) * (1.0 / pair.omega)
            * (1e-6 / pair.d) ** 3)


def pair_hamiltonian(pair: OscillatorPair, const: PhysicalConstants = CONSTANTS) -> OperatorMatrix:
    """``H = sum_i hbar w n_i + hbar lambda_g (a1 a2^dag + a1^dag a2)`` in joules.

    The counter-rotating ``a1 a2 + a1^dag a2^dag`` terms are added when
    ``pair.rwa`` is false. The coupling sign follows from expanding the
    attractive ``-G m^2 / |d - (x1 - x2)|`` to second order.
    """
    a, adag = ladder_operators(pair.dim)
    eye = identity(pair.dim)
    a1, a2 = tensor([a, eye]), tensor([eye, a])
    a1d, a2d = a1.dag, a2.dag
    lam = coupling_lambda(pair, const)
    n_tot = a1d.matrix @ a1.matrix + a2d.matrix @ a2.matrix
    hop = a1.matrix @ a2d.matrix + a1d.matrix @ a2.matrix
    H = pair.omega * n_tot + lam * hop
    if not pair.rwa:
        H = H + lam * (a1.matrix @ a2.matrix + a1d.matrix @ a2d.matrix)
    return OperatorMatrix(pair.spec, const.hbar * H, hermitian=True)


def pair_propagator(pair: OscillatorPair, const: PhysicalConstants = CONSTANTS) -> Propagator:
    return Propagator(pair_hamiltonian(pair, const), const)


def to_rotating_frame(psi: StateVector, pair: OscillatorPair, t: float) -> StateVector:
    """Strip the free ``exp(-i w t n)`` rotation from a two-mode state."""
    n = np.arange(pair.dim)
    phase = np.exp(1j * pair.omega * t * (n[:, None] + n[None, :])).ravel()
    return StateVector(psi.spec, psi.amplitudes * phase)


def _two_mode_coherent(beta1: complex, beta2: complex, dim: int) -> np.ndarray:
    return np.kron(_coherent_amplitudes(beta1, dim), _coherent_amplitudes(beta2, dim))


def evolve_cat_vacuum(pair: OscillatorPair, alpha: complex, t: float,
                      const: PhysicalConstants = CONSTANTS) -> StateVector:
    """Closed-form evolution of ``(|alpha> + |-alpha>) (x) |0>`` under RWA coupling.

    Returns ``|a_t cos(lt)>|-i a_t sin(lt)> + |-a_t cos(lt)>|i a_t sin(lt)>``
    (normalized) with ``a_t = alpha exp(-i w t)`` and ``l = lambda_g``.
    """
    if not pair.rwa:
        raise InvalidInputError("the closed-form cat evolution assumes the rotating-wave pair")
    _check_truncation(alpha, pair.dim)
    lam = coupling_lambda(pair, const)
    a_t = complex(alpha) * np.exp(-1j * pair.omega * t)
    c, s = math.cos(lam * t), math.sin(lam * t)
    amps = (_two_mode_coherent(a_t * c, -1j * a_t * s, pair.dim)
            + _two_mode_coherent(-a_t * c, 1j * a_t * s, pair.dim))
    return StateVector(pair.spec, amps).normalize()


def cat_vacuum_state(alpha: complex, dim: int) -> StateVector:
    """Initial ``(|alpha> + |-alpha>)/norm (x) |0>``."""
    _check_truncation(alpha, dim)
    amps = _two_mode_coherent(alpha, 0.0, dim) + _two_mode_coherent(-alpha, 0.0, dim)
    return StateVector(HilbertSpec((dim, dim)), amps).normalize()


# --------------------------------------------------------------------------
# interferometers


@dataclass(frozen=True)
class InterferometerPair:
    """Two interferometers with arm separation ``dx`` at distance ``d``.

    ``d_ij`` maps ``"LL", "LR", "RL", "RR"`` to the distance between arm
    ``i`` of particle 1 and arm ``j`` of particle 2.
    """

    m: float
    dx: float
    d: float
    dt: float
    d_ij: Mapping[str, float] = field(default_factory=dict)
    geometry: str = "user"

    def __post_init__(self):
        require_positive(m=self.m, dx=self.dx, d=self.d, dt=self.dt)
        if set(self.d_ij) != set(ARM_PAIRS):
            raise InvalidInputError(f"d_ij needs keys {ARM_PAIRS}, got {sorted(self.d_ij)}")
        for k, v in self.d_ij.items():
            require_positive(**{f"d_{k}": v})
        object.__setattr__(self, "d_ij", dict(self.d_ij))

    @classmethod
    def standard(cls, m: float, dx: float, d: float, dt: float,
                 geometry: str = "approximate") -> "InterferometerPair":
        """Build the arm distance table.

        ``approximate``: short ``R1-L2`` arm pair at ``d``, the other three at
        ``d + dx``. ``collinear``: all four arms on a line, ``1L 1R 2L 2R``.
        """
        if geometry == "approximate":
            d_ij = {"LL": d + dx, "LR": d + dx, "RL": d, "RR": d + dx}
        elif geometry == "collinear":
            d_ij = {"LL": d + dx, "LR": d + 2 * dx, "RL": d, "RR": d + dx}
        else:
            raise InvalidInputError(f"unknown geometry {geometry!r}")
        return cls(m=m, dx=dx, d=d, dt=dt, d_ij=d_ij, geometry=geometry)

    def distance_matrix(self) -> np.ndarray:
        """Site distances in the order ``1L, 1R, 2L, 2R``."""
        D = np.zeros((4, 4))
        D[0, 1] = D[1, 0] = self.dx
        D[2, 3] = D[3, 2] = self.dx
        for i, a in enumerate(ARMS):
            for j, b in enumerate(ARMS):
                D[i, 2 + j] = D[2 + j, i] = self.d_ij[a + b]
        return D


def interferometer_phases(cfg: InterferometerPair,
                          const: PhysicalConstants = CONSTANTS) -> dict[str, float]:
    """Branch phases ``phi_ij = G m^2 dt / (hbar d_ij)``."""
    pref = const.G_N * cfg.m ** 2 * cfg.dt / const.hbar
    return {k: pref / cfg.d_ij[k] for k in ARM_PAIRS}


@dataclass(frozen=True)
class DeltaPhi:
    approximate: float
    exact: float
    entangling: float

    @property
    def entangling_mod_2pi(self) -> float:
        return float(math.remainder(self.entangling, 2 * math.pi))


def delta_phi(cfg: InterferometerPair, const: PhysicalConstants = CONSTANTS) -> DeltaPhi:
    """Differential phase ``G m^2 dx dt / (hbar d^2)`` plus exact comparisons.

    ``exact`` is ``phi_RL - phi_LL``; ``entangling`` is the local-phase
    invariant ``phi_RL + phi_LR - phi_LL - phi_RR``, which is what decides
    whether the final state is a product.
    """
    if cfg.dx / cfg.d > 0.1:
        warnings.warn(f"dx/d = {cfg.dx / cfg.d:.3g} is not small; the approximate phase is poor",
                      stacklevel=2)
    approx = const.G_N * cfg.m ** 2 * cfg.dx * cfg.dt / (const.hbar * cfg.d ** 2)
    phi = interferometer_phases(cfg, const)
    return DeltaPhi(approximate=approx,
                    exact=phi["RL"] - phi["LL"],
                    entangling=phi["RL"] + phi["LR"] - phi["LL"] - phi["RR"])


def final_interferometer_state(cfg: InterferometerPair,
                               const: PhysicalConstants = CONSTANTS) -> StateVector:
    """Normalized ``sum_ij exp(i phi_ij) |ij>`` on a 2x2 space (``L = 0``)."""
    phi = interferometer_phases(cfg, const)
    amps = np.array([np.exp(1j * phi[k]) for k in ARM_PAIRS]) / 2.0
    return StateVector(HilbertSpec((2, 2)), amps)


def eft_potential_corrections(m1: float, m2: float, r: float, lam: float = 1.0, xi: float = 1.0,
                              const: PhysicalConstants = CONSTANTS) -> tuple[float, float]:
    """Relative size of the post-Newtonian and one-loop quantum corrections.

    Returns ``(lam G (m1+m2) / (c^2 r), xi G hbar / (c^3 r^2))``.
    """
    require_positive(r=r)
    if m1 < 0 or m2 < 0:
        raise InvalidInputError("masses must be non-negative")
    post_newtonian = lam * const.G_N * (m1 + m2) / (const.c ** 2 * r)
    quantum = xi * const.G_N * const.hbar / (const.c ** 3 * r ** 2)
    return post_newtonian, quantum
