"""Schrodinger-Newton (mean-field) gravity on discrete branch bases.

Each particle sits in a superposition of position eigenstates ("branches").
The Newtonian potential is sourced by the *expectation value* of the mass
density, so a particle only ever sees a classical, branch-weighted source.
With the mean potential frozen over a step, every joint branch picks up a
phase that is a sum of single-particle terms: product states stay product.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .eft import ARMS, InterferometerPair
from .errors import InvalidInputError, SingularPotentialError
from .qstate import HilbertSpec, StateVector
from .quantities import CONSTANTS, PhysicalConstants, require_positive

DEFAULT_SOFTENING = 1e-12  # m
NORM_TOL = 1e-10


@dataclass(frozen=True)
class Particle:
    mass: float
    branches: Mapping[str, Sequence[float]]

    def __post_init__(self):
        require_positive(mass=self.mass)
        if not self.branches:
            raise InvalidInputError("a particle needs at least one branch")
        pos = {str(k): np.asarray(v, dtype=float).reshape(3) for k, v in self.branches.items()}
        object.__setattr__(self, "branches", pos)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self.branches)


BranchKey = tuple  # (particle index, branch label)


@dataclass(frozen=True)
class BranchConfiguration:
    """Particles, their branch positions, and joint branch amplitudes.

    ``amplitudes`` maps a tuple of branch labels (one per particle) to a
    complex amplitude; missing tuples have amplitude zero. ``distances``
    optionally overrides inter-particle branch distances, keyed by
    ``((i, a), (j, b))``; this allows idealized distance tables that have
    no embedding in three dimensions.
    """

    particles: tuple[Particle, ...]
    amplitudes: Mapping[tuple[str, ...], complex]
    distances: Mapping[tuple[BranchKey, BranchKey], float] = field(default_factory=dict)

    def __post_init__(self):
        particles = tuple(self.particles)
        if not particles:
            raise InvalidInputError("configuration has no particles")
        amps = {tuple(k): complex(v) for k, v in self.amplitudes.items()}
        for key in amps:
            if len(key) != len(particles):
                raise InvalidInputError(f"amplitude key {key} does not name one branch per particle")
            for p, label in zip(particles, key):
                if label not in p.branches:
                    raise InvalidInputError(f"unknown branch label {label!r}")
        norm2 = sum(abs(v) ** 2 for v in amps.values())
        if abs(norm2 - 1.0) > NORM_TOL:
            raise InvalidInputError(f"amplitudes are not normalized (sum |a|^2 = {norm2:.12g})")
        dist = {}
        for (a, b), r in self.distances.items():
            a, b = (int(a[0]), str(a[1])), (int(b[0]), str(b[1]))
            dist[(a, b)] = dist[(b, a)] = float(r)
        object.__setattr__(self, "particles", particles)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "distances", dist)

    @property
    def spec(self) -> HilbertSpec:
        return HilbertSpec(tuple(max(2, len(p.labels)) for p in self.particles))

    def marginals(self) -> list[dict[str, float]]:
        out = [{label: 0.0 for label in p.labels} for p in self.particles]
        for key, amp in self.amplitudes.items():
            w = abs(amp) ** 2
            for i, label in enumerate(key):
                out[i][label] += w
        return out

    def distance(self, a: BranchKey, b: BranchKey) -> float:
        if (a, b) in self.distances:
            return self.distances[(a, b)]
        pa = self.particles[a[0]].branches[a[1]]
        pb = self.particles[b[0]].branches[b[1]]
        return float(np.linalg.norm(pa - pb))

    def to_state_vector(self) -> StateVector:
        """Joint amplitudes on the product of per-particle branch bases."""
        spec = self.spec
        amps = np.zeros(spec.dim, dtype=complex)
        for key, amp in self.amplitudes.items():
            idx = tuple(p.labels.index(label) for p, label in zip(self.particles, key))
            amps[np.ravel_multi_index(idx, spec.mode_dims)] = amp
        return StateVector(spec, amps)

    def with_amplitudes(self, amplitudes: Mapping[tuple[str, ...], complex]) -> "BranchConfiguration":
        return BranchConfiguration(self.particles, amplitudes, self.distances)

    @classmethod
    def product(cls, particles: Sequence[Particle], local: Sequence[Mapping[str, complex]],
                distances=None) -> "BranchConfiguration":
        """Product state from one normalized amplitude map per particle."""
        if len(local) != len(particles):
            raise InvalidInputError("need one local amplitude map per particle")
        amps = {}
        for key in itertools.product(*(p.labels for p in particles)):
            a = 1.0 + 0j
            for i, label in enumerate(key):
                a *= complex(local[i].get(label, 0.0))
            if a != 0:
                amps[key] = a
        return cls(tuple(particles), amps, distances or {})


@dataclass(frozen=True)
class PointMass:
    particle: int
    label: str
    position: np.ndarray
    weight: float  # kg


def sn_mean_density(cfg: BranchConfiguration) -> list[PointMass]:
    """Expected mass density as weighted point masses (branch mass x Born weight)."""
    out = []
    for i, (p, marg) in enumerate(zip(cfg.particles, cfg.marginals())):
        for label in p.labels:
            out.append(PointMass(i, label, p.branches[label], p.mass * marg[label]))
    return out


def mean_potential(cfg: BranchConfiguration, particle: int, label: str, *,
                   include_self: bool = False, softening: float = DEFAULT_SOFTENING,
                   self_softening: float | None = None,
                   const: PhysicalConstants = CONSTANTS) -> float:
    """Newtonian potential (J/kg) of the mean density at one branch position.

    Sources belonging to ``particle`` itself are skipped unless
    ``include_self``; then they enter with distance floored at
    ``self_softening`` (defaults to ``softening``).
    """
    here = (particle, label)
    self_soft = softening if self_softening is None else self_softening
    phi = 0.0
    for src in sn_mean_density(cfg):
        if src.weight == 0.0:
            continue
        r = cfg.distance(here, (src.particle, src.label)) if (src.particle, src.label) != here else 0.0
        if src.particle == particle:
            if not include_self:
                continue
            phi -= const.G_N * src.weight / max(r, self_soft)
            continue
        if r < softening:
            raise SingularPotentialError(
                f"branch {here} coincides with source {(src.particle, src.label)} (r = {r:.3g} m)")
        phi -= const.G_N * src.weight / max(r, softening)
    return phi


def sn_branch_phases(cfg: BranchConfiguration, dt: float, *, include_self: bool = False,
                     softening: float = DEFAULT_SOFTENING, self_softening: float | None = None,
                     const: PhysicalConstants = CONSTANTS) -> list[dict[str, float]]:
    """Phase ``-dt m_i Phi(x_ib) / hbar`` acquired by each single-particle branch."""
    out = []
    for i, p in enumerate(cfg.particles):
        out.append({
            label: -dt * p.mass * mean_potential(cfg, i, label, include_self=include_self,
                                                 softening=softening,
                                                 self_softening=self_softening,
                                                 const=const) / const.hbar
            for label in p.labels})
    return out


def sn_branch_evolution(cfg: BranchConfiguration, dt: float, *, include_self: bool = False,
                        softening: float = DEFAULT_SOFTENING, self_softening: float | None = None,
                        const: PhysicalConstants = CONSTANTS) -> BranchConfiguration:
    """Advance by ``dt`` with the mean-field potential frozen at its current value."""
    if dt < 0:
        raise InvalidInputError("dt must be non-negative")
    phases = sn_branch_phases(cfg, dt, include_self=include_self, softening=softening,
                              self_softening=self_softening, const=const)
    new = {}
    for key, amp in cfg.amplitudes.items():
        theta = sum(phases[i][label] for i, label in enumerate(key))
        new[key] = amp * complex(math.cos(theta), math.sin(theta))
    return cfg.with_amplitudes(new)


def sn_threshold_mass(sigma_x: float, const: PhysicalConstants = CONSTANTS) -> float:
    """Mass above which self-gravity of a wavepacket of width ``sigma_x`` matters, kg."""
    require_positive(sigma_x=sigma_x)
    return (const.hbar ** 2 / (const.G_N * sigma_x)) ** (1.0 / 3.0)


def twin_interferometer_configuration(cfg: InterferometerPair) -> BranchConfiguration:
    """Both particles in ``(|L> + |R>)/sqrt 2`` with distances from ``cfg.d_ij``.

    Branch positions are placed on a line (``1L 1R 2L 2R``); the
    inter-particle distances are then overridden by the configured table.
    """
    dx, d = cfg.dx, cfg.d
    p1 = Particle(cfg.m, {"L": (0.0, 0.0, 0.0), "R": (dx, 0.0, 0.0)})
    p2 = Particle(cfg.m, {"L": (dx + d, 0.0, 0.0), "R": (2 * dx + d, 0.0, 0.0)})
    distances = {((0, a), (1, b)): cfg.d_ij[a + b] for a in ARMS for b in ARMS}
    half = {"L": 1 / math.sqrt(2), "R": 1 / math.sqrt(2)}
    return BranchConfiguration.product([p1, p2], [half, half], distances)
