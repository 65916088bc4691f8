"""Gravitational collapse: Diosi-type decoherence rates and Penrose's energy.

Mass densities are unions of uniform spheres. The central object is the
Coulomb-like interaction integral of two spheres,

    I(a, b) = int int rho_a(r) rho_b(r') / |r - r'| d^3r d^3r'   [kg^2 / m],

which has a closed form for equal radii, a 1-D quadrature otherwise, and
``m_a m_b / D`` once the spheres stop overlapping. A Monte Carlo estimator
over the same six-dimensional integral serves as an independent check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate

from . import _kernels
from .errors import InvalidInputError, StepSizeError
from .qstate import POSITIVITY_TOL, DensityMatrix, OperatorMatrix
from .quantities import CONSTANTS, PhysicalConstants, require_positive

SELF_FACTOR = 6.0 / 5.0
MAX_RATE_STEP = 0.1
PENROSE_PREFACTORS = ("4piG", "G")
DEFAULT_MC_SAMPLES = 10_000_000


def _vec3(v, name: str) -> np.ndarray:
    a = np.asarray(v, dtype=float).reshape(-1)
    if a.shape != (3,) or not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{name} must be a finite 3-vector")
    return a


@dataclass(frozen=True)
class SphereMass:
    """Uniform sphere of mass ``m`` and radius ``R0`` centred at ``center``."""

    m: float
    R0: float
    center: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        require_positive(m=self.m, R0=self.R0)
        object.__setattr__(self, "center", tuple(_vec3(self.center, "center")))

    def moved_to(self, center) -> "SphereMass":
        return SphereMass(self.m, self.R0, tuple(_vec3(center, "center")))


@dataclass(frozen=True)
class SuperposedBody:
    """One sphere in a superposition of two centres ``x`` and ``y``."""

    sphere: SphereMass
    position_x: tuple
    position_y: tuple

    def __post_init__(self):
        object.__setattr__(self, "position_x", tuple(_vec3(self.position_x, "position_x")))
        object.__setattr__(self, "position_y", tuple(_vec3(self.position_y, "position_y")))

    @property
    def separation(self) -> np.ndarray:
        return np.subtract(self.position_x, self.position_y)

    @property
    def distance(self) -> float:
        return float(np.linalg.norm(self.separation))

    @classmethod
    def displaced(cls, m: float, R0: float, D: float) -> "SuperposedBody":
        """Sphere at the origin superposed with itself shifted by ``D`` along x."""
        return cls(SphereMass(m, R0), (0.0, 0.0, 0.0), (float(D), 0.0, 0.0))


@dataclass(frozen=True)
class MCEstimate:
    value: float
    stderr: float
    n_samples: int

    def agrees_with(self, reference: float, n_sigma: float = 3.0) -> bool:
        return abs(self.value - reference) <= n_sigma * self.stderr


# ---------------------------------------------------------------------------
# sphere interaction integral


def _equal_radius_overlap(s: float) -> float:
    """``I R / (m1 m2)`` for equal radii at centre distance ``s R`` (s <= 2)."""
    return SELF_FACTOR - s ** 2 / 2.0 + 3.0 * s ** 3 / 16.0 - s ** 5 / 160.0


def _sphere_kernel(r: float, R: float) -> float:
    """Potential of a unit-mass uniform sphere (without the ``-G``)."""
    if r >= R:
        return 1.0 / r
    return (3.0 * R * R - r * r) / (2.0 * R ** 3)


def _cap_area(s: float, D: float, R: float) -> float:
    """Area of the sphere of radius ``s`` (centre at distance ``D``) lying inside a ball of radius ``R``."""
    if s <= 0.0:
        return 0.0
    if D == 0.0:
        return 4.0 * math.pi * s * s if s < R else 0.0
    if s + D <= R:
        return 4.0 * math.pi * s * s
    if s >= D + R or s <= D - R:
        return 0.0
    cos0 = (s * s + D * D - R * R) / (2.0 * s * D)
    cos0 = min(1.0, max(-1.0, cos0))
    return 2.0 * math.pi * s * s * (1.0 - cos0)


def sphere_pair_integral(a: SphereMass, b: SphereMass) -> float:
    """``int int rho_a rho_b / |r - r'|`` in kg^2/m; includes the self case ``a is b``."""
    D = float(np.linalg.norm(np.subtract(a.center, b.center)))
    if D >= a.R0 + b.R0:
        return a.m * b.m / D
    if a.R0 == b.R0:
        return a.m * b.m / a.R0 * _equal_radius_overlap(D / a.R0)
    # shells of radius s around b's centre, weighted by the part inside a
    rho_a = a.m / (4.0 / 3.0 * math.pi * a.R0 ** 3)
    lo, hi = max(0.0, D - a.R0), D + a.R0
    pts = sorted({p for p in (b.R0, abs(D - a.R0)) if lo < p < hi})

    def integrand(s):
        return rho_a * _cap_area(s, D, a.R0) * _sphere_kernel(s, b.R0)

    val, _ = integrate.quad(integrand, lo, hi, points=pts or None, epsabs=0.0,
                            epsrel=1e-12, limit=200)
    return b.m * val


def sphere_pair_integral_mc(a: SphereMass, b: SphereMass, n: int = DEFAULT_MC_SAMPLES,
                            seed: int = 0, stream: int = 0) -> MCEstimate:
    """Monte Carlo estimate of :func:`sphere_pair_integral`."""
    n = int(n)
    if n < 2:
        raise InvalidInputError("need at least 2 samples")
    D = np.subtract(a.center, b.center)
    s1, s2 = _kernels.sphere_pair_mc_moments(D, a.R0, b.R0, seed, stream, n)
    return _moments_to_estimate(s1, s2, n, a.m * b.m)


def _moments_to_estimate(s1: float, s2: float, n: int, scale: float) -> MCEstimate:
    mean = s1 / n
    var = max(0.0, (s2 - n * mean * mean) / (n - 1))
    return MCEstimate(scale * mean, abs(scale) * math.sqrt(var / n), n)


# ---------------------------------------------------------------------------
# decoherence rates


def dp_rate(body: SuperposedBody, const: PhysicalConstants = CONSTANTS) -> float:
    """Decoherence rate (1/s) between the two branches of ``body``.

    ``(G/2 hbar) int int dM dM / |r - r'|`` with ``dM`` the difference of the
    two branch densities; for one sphere this is ``(G/hbar)[I_self - I(D)]``.
    """
    sx = body.sphere.moved_to(body.position_x)
    sy = body.sphere.moved_to(body.position_y)
    self_term = sphere_pair_integral(sx, sx)
    cross = sphere_pair_integral(sx, sy)
    return max(0.0, const.G_N / const.hbar * (self_term - cross))


def dp_rate_mc(body: SuperposedBody, n: int = DEFAULT_MC_SAMPLES, seed: int = 0, stream: int = 0,
               const: PhysicalConstants = CONSTANTS) -> MCEstimate:
    """Direct Monte Carlo of the six-dimensional rate integral.

    Both branches share the same random points (common random numbers), so
    self and cross pieces are sampled jointly; the estimate is unbiased.
    """
    n = int(n)
    if n < 2:
        raise InvalidInputError("need at least 2 samples")
    s1, s2 = _kernels.dp_mc_moments(body.separation, body.sphere.R0, seed, stream, n)
    scale = const.G_N * body.sphere.m ** 2 / (2.0 * const.hbar)
    return _moments_to_estimate(s1, s2, n, scale)


def dp_rate_composite(bodies: Sequence[SuperposedBody], const: PhysicalConstants = CONSTANTS) -> float:
    """Sum of rates of distinguishable displaced constituents."""
    return float(sum(dp_rate(b, const) for b in bodies))


def plateau_rate(m: float, R0: float, geometric_factor: float = SELF_FACTOR,
                 const: PhysicalConstants = CONSTANTS) -> float:
    """Large-separation limit ``geometric_factor * G m^2 / (hbar R0)``."""
    require_positive(m=m, R0=R0, geometric_factor=geometric_factor)
    return geometric_factor * const.G_N * m * m / (const.hbar * R0)


def r0_bound(m: float, coherence_time: float, geometric_factor: float = 1.0,
             const: PhysicalConstants = CONSTANTS) -> float:
    """Smallest regulator compatible with coherence over ``coherence_time``.

    Solves ``plateau_rate * coherence_time = 1`` for ``R0``. The default uses
    a geometric factor of 1; pass ``SELF_FACTOR`` for the uniform sphere.
    """
    require_positive(m=m, coherence_time=coherence_time, geometric_factor=geometric_factor)
    return geometric_factor * const.G_N * m * m * coherence_time / const.hbar


# ---------------------------------------------------------------------------
# master equation on a discrete set of positions


def dp_rate_matrix(sites: Sequence[SphereMass], const: PhysicalConstants = CONSTANTS) -> np.ndarray:
    """``Gamma_kl`` between every pair of position eigenstates.

    ``sites[k]`` is the mass distribution when the body is at position ``k``;
    all sites must share mass and radius.
    """
    sites = list(sites)
    if not sites:
        raise InvalidInputError("no sites")
    m, R = sites[0].m, sites[0].R0
    if any(s.m != m or s.R0 != R for s in sites):
        raise InvalidInputError("all sites must describe the same sphere")
    n = len(sites)
    G = np.zeros((n, n))
    for k in range(n):
        for l in range(k + 1, n):
            body = SuperposedBody(sites[k], sites[k].center, sites[l].center)
            G[k, l] = G[l, k] = dp_rate(body, const)
    return G


def dp_master_step(rho: DensityMatrix, sites: Sequence[SphereMass] | None, dt: float,
                   H: OperatorMatrix | None = None, *, rates: np.ndarray | None = None,
                   const: PhysicalConstants = CONSTANTS) -> DensityMatrix:
    """Advance ``rho`` by ``dt`` under the collapse master equation.

    The gravitational part is solved exactly on the position basis
    (``rho_kl -> rho_kl exp(-Gamma_kl dt)``); a Hamiltonian is folded in by
    Strang splitting. Pass ``rates`` to reuse a precomputed matrix.
    """
    if dt < 0:
        raise InvalidInputError("dt must be non-negative")
    if rates is None:
        if sites is None:
            raise InvalidInputError("need sites or a rate matrix")
        rates = dp_rate_matrix(sites, const)
    rates = np.asarray(rates, dtype=float)
    d = rho.spec.dim
    if rates.shape != (d, d):
        raise InvalidInputError(f"rate matrix {rates.shape} does not match dimension {d}")
    if dt * rates.max(initial=0.0) > MAX_RATE_STEP:
        raise StepSizeError(f"dt * max(Gamma) = {dt * rates.max():.3g} exceeds {MAX_RATE_STEP}")
    mat = rho.matrix
    if H is not None:
        if H.spec.dim != d:
            raise InvalidInputError("Hamiltonian dimension mismatch")
        w, V = np.linalg.eigh(H.matrix)
        half = (V * np.exp(-0.5j * dt * w / const.hbar)) @ V.conj().T
        mat = half @ mat @ half.conj().T
    mat = mat * np.exp(-rates * dt)
    if H is not None:
        mat = half @ mat @ half.conj().T
    mat = 0.5 * (mat + mat.conj().T)
    out = DensityMatrix(rho.spec, mat)
    if out.eigenvalues().min() < -POSITIVITY_TOL:
        raise StepSizeError("step produced a non-positive density matrix")
    return out


# ---------------------------------------------------------------------------
# Penrose


def penrose_delta_e(body_L: Sequence[SphereMass], body_R: Sequence[SphereMass],
                    prefactor: str = "4piG", const: PhysicalConstants = CONSTANTS) -> float:
    """Gravitational self-energy of the density difference, in joules.

    Each body is a list of uniform spheres whose densities add. ``prefactor``
    selects ``4 pi G`` (default) or plain ``G``.
    """
    if prefactor not in PENROSE_PREFACTORS:
        raise InvalidInputError(f"prefactor must be one of {PENROSE_PREFACTORS}")
    body_L, body_R = list(body_L), list(body_R)
    if not body_L or not body_R:
        raise InvalidInputError("each body needs at least one sphere")

    def cross(A, B):
        return sum(sphere_pair_integral(a, b) for a in A for b in B)

    energy = cross(body_L, body_L) + cross(body_R, body_R) - 2.0 * cross(body_L, body_R)
    scale = 4.0 * math.pi * const.G_N if prefactor == "4piG" else const.G_N
    return max(0.0, scale * energy)


def penrose_delta_e_mc(m: float, R0: float, D: float, n: int = DEFAULT_MC_SAMPLES, seed: int = 0,
                       stream: int = 0, prefactor: str = "4piG",
                       const: PhysicalConstants = CONSTANTS) -> MCEstimate:
    """Monte Carlo ``Delta E`` for one sphere displaced by ``D``."""
    if prefactor not in PENROSE_PREFACTORS:
        raise InvalidInputError(f"prefactor must be one of {PENROSE_PREFACTORS}")
    s1, s2 = _kernels.dp_mc_moments((float(D), 0.0, 0.0), R0, seed, stream, int(n))
    scale = (4.0 * math.pi if prefactor == "4piG" else 1.0) * const.G_N * m * m
    return _moments_to_estimate(s1, s2, int(n), scale)


def penrose_time(delta_e: float, const: PhysicalConstants = CONSTANTS) -> float:
    """``hbar / Delta E``; infinite when ``Delta E <= 0`` (no collapse)."""
    if not delta_e > 0.0:
        return math.inf
    return const.hbar / delta_e
