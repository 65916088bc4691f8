"""Classical-channel gravity: continuous weak measurement of mass density plus feedback.

Each particle occupies lattice sites through a discrete set of branches.
The mass density at site ``x`` is the diagonal operator ``M(x)``. One time
step of a trajectory is

1. an Ito weak measurement of every ``M(x)`` with strength ``gamma``
   (independent Wiener increments per site), then renormalization;
2. a feedback unitary ``exp(-i dt sum_x M(x) Phi(x) / hbar)`` where ``Phi``
   is the Newtonian potential of the *estimated* density;
3. optional free evolution under a fixed Hamiltonian.

Gaussian increments come from the counter-based stream keyed by
``(seed, trajectory, step, site)`` so ensembles can be split arbitrarily.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import _kernels
from .eft import ARMS, InterferometerPair
from .errors import InvalidInputError, NumericalBreakdownError
from .measures import negativity
from .qstate import DensityMatrix, HilbertSpec, OperatorMatrix, StateVector
from .quantities import CONSTANTS, PhysicalConstants, require_positive

MAX_GAMMA_DT = 1e-3
ESTIMATORS = ("ideal", "noisy")
DEFAULT_CHUNK = 2000


@dataclass(frozen=True)
class SiteOccupation:
    """A particle of mass ``mass`` whose branch ``label`` sits on site ``branch_sites[label]``."""

    mass: float
    branch_sites: Mapping[str, int]

    def __post_init__(self):
        require_positive(mass=self.mass)
        if not self.branch_sites:
            raise InvalidInputError("a particle needs at least one branch")
        object.__setattr__(self, "branch_sites", {str(k): int(v) for k, v in self.branch_sites.items()})

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self.branch_sites)


@dataclass(frozen=True)
class LatticeMassModel:
    """Sites, particle occupations, and the UV regulator ``R0``.

    ``distances`` optionally replaces the Euclidean site distances (an
    ``(S, S)`` symmetric matrix). Pair potentials use ``1 / max(r, R0)``.
    """

    sites: np.ndarray
    particles: tuple[SiteOccupation, ...]
    regulator_R0: float
    distances: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        sites = np.asarray(self.sites, dtype=float)
        if sites.ndim != 2 or sites.shape[1] != 3 or len(sites) == 0:
            raise InvalidInputError("sites must be a non-empty (S, 3) array")
        require_positive(regulator_R0=self.regulator_R0)
        particles = tuple(self.particles)
        if not particles:
            raise InvalidInputError("model has no particles")
        n = len(sites)
        for p in particles:
            for label, s in p.branch_sites.items():
                if not 0 <= s < n:
                    raise InvalidInputError(f"branch {label!r} points at missing site {s}")
        if self.distances is None:
            dist = np.linalg.norm(sites[:, None, :] - sites[None, :, :], axis=-1)
        else:
            dist = np.array(self.distances, dtype=float)
            if dist.shape != (n, n) or not np.allclose(dist, dist.T, rtol=0, atol=0):
                raise InvalidInputError("distances must be a symmetric (S, S) matrix")
        off = dist[~np.eye(n, dtype=bool)]
        if np.any(off <= 0.0):
            raise InvalidInputError("sites must be distinct")
        np.fill_diagonal(dist, 0.0)
        dist.setflags(write=False)
        sites.setflags(write=False)
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "particles", particles)
        object.__setattr__(self, "distances", dist)

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def spec(self) -> HilbertSpec:
        return HilbertSpec(tuple(len(p.labels) for p in self.particles))

    def basis_labels(self) -> list[tuple[str, ...]]:
        return list(itertools.product(*(p.labels for p in self.particles)))

    def mass_diag(self) -> np.ndarray:
        """``(S, D)`` array: eigenvalue of ``M(x)`` on each joint basis state."""
        out = np.zeros((self.n_sites, self.spec.dim))
        for k, key in enumerate(self.basis_labels()):
            for p, label in zip(self.particles, key):
                out[p.branch_sites[label], k] += p.mass
        return out

    def kernel(self, const: PhysicalConstants = CONSTANTS) -> np.ndarray:
        """``G / max(r_xy, R0)``; ``Phi = -kernel @ density``."""
        return const.G_N / np.maximum(self.distances, self.regulator_R0)

    @classmethod
    def two_site(cls, m: float, separation: float, R0: float) -> "LatticeMassModel":
        """One particle on two sites ``L`` and ``R``."""
        require_positive(separation=separation)
        return cls(np.array([[0.0, 0.0, 0.0], [separation, 0.0, 0.0]]),
                   (SiteOccupation(m, {"L": 0, "R": 1}),), R0)

    @classmethod
    def from_interferometer(cls, cfg: InterferometerPair, R0: float | None = None) -> "LatticeMassModel":
        """Four sites ``1L 1R 2L 2R`` with distances from ``cfg.d_ij``."""
        dx, d = cfg.dx, cfg.d
        sites = np.array([[0.0, 0, 0], [dx, 0, 0], [dx + d, 0, 0], [2 * dx + d, 0, 0]])
        parts = (SiteOccupation(cfg.m, {a: i for i, a in enumerate(ARMS)}),
                 SiteOccupation(cfg.m, {a: 2 + i for i, a in enumerate(ARMS)}))
        R0 = min(cfg.dx, min(cfg.d_ij.values())) * 1e-3 if R0 is None else R0
        return cls(sites, parts, R0, distances=cfg.distance_matrix())


@dataclass(frozen=True)
class TrajectoryConfig:
    gamma: float
    dt: float
    n_steps: int
    seed: int = 0
    n_traj: int = 1
    record_every: int = 1
    feedback: bool = True
    estimator: str = "ideal"
    tau: float = 0.0

    def __post_init__(self):
        if self.gamma < 0:
            raise InvalidInputError("gamma must be non-negative")
        require_positive(dt=self.dt)
        if self.gamma * self.dt > MAX_GAMMA_DT:
            raise InvalidInputError(f"gamma * dt = {self.gamma * self.dt:.3g} exceeds {MAX_GAMMA_DT}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 0:
            raise InvalidInputError("n_steps must be a non-negative integer")
        if int(self.n_traj) != self.n_traj or self.n_traj < 1:
            raise InvalidInputError("n_traj must be >= 1")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise InvalidInputError("record_every must be >= 1")
        if self.estimator not in ESTIMATORS:
            raise InvalidInputError(f"estimator must be one of {ESTIMATORS}")
        if self.estimator == "noisy" and self.feedback and self.gamma == 0:
            raise InvalidInputError("the noisy estimator needs gamma > 0")
        if self.tau < 0:
            raise InvalidInputError("tau must be non-negative")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise InvalidInputError("seed must fit in 64 bits")

    @property
    def total_time(self) -> float:
        return self.n_steps * self.dt


def _check_state(psi: StateVector, model: LatticeMassModel) -> None:
    if psi.spec.mode_dims != model.spec.mode_dims:
        raise InvalidInputError(f"state dims {psi.spec.mode_dims} do not match model {model.spec.mode_dims}")


def _site_vector(values, n: int, name: str) -> np.ndarray:
    if isinstance(values, Mapping):
        out = np.zeros(n)
        for k, v in values.items():
            if not 0 <= int(k) < n:
                raise InvalidInputError(f"{name}: unknown site {k}")
            out[int(k)] = v
        return out
    out = np.asarray(values, dtype=float).reshape(-1)
    if out.shape != (n,):
        raise InvalidInputError(f"{name} needs {n} entries")
    return out


def weak_measurement_step(psi: StateVector, model: LatticeMassModel, gamma: float, dW, dt: float,
                          const: PhysicalConstants = CONSTANTS) -> StateVector:
    """One Ito step of the conditioned state, followed by renormalization.

    ``dW`` holds one Gaussian increment of variance ``dt`` per site.
    """
    _check_state(psi, model)
    if gamma < 0 or dt <= 0:
        raise InvalidInputError("need gamma >= 0 and dt > 0")
    dW = _site_vector(dW, model.n_sites, "dW")
    M = model.mass_diag()
    p = np.abs(psi.amplitudes) ** 2
    p = p / p.sum()
    xi = (M - (M @ p)[:, None]) / const.M_p
    factor = 1.0 + math.sqrt(gamma) * (dW @ xi) - 0.5 * gamma * dt * (xi * xi).sum(axis=0)
    out = psi.amplitudes * factor
    norm = np.linalg.norm(out)
    if not np.isfinite(norm) or norm == 0.0:
        raise NumericalBreakdownError("state norm vanished in the measurement step; reduce dt")
    return StateVector(psi.spec, out / norm)


def newtonian_site_potential(model: LatticeMassModel, estimate,
                             const: PhysicalConstants = CONSTANTS) -> np.ndarray:
    """``Phi(x) = -sum_y G est(y) / max(r_xy, R0)`` in J/kg."""
    est = _site_vector(estimate, model.n_sites, "estimate")
    return -(model.kernel(const) @ est)


def feedback_unitary(psi: StateVector, model: LatticeMassModel, estimate, dt: float,
                     const: PhysicalConstants = CONSTANTS) -> StateVector:
    """Apply ``exp(-i dt sum_x M(x) Phi(x) / hbar)`` for the estimated density."""
    _check_state(psi, model)
    phi = newtonian_site_potential(model, estimate, const)
    theta = -(dt / const.hbar) * (phi @ model.mass_diag())
    return StateVector(psi.spec, psi.amplitudes * np.exp(1j * theta))


def mean_mass_density(psi: StateVector, model: LatticeMassModel) -> np.ndarray:
    """``<psi|M(x)|psi>`` per site, kg."""
    _check_state(psi, model)
    p = np.abs(psi.amplitudes) ** 2
    return model.mass_diag() @ (p / p.sum())


def _free_propagator(H: OperatorMatrix | None, model: LatticeMassModel, dt: float,
                     const: PhysicalConstants):
    if H is None:
        return None
    if H.spec.mode_dims != model.spec.mode_dims:
        raise InvalidInputError("Hamiltonian dims do not match the model")
    w, V = np.linalg.eigh(H.matrix)
    return (V * np.exp(-1j * dt * w / const.hbar)) @ V.conj().T


def _run(psi0: StateVector, model: LatticeMassModel, cfg: TrajectoryConfig, traj_start: int,
         n_traj: int, H, const, store_states: bool):
    _check_state(psi0, model)
    if not psi0.is_normalized(1e-8):
        raise InvalidInputError("initial state must be normalized")
    status, bad, S1, S2re, S2im, states = _kernels.cc_run(
        psi0.amplitudes, model.mass_diag(), model.kernel(const),
        _free_propagator(H, model, cfg.dt, const), float(cfg.gamma), float(cfg.dt),
        int(cfg.n_steps), int(cfg.seed), int(traj_start), int(n_traj), int(cfg.record_every),
        bool(cfg.feedback), cfg.estimator == "noisy", float(cfg.tau), const.hbar, const.M_p,
        store_states)
    if status != 0:
        raise NumericalBreakdownError(f"trajectory norm vanished at step {bad}; reduce dt", step=int(bad))
    return S1, S2re, S2im, states


def run_trajectory(psi0: StateVector, model: LatticeMassModel, cfg: TrajectoryConfig,
                   traj_index: int = 0, H: OperatorMatrix | None = None,
                   const: PhysicalConstants = CONSTANTS) -> list[StateVector]:
    """States at every step (``n_steps + 1`` of them) of one trajectory."""
    _, _, _, states = _run(psi0, model, cfg, traj_index, 1, H, const, True)
    return [StateVector(psi0.spec, s) for s in states]


@dataclass(frozen=True)
class EnsembleResult:
    """Trajectory-averaged density matrices at the recorded times."""

    spec: HilbertSpec
    times: np.ndarray
    rho: np.ndarray         # (n_rec, D, D)
    stderr_re: np.ndarray   # (n_rec, D, D)
    stderr_im: np.ndarray
    n_traj: int

    def density(self, k: int = -1) -> DensityMatrix:
        m = self.rho[k]
        return DensityMatrix(self.spec, 0.5 * (m + m.conj().T))

    def element(self, i: int, j: int) -> np.ndarray:
        return self.rho[:, i, j]

    def negativity_series(self, cut=None) -> np.ndarray:
        return np.array([negativity(self.density(k), cut) for k in range(len(self.times))])

    def expectation_series(self, op: OperatorMatrix) -> np.ndarray:
        return np.einsum("ij,kji->k", op.matrix, self.rho).real


def run_ensemble(psi0: StateVector, model: LatticeMassModel, cfg: TrajectoryConfig,
                 H: OperatorMatrix | None = None, chunk: int = DEFAULT_CHUNK,
                 const: PhysicalConstants = CONSTANTS) -> EnsembleResult:
    """Average ``|psi><psi|`` over ``cfg.n_traj`` trajectories.

    Trajectories run in chunks; each uses its own random stream, so the
    result does not depend on the chunk size beyond summation rounding.
    """
    if chunk < 1:
        raise InvalidInputError("chunk must be >= 1")
    D = psi0.spec.dim
    n_rec = cfg.n_steps // cfg.record_every + 1
    S1 = np.zeros((n_rec, D, D), dtype=complex)
    S2re = np.zeros((n_rec, D, D))
    S2im = np.zeros((n_rec, D, D))
    for start in range(0, cfg.n_traj, chunk):
        n = min(chunk, cfg.n_traj - start)
        a, b, c, _ = _run(psi0, model, cfg, start, n, H, const, False)
        S1 += a
        S2re += b
        S2im += c
    n = cfg.n_traj
    mean = S1 / n
    if n > 1:
        var_re = np.maximum(0.0, (S2re - n * mean.real ** 2) / (n - 1))
        var_im = np.maximum(0.0, (S2im - n * mean.imag ** 2) / (n - 1))
        se_re, se_im = np.sqrt(var_re / n), np.sqrt(var_im / n)
    else:
        se_re = np.full(mean.shape, np.inf)
        se_im = np.full(mean.shape, np.inf)
    times = np.arange(n_rec) * cfg.record_every * cfg.dt
    return EnsembleResult(psi0.spec, times, mean, se_re, se_im, n)


def ensemble_density(trajectories: Sequence[StateVector]) -> DensityMatrix:
    """Equal-weight mixture of pure states."""
    trajectories = list(trajectories)
    if not trajectories:
        raise InvalidInputError("no trajectories")
    spec = trajectories[0].spec
    if any(t.spec != spec for t in trajectories):
        raise InvalidInputError("trajectories have different Hilbert spaces")
    A = np.stack([t.amplitudes / t.norm for t in trajectories])
    rho = A.T @ A.conj() / len(A)
    return DensityMatrix(spec, 0.5 * (rho + rho.conj().T))


def two_site_dephasing_rate(m: float, gamma: float, const: PhysicalConstants = CONSTANTS) -> float:
    """Ensemble decay rate of ``rho_LR`` for one particle on two sites.

    Averaging the Ito step over ``dW`` gives the Lindblad dissipator
    ``gamma sum_x D[M(x)/M_p]``; each of the two sites removes
    ``(m/M_p)^2 / 2`` from the coherence, so the rate is ``gamma (m/M_p)^2``.
    """
    require_positive(m=m)
    if gamma < 0:
        raise InvalidInputError("gamma must be non-negative")
    return gamma * (m / const.M_p) ** 2


def decay_rate_estimate(result: EnsembleResult, i: int = 0, j: int = 1, k: int = -1) -> tuple[float, float]:
    """Rate and standard error from ``|rho_ij(t_k)| / |rho_ij(0)|``."""
    t = result.times[k]
    if t <= 0:
        raise InvalidInputError("need a recorded time > 0")
    z0 = abs(result.rho[0, i, j])
    z = result.rho[k, i, j]
    mag = abs(z)
    if z0 == 0 or mag == 0:
        raise InvalidInputError("coherence is zero; no rate to extract")
    se = math.hypot(result.stderr_re[k, i, j] * z.real, result.stderr_im[k, i, j] * z.imag) / mag
    return -math.log(mag / z0) / t, se / (mag * t)


def bec_coherence_bound(T_c: float, R0: float, m: float, const: PhysicalConstants = CONSTANTS) -> float:
    """``k_B T_c R0^3 / (G hbar m)`` in seconds."""
    require_positive(T_c=T_c, R0=R0, m=m)
    return const.k_B * T_c * R0 ** 3 / (const.G_N * const.hbar * m)
