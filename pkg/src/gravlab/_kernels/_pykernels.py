"""Pure numpy implementation of the hot kernels.

Mirrors ``_ckernels.pyx`` operation for operation. The uniform stream is
bit-identical between the two; transcendental functions may differ in the
last ulp, so downstream floats agree to rounding, not bitwise.
"""
from __future__ import annotations

import numpy as np

BACKEND = "python"

_M64 = np.uint64
_K_SEED = _M64(0x9E3779B97F4A7C15)
_K_STREAM = _M64(0xD1B54A32D192ED03)
_K_CTR = _M64(0x8CB92BA72F3D8DD7)
_C1 = _M64(0xBF58476D1CE4E5B9)
_C2 = _M64(0x94D049BB133111EB)
_TWO_PI = 2.0 * np.pi
_INV_2_53 = 1.0 / 9007199254740992.0

MC_CHUNK = 1 << 20


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _M64(30))) * _C1
    z = (z ^ (z >> _M64(27))) * _C2
    return z ^ (z >> _M64(31))


def stream_key(seed: int, stream: int) -> np.uint64:
    s = np.array([seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    t = np.array([stream & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix(_mix(s ^ _K_SEED) ^ (t + _K_STREAM))[0]


def _uniform_from_key(key, counters: np.ndarray) -> np.ndarray:
    c = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        h = _mix(np.asarray(key, dtype=np.uint64) ^ _mix(c + _K_CTR))
    return ((h >> _M64(11)).astype(np.float64) + 0.5) * _INV_2_53


def uniforms(seed: int, stream: int, counters) -> np.ndarray:
    """Uniform(0, 1) draws addressed by ``(seed, stream, counter)``."""
    return _uniform_from_key(stream_key(seed, stream), np.asarray(counters))


def normals(seed: int, stream: int, counters) -> np.ndarray:
    """Standard normals; draw ``k`` consumes uniform counters ``2k, 2k+1``."""
    c = np.asarray(counters, dtype=np.uint64)
    key = stream_key(seed, stream)
    u1 = _uniform_from_key(key, c * _M64(2))
    u2 = _uniform_from_key(key, c * _M64(2) + _M64(1))
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2)


#: Uniform draws consumed per Monte Carlo sample (two ball points).
MC_STRIDE = 10


def _ball_points(u: np.ndarray) -> np.ndarray:
    """Map uniform 5-tuples (n, 5) to points uniform in the unit ball.

    Direction from ``(z, phi)``; radius as the max of three uniforms, whose
    CDF is ``r^3``. This avoids ``cbrt`` and a second trig call.
    """
    z = 2.0 * u[:, 0] - 1.0
    c = np.cos(_TWO_PI * u[:, 1])
    sn = np.sqrt(np.maximum(0.0, 1.0 - c * c))
    sn = np.where(u[:, 1] < 0.5, sn, -sn)
    r = np.maximum(np.maximum(u[:, 2], u[:, 3]), u[:, 4])
    s = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.stack([r * s * c, r * s * sn, r * z], axis=1)


def _mc_samples(seed, stream, start, n):
    key = stream_key(seed, stream)
    ctr = np.arange(MC_STRIDE * start, MC_STRIDE * (start + n), dtype=np.uint64)
    u = _uniform_from_key(key, ctr).reshape(n, MC_STRIDE)
    return _ball_points(u[:, :5]), _ball_points(u[:, 5:])


def dp_mc_moments(D, R: float, seed: int, stream: int, n: int) -> tuple[float, float]:
    """Sum and sum of squares of the difference-density estimator.

    Sample ``k`` draws ``A1, A2`` uniform in the unit ball and returns
    ``f = 2/(R|A1-A2|) - 1/|D + R(A1-A2)| - 1/|D - R(A1-A2)|`` whose mean
    is ``(int int dM dM / r) / m^2`` for two equal spheres offset by ``D``.
    """
    D = np.asarray(D, dtype=float).reshape(3)
    total = 0.0
    total_sq = 0.0
    for start in range(0, n, MC_CHUNK):
        k = min(MC_CHUNK, n - start)
        a1, a2 = _mc_samples(seed, stream, start, k)
        delta = R * (a1 - a2)
        f = (2.0 / np.linalg.norm(delta, axis=1)
             - 1.0 / np.linalg.norm(D + delta, axis=1)
             - 1.0 / np.linalg.norm(D - delta, axis=1))
        total += float(f.sum())
        total_sq += float((f * f).sum())
    return total, total_sq


def sphere_pair_mc_moments(D, R1: float, R2: float, seed: int, stream: int,
                           n: int) -> tuple[float, float]:
    """Sum and sum of squares of ``1/|D + R1 A1 - R2 A2|`` over ``n`` samples."""
    D = np.asarray(D, dtype=float).reshape(3)
    total = 0.0
    total_sq = 0.0
    for start in range(0, n, MC_CHUNK):
        k = min(MC_CHUNK, n - start)
        a1, a2 = _mc_samples(seed, stream, start, k)
        f = 1.0 / np.linalg.norm(D + R1 * a1 - R2 * a2, axis=1)
        total += float(f.sum())
        total_sq += float((f * f).sum())
    return total, total_sq


def _rowdot(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """``A @ B.T`` summed in a fixed order, independent of the row count.

    BLAS picks different kernels for different shapes; feedback phases can
    be large enough that the last-bit differences matter.
    """
    return (A[:, None, :] * B[None, :, :]).sum(axis=-1)


def cc_run(psi0, mass_diag, kernel, u_free, gamma, dt, n_steps, seed, traj_start, n_traj,
           record_every, feedback, noisy, tau, hbar, m_planck, store_states=False):
    """Measurement + feedback trajectories for a diagonal mass-density model.

    Returns ``(status, bad_step, S1, S2re, S2im, states)``. ``S1`` sums
    ``psi psi^dag`` over trajectories at each recorded step; ``S2re/S2im``
    sum the squared real/imaginary parts (for standard errors). ``states``
    holds every step of the first trajectory when ``store_states``.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    M = np.asarray(mass_diag, dtype=float)            # (S, D)
    K = np.asarray(kernel, dtype=float)               # (S, S)
    n_sites, dim = M.shape
    n_rec = n_steps // record_every + 1
    S1 = np.zeros((n_rec, dim, dim), dtype=complex)
    S2re = np.zeros((n_rec, dim, dim))
    S2im = np.zeros((n_rec, dim, dim))
    states = np.zeros((n_steps + 1, dim), dtype=complex) if store_states else None

    psi = np.tile(psi0, (n_traj, 1))                  # (T, D)
    keys = np.array([stream_key(seed, traj_start + j) for j in range(n_traj)], dtype=np.uint64)
    sqrt_g = np.sqrt(gamma)
    sqrt_dt = np.sqrt(dt)
    site_ctr = np.arange(n_sites, dtype=np.uint64)

    def accumulate(r, psi):
        outer = psi[:, :, None] * psi[:, None, :].conj()
        S1[r] += outer.sum(axis=0)
        S2re[r] += (outer.real ** 2).sum(axis=0)
        S2im[r] += (outer.imag ** 2).sum(axis=0)

    accumulate(0, psi)
    if store_states:
        states[0] = psi[0]
    est = _rowdot(np.abs(psi) ** 2, M)                # (T, S)
    for k in range(n_steps):
        p = np.abs(psi) ** 2
        mean = _rowdot(p, M)                           # (T, S)
        ctr = _M64(k * n_sites) + site_ctr
        u1 = _uniform_from_key(keys[:, None], (ctr * _M64(2))[None, :])
        u2 = _uniform_from_key(keys[:, None], (ctr * _M64(2) + _M64(1))[None, :])
        dW = sqrt_dt * np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2)   # (T, S)
        xi = (M[None, :, :] - mean[:, :, None]) / m_planck                   # (T, S, D)
        factor = (1.0 + sqrt_g * np.einsum("tsd,ts->td", xi, dW)
                  - 0.5 * gamma * dt * np.einsum("tsd,tsd->td", xi, xi))
        psi = psi * factor
        norm = np.sqrt((np.abs(psi) ** 2).sum(axis=1))
        if not np.all(np.isfinite(norm)) or np.any(norm == 0.0):
            return 1, k, S1, S2re, S2im, states
        psi = psi / norm[:, None]
        if feedback:
            if noisy:
                raw = mean + m_planck * dW / (2.0 * sqrt_g * dt)
                est = raw if tau <= 0.0 else est + (dt / tau) * (raw - est)
            else:
                est = _rowdot(np.abs(psi) ** 2, M)
            phi = -_rowdot(est, K)                                           # (T, S)
            theta = -(dt / hbar) * _rowdot(phi, M.T)                           # (T, D)
            psi = psi * np.exp(1j * theta)
        if u_free is not None:
            psi = _rowdot(psi, np.asarray(u_free))
        if store_states:
            states[k + 1] = psi[0]
        if (k + 1) % record_every == 0:
            accumulate((k + 1) // record_every, psi)
    return 0, -1, S1, S2re, S2im, states
