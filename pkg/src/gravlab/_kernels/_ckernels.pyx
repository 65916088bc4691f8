# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_pykernels`` for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log, cos, sin, isfinite
from libc.stdint cimport uint64_t

cnp.import_array()

BACKEND = "cython"

cdef uint64_t K_SEED = 0x9E3779B97F4A7C15ULL
cdef uint64_t K_STREAM = 0xD1B54A32D192ED03ULL
cdef uint64_t K_CTR = 0x8CB92BA72F3D8DD7ULL
cdef double TWO_PI = 6.283185307179586
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline uint64_t mix(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t key_of(uint64_t seed, uint64_t stream) noexcept nogil:
    return mix(mix(seed ^ K_SEED) ^ (stream + K_STREAM))


cdef inline double unif(uint64_t key, uint64_t ctr) noexcept nogil:
    cdef uint64_t h = mix(key ^ mix(ctr + K_CTR))
    return (<double>(h >> 11) + 0.5) * INV_2_53


cdef inline double gauss(uint64_t key, uint64_t ctr) noexcept nogil:
    cdef double u1 = unif(key, 2 * ctr)
    cdef double u2 = unif(key, 2 * ctr + 1)
    return sqrt(-2.0 * log(u1)) * cos(TWO_PI * u2)


DEF MC_STRIDE = 10


cdef inline void ball(uint64_t key, uint64_t base, double* out) noexcept nogil:
    cdef double z = 2.0 * unif(key, base) - 1.0
    cdef double u1 = unif(key, base + 1)
    cdef double c = cos(TWO_PI * u1)
    cdef double sn = 1.0 - c * c
    cdef double r = unif(key, base + 2)
    cdef double w = unif(key, base + 3)
    if w > r:
        r = w
    w = unif(key, base + 4)
    if w > r:
        r = w
    if sn < 0.0:
        sn = 0.0
    sn = sqrt(sn)
    if u1 >= 0.5:
        sn = -sn
    cdef double s = 1.0 - z * z
    if s < 0.0:
        s = 0.0
    s = sqrt(s)
    out[0] = r * s * c
    out[1] = r * s * sn
    out[2] = r * z


def stream_key(seed, stream):
    return np.uint64(key_of(<uint64_t>(seed & 0xFFFFFFFFFFFFFFFF),
                            <uint64_t>(stream & 0xFFFFFFFFFFFFFFFF)))


def uniforms(seed, stream, counters):
    cdef uint64_t key = key_of(<uint64_t>(seed & 0xFFFFFFFFFFFFFFFF),
                               <uint64_t>(stream & 0xFFFFFFFFFFFFFFFF))
    cdef cnp.uint64_t[::1] c = np.ascontiguousarray(np.ravel(counters), dtype=np.uint64)
    out = np.empty(c.shape[0], dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    for i in range(c.shape[0]):
        o[i] = unif(key, c[i])
    return out.reshape(np.shape(counters))


def normals(seed, stream, counters):
    cdef uint64_t key = key_of(<uint64_t>(seed & 0xFFFFFFFFFFFFFFFF),
                               <uint64_t>(stream & 0xFFFFFFFFFFFFFFFF))
    cdef cnp.uint64_t[::1] c = np.ascontiguousarray(np.ravel(counters), dtype=np.uint64)
    out = np.empty(c.shape[0], dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    for i in range(c.shape[0]):
        o[i] = gauss(key, c[i])
    return out.reshape(np.shape(counters))


def dp_mc_moments(D, double R, seed, stream, Py_ssize_t n):
    cdef double[::1] d = np.ascontiguousarray(D, dtype=np.float64).reshape(3)
    cdef uint64_t key = key_of(<uint64_t>(seed & 0xFFFFFFFFFFFFFFFF),
                               <uint64_t>(stream & 0xFFFFFFFFFFFFFFFF))
    cdef double a1[3]
    cdef double a2[3]
    cdef double dl[3]
    cdef double total = 0.0, total_sq = 0.0, f, self_r, rp, rm, x
    cdef Py_ssize_t k, j
    cdef uint64_t base
    with nogil:
        for k in range(n):
            base = MC_STRIDE * <uint64_t>k
            ball(key, base, a1)
            ball(key, base + 5, a2)
            self_r = 0.0
            rp = 0.0
            rm = 0.0
            for j in range(3):
                dl[j] = R * (a1[j] - a2[j])
                self_r += dl[j] * dl[j]
                x = d[j] + dl[j]
                rp += x * x
                x = d[j] - dl[j]
                rm += x * x
            f = 2.0 / sqrt(self_r) - 1.0 / sqrt(rp) - 1.0 / sqrt(rm)
            total += f
            total_sq += f * f
    return total, total_sq


def sphere_pair_mc_moments(D, double R1, double R2, seed, stream, Py_ssize_t n):
    cdef double[::1] d = np.ascontiguousarray(D, dtype=np.float64).reshape(3)
    cdef uint64_t key = key_of(<uint64_t>(seed & 0xFFFFFFFFFFFFFFFF),
                               <uint64_t>(stream & 0xFFFFFFFFFFFFFFFF))
    cdef double a1[3]
    cdef double a2[3]
    cdef double total = 0.0, total_sq = 0.0, f, r2, x
    cdef Py_ssize_t k, j
    cdef uint64_t base
    with nogil:
        for k in range(n):
            base = MC_STRIDE * <uint64_t>k
            ball(key, base, a1)
            ball(key, base + 5, a2)
            r2 = 0.0
            for j in range(3):
                x = d[j] + R1 * a1[j] - R2 * a2[j]
                r2 += x * x
            f = 1.0 / sqrt(r2)
            total += f
            total_sq += f * f
    return total, total_sq


def cc_run(psi0, mass_diag, kernel, u_free, double gamma, double dt, Py_ssize_t n_steps,
           seed, traj_start, Py_ssize_t n_traj, Py_ssize_t record_every, bint feedback,
           bint noisy, double tau, double hbar, double m_planck, bint store_states=False):
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] p0 = np.ascontiguousarray(psi0, dtype=np.complex128)
    cdef double[:, ::1] M = np.ascontiguousarray(mass_diag, dtype=np.float64)
    cdef double[:, ::1] K = np.ascontiguousarray(kernel, dtype=np.float64)
    cdef Py_ssize_t n_sites = M.shape[0], dim = M.shape[1]
    cdef Py_ssize_t n_rec = n_steps // record_every + 1
    cdef bint has_u = u_free is not None
    cdef double[:, ::1] Ure, Uim
    if has_u:
        uf = np.ascontiguousarray(u_free, dtype=np.complex128)
        Ure = np.ascontiguousarray(uf.real)
        Uim = np.ascontiguousarray(uf.imag)

    S1_re_np = np.zeros((n_rec, dim, dim))
    S1_im_np = np.zeros((n_rec, dim, dim))
    S2re_np = np.zeros((n_rec, dim, dim))
    S2im_np = np.zeros((n_rec, dim, dim))
    cdef double[:, :, ::1] S1re = S1_re_np, S1im = S1_im_np, S2re = S2re_np, S2im = S2im_np
    states_np = np.zeros((n_steps + 1 if store_states else 1, dim), dtype=np.complex128)
    cdef double[:, ::1] st_re = np.zeros((n_steps + 1 if store_states else 1, dim))
    cdef double[:, ::1] st_im = np.zeros((n_steps + 1 if store_states else 1, dim))

    cdef double[::1] pre = np.empty(dim), pim = np.empty(dim)
    cdef double[::1] tre = np.empty(dim), tim = np.empty(dim)
    cdef double[::1] mean = np.empty(n_sites), dW = np.empty(n_sites)
    cdef double[::1] est = np.empty(n_sites), phi = np.empty(n_sites)
    cdef double[::1] p0re = np.ascontiguousarray(p0.real), p0im = np.ascontiguousarray(p0.imag)
    cdef double sqrt_g = sqrt(gamma), sqrt_dt = sqrt(dt)
    cdef Py_ssize_t t, k, s, x, y, i, j, r
    cdef uint64_t key, ctr
    cdef uint64_t seed64 = <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t start64 = <uint64_t>(traj_start & 0xFFFFFFFFFFFFFFFF)
    cdef double lin, quad, xi, fac, nrm, theta, a, b, ore, oim, raw
    cdef int status = 0
    cdef Py_ssize_t bad_step = -1

    with nogil:
        for t in range(n_traj):
            key = key_of(seed64, start64 + <uint64_t>t)
            for s in range(dim):
                pre[s] = p0re[s]
                pim[s] = p0im[s]
            # record 0
            for i in range(dim):
                for j in range(dim):
                    ore = pre[i] * pre[j] + pim[i] * pim[j]
                    oim = pim[i] * pre[j] - pre[i] * pim[j]
                    S1re[0, i, j] += ore
                    S1im[0, i, j] += oim
                    S2re[0, i, j] += ore * ore
                    S2im[0, i, j] += oim * oim
            if store_states and t == 0:
                for s in range(dim):
                    st_re[0, s] = pre[s]
                    st_im[0, s] = pim[s]
            for x in range(n_sites):
                a = 0.0
                for s in range(dim):
                    a += M[x, s] * (pre[s] * pre[s] + pim[s] * pim[s])
                est[x] = a
            for k in range(n_steps):
                for x in range(n_sites):
                    a = 0.0
                    for s in range(dim):
                        a += M[x, s] * (pre[s] * pre[s] + pim[s] * pim[s])
                    mean[x] = a
                    ctr = <uint64_t>(k * n_sites + x)
                    dW[x] = sqrt_dt * gauss(key, ctr)
                nrm = 0.0
                for s in range(dim):
                    lin = 0.0
                    quad = 0.0
                    for x in range(n_sites):
                        xi = (M[x, s] - mean[x]) / m_planck
                        lin += xi * dW[x]
                        quad += xi * xi
                    fac = 1.0 + sqrt_g * lin - 0.5 * gamma * dt * quad
                    pre[s] *= fac
                    pim[s] *= fac
                    nrm += pre[s] * pre[s] + pim[s] * pim[s]
                nrm = sqrt(nrm)
                if not isfinite(nrm) or nrm == 0.0:
                    status = 1
                    bad_step = k
                    break
                for s in range(dim):
                    pre[s] /= nrm
                    pim[s] /= nrm
                if feedback:
                    for x in range(n_sites):
                        if noisy:
                            raw = mean[x] + m_planck * dW[x] / (2.0 * sqrt_g * dt)
                            if tau <= 0.0:
                                est[x] = raw
                            else:
                                est[x] = est[x] + (dt / tau) * (raw - est[x])
                        else:
                            a = 0.0
                            for s in range(dim):
                                a += M[x, s] * (pre[s] * pre[s] + pim[s] * pim[s])
                            est[x] = a
                    for x in range(n_sites):
                        a = 0.0
                        for y in range(n_sites):
                            a += K[x, y] * est[y]
                        phi[x] = -a
                    for s in range(dim):
                        a = 0.0
                        for x in range(n_sites):
                            a += phi[x] * M[x, s]
                        theta = -(dt / hbar) * a
                        ore = pre[s] * cos(theta) - pim[s] * sin(theta)
                        oim = pre[s] * sin(theta) + pim[s] * cos(theta)
                        pre[s] = ore
                        pim[s] = oim
                if has_u:
                    for i in range(dim):
                        a = 0.0
                        b = 0.0
                        for j in range(dim):
                            a += Ure[i, j] * pre[j] - Uim[i, j] * pim[j]
                            b += Ure[i, j] * pim[j] + Uim[i, j] * pre[j]
                        tre[i] = a
                        tim[i] = b
                    for i in range(dim):
                        pre[i] = tre[i]
                        pim[i] = tim[i]
                if store_states and t == 0:
                    for s in range(dim):
                        st_re[k + 1, s] = pre[s]
                        st_im[k + 1, s] = pim[s]
                if (k + 1) % record_every == 0:
                    r = (k + 1) // record_every
                    for i in range(dim):
                        for j in range(dim):
                            ore = pre[i] * pre[j] + pim[i] * pim[j]
                            oim = pim[i] * pre[j] - pre[i] * pim[j]
                            S1re[r, i, j] += ore
                            S1im[r, i, j] += oim
                            S2re[r, i, j] += ore * ore
                            S2im[r, i, j] += oim * oim
            if status != 0:
                break

    S1 = S1_re_np + 1j * S1_im_np
    states = None
    if store_states:
        states = np.asarray(st_re) + 1j * np.asarray(st_im)
    return status, bad_step, S1, S2re_np, S2im_np, states
