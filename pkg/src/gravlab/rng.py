"""Counter-based random streams.

A draw is a pure function of ``(seed, stream, counter)``: no hidden state,
so trajectories and Monte Carlo chunks can run in any order (or in
parallel) and still reproduce bit for bit on a given backend.

Counter layouts used in the package:

* classical channel: ``stream = trajectory index``,
  ``counter = step * n_sites + site`` (one normal per site per step);
* collapse Monte Carlo: one stream per geometry, sample ``k`` uses uniform
  counters ``10k .. 10k+9``.
"""
from __future__ import annotations

import numpy as np

from . import _kernels


def uniforms(seed: int, stream: int, counters) -> np.ndarray:
    """Uniform(0, 1) values, never exactly 0 or 1."""
    return _kernels.uniforms(int(seed), int(stream), np.asarray(counters, dtype=np.uint64))


def normals(seed: int, stream: int, counters) -> np.ndarray:
    """Standard normal values (Box-Muller on counters ``2k`` and ``2k+1``)."""
    return _kernels.normals(int(seed), int(stream), np.asarray(counters, dtype=np.uint64))


def wiener_increments(seed: int, traj_index: int, step: int, n_sites: int, dt: float) -> np.ndarray:
    """The per-site ``dW`` used by trajectory ``traj_index`` at ``step``."""
    ctr = np.arange(step * n_sites, (step + 1) * n_sites, dtype=np.uint64)
    return np.sqrt(dt) * normals(seed, traj_index, ctr)
