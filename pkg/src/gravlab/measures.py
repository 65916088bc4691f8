"""Entanglement and coherence witnesses used to tell the gravity models apart."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import InvalidInputError
from .qstate import DensityMatrix, HilbertSpec, StateVector

#: Negativity below this fraction of the trace norm counts as "no entanglement".
ZERO_ENTANGLEMENT_REL = 1e-7

_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.diag([1.0, -1.0]).astype(complex)


@dataclass(frozen=True)
class Bipartition:
    left_modes: tuple[int, ...]
    right_modes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "left_modes", tuple(sorted(int(i) for i in self.left_modes)))
        object.__setattr__(self, "right_modes", tuple(sorted(int(i) for i in self.right_modes)))

    @classmethod
    def split(cls, n_modes: int, left: Iterable[int]) -> "Bipartition":
        left = tuple(left)
        return cls(left, tuple(i for i in range(n_modes) if i not in left))

    def check(self, spec: HilbertSpec) -> None:
        left, right = set(self.left_modes), set(self.right_modes)
        if not left or not right:
            raise InvalidInputError("both sides of a bipartition must be non-empty")
        if left & right:
            raise InvalidInputError("bipartition sides overlap")
        if left | right != set(range(spec.n_modes)):
            raise InvalidInputError(
                f"bipartition {self.left_modes}|{self.right_modes} does not cover "
                f"{spec.n_modes} modes")


def default_cut(spec: HilbertSpec) -> Bipartition:
    """First mode versus the rest."""
    return Bipartition.split(spec.n_modes, (0,))


def partial_transpose(matrix: np.ndarray, dims, modes: Iterable[int]) -> np.ndarray:
    """Transpose the listed subsystems of ``matrix`` (shape ``prod(dims)^2``)."""
    dims = tuple(dims)
    n = len(dims)
    t = matrix.reshape(dims + dims)
    perm = list(range(2 * n))
    for k in modes:
        perm[k], perm[k + n] = perm[k + n], perm[k]
    d = int(np.prod(dims))
    return t.transpose(perm).reshape(d, d)


def negativity(rho: DensityMatrix | StateVector, cut: Bipartition | None = None) -> float:
    """Sum of the magnitudes of the negative eigenvalues of the partial transpose."""
    if isinstance(rho, StateVector):
        rho = rho.to_density()
    cut = default_cut(rho.spec) if cut is None else cut
    cut.check(rho.spec)
    pt = partial_transpose(rho.matrix, rho.spec.mode_dims, cut.right_modes)
    pt = 0.5 * (pt + pt.conj().T)
    eig = np.linalg.eigvalsh(pt)
    return float(-eig[eig < 0].sum())


def trace_norm(rho: DensityMatrix) -> float:
    return float(np.abs(np.linalg.eigvalsh(rho.matrix)).sum())


def is_entangled(rho: DensityMatrix | StateVector, cut: Bipartition | None = None) -> bool:
    if isinstance(rho, StateVector):
        rho = rho.to_density()
    return negativity(rho, cut) >= ZERO_ENTANGLEMENT_REL * trace_norm(rho)


def schmidt_coefficients(psi: StateVector, cut: Bipartition | None = None) -> np.ndarray:
    cut = default_cut(psi.spec) if cut is None else cut
    cut.check(psi.spec)
    dims = psi.spec.mode_dims
    order = cut.left_modes + cut.right_modes
    d_left = int(np.prod([dims[i] for i in cut.left_modes]))
    m = psi.amplitudes.reshape(dims).transpose(order).reshape(d_left, -1)
    return np.linalg.svd(m, compute_uv=False)


def entanglement_entropy(psi: StateVector, cut: Bipartition | None = None) -> float:
    """Von Neumann entropy (nats) of the reduced state of a normalized pure state."""
    if not psi.is_normalized(1e-8):
        raise InvalidInputError(f"state is not normalized (norm {psi.norm:.6g})")
    p = schmidt_coefficients(psi, cut) ** 2
    p = p[p > 1e-300]
    return float(-(p * np.log(p)).sum())


def bell_witness(state: StateVector) -> float:
    """``W = |<sx^1 sz^2 - sy^1 sz^2>|`` on a two-qubit state (``|L> = |0>``).

    Returns the raw value; interpreting it is left to the caller. Note that
    the operator has spectrum ``+-sqrt(2)`` and product states reach
    ``sqrt(2)`` too, so the value alone does not certify entanglement.
    """
    if state.spec.mode_dims != (2, 2):
        raise InvalidInputError(f"bell_witness needs a 2x2 state, got {state.spec.mode_dims}")
    op = np.kron(_SX - _SY, _SZ)
    psi = state.amplitudes
    return float(abs(np.vdot(psi, op @ psi)))


def coherence_offdiagonal(rho: DensityMatrix, i: int, j: int) -> complex:
    """Matrix element ``rho_ij``; its modulus is the visibility proxy."""
    d = rho.spec.dim
    if not (0 <= i < d and 0 <= j < d):
        raise InvalidInputError(f"indices ({i}, {j}) out of range for dimension {d}")
    return complex(rho.matrix[i, j])
