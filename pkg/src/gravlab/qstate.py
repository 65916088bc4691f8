"""Dense state and operator core on truncated tensor-product Hilbert spaces.

Modes are either truncated bosonic oscillators (Fock dimension ``N``) or
discrete branch bases (dimension 2 for an interferometer ``|L>, |R>``).
Everything is a dense numpy array; the largest instances in this package
are two oscillators at ``N = 40`` (dimension 1600).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammainc

from .errors import InvalidInputError, TruncationError
from .quantities import CONSTANTS, PhysicalConstants

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-8
NORM_TOL = 1e-10

#: Fock truncation rule: tail probability below this, plus a level margin.
TAIL_TOL = 1e-12
TRUNCATION_MARGIN = 5


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class HilbertSpec:
    mode_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.mode_dims)
        if not dims:
            raise InvalidInputError("HilbertSpec needs at least one mode")
        if any(d < 2 for d in dims):
            raise InvalidInputError(f"every mode dimension must be >= 2, got {dims}")
        object.__setattr__(self, "mode_dims", dims)

    @property
    def dim(self) -> int:
        return int(np.prod(self.mode_dims))

    @property
    def n_modes(self) -> int:
        return len(self.mode_dims)

    def __add__(self, other: "HilbertSpec") -> "HilbertSpec":
        return HilbertSpec(self.mode_dims + other.mode_dims)


def _as_spec(spec) -> HilbertSpec:
    if isinstance(spec, HilbertSpec):
        return spec
    if isinstance(spec, int):
        return HilbertSpec((spec,))
    return HilbertSpec(tuple(spec))


@dataclass(frozen=True, eq=False)
class StateVector:
    spec: HilbertSpec
    amplitudes: np.ndarray

    def __post_init__(self):
        spec = _as_spec(self.spec)
        amps = _frozen(np.ravel(self.amplitudes))
        if amps.shape != (spec.dim,):
            raise InvalidInputError(
                f"amplitude length {amps.size} does not match dimension {spec.dim}")
        object.__setattr__(self, "spec", spec)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> "StateVector":
        n = self.norm
        if n == 0.0:
            raise InvalidInputError("cannot normalize the zero vector")
        return StateVector(self.spec, self.amplitudes / n)

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm - 1.0) <= tol

    def inner(self, other: "StateVector") -> complex:
        """<self|other>."""
        _check_same_spec(self.spec, other.spec)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: "StateVector") -> float:
        return abs(self.inner(other)) ** 2

    def to_density(self) -> "DensityMatrix":
        return DensityMatrix(self.spec, np.outer(self.amplitudes, self.amplitudes.conj()))

    def __repr__(self):
        return f"StateVector(mode_dims={self.spec.mode_dims}, norm={self.norm:.12g})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace matrix. Positivity is checked by :meth:`validate`."""

    spec: HilbertSpec
    matrix: np.ndarray

    def __post_init__(self):
        spec = _as_spec(self.spec)
        mat = _frozen(self.matrix)
        if mat.shape != (spec.dim, spec.dim):
            raise InvalidInputError(f"matrix shape {mat.shape} does not match dimension {spec.dim}")
        if np.max(np.abs(mat - mat.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise InvalidInputError("density matrix is not Hermitian")
        if abs(np.trace(mat) - 1.0) > TRACE_TOL:
            raise InvalidInputError(f"density matrix trace {np.trace(mat).real:.3g} != 1")
        object.__setattr__(self, "spec", spec)
        object.__setattr__(self, "matrix", mat)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def validate(self) -> "DensityMatrix":
        if self.eigenvalues().min() < -POSITIVITY_TOL:
            raise InvalidInputError("density matrix has negative eigenvalues")
        return self

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def __repr__(self):
        return f"DensityMatrix(mode_dims={self.spec.mode_dims})"


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    spec: HilbertSpec
    matrix: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        spec = _as_spec(self.spec)
        mat = _frozen(self.matrix)
        if mat.shape != (spec.dim, spec.dim):
            raise InvalidInputError(f"operator shape {mat.shape} does not match dimension {spec.dim}")
        if self.hermitian and not _is_hermitian(mat):
            raise InvalidInputError("operator flagged Hermitian but A != A^dagger")
        object.__setattr__(self, "spec", spec)
        object.__setattr__(self, "matrix", mat)

    @property
    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.spec, self.matrix.conj().T, self.hermitian)

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            _check_same_spec(self.spec, other.spec)
            return OperatorMatrix(self.spec, self.matrix @ other.matrix)
        if isinstance(other, StateVector):
            _check_same_spec(self.spec, other.spec)
            return StateVector(self.spec, self.matrix @ other.amplitudes)
        return NotImplemented

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        _check_same_spec(self.spec, other.spec)
        return OperatorMatrix(self.spec, self.matrix + other.matrix,
                              self.hermitian and other.hermitian)

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        _check_same_spec(self.spec, other.spec)
        return OperatorMatrix(self.spec, self.matrix - other.matrix,
                              self.hermitian and other.hermitian)

    def scale(self, factor: complex) -> "OperatorMatrix":
        herm = self.hermitian and np.isreal(factor)
        return OperatorMatrix(self.spec, factor * self.matrix, bool(herm))

    def __repr__(self):
        return f"OperatorMatrix(mode_dims={self.spec.mode_dims}, hermitian={self.hermitian})"


def _is_hermitian(mat: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    # relative tolerance: Hamiltonians in joules sit near 1e-34
    scale = float(np.max(np.abs(mat), initial=0.0))
    if scale == 0.0:
        return True
    return float(np.max(np.abs(mat - mat.conj().T))) <= tol * scale


def _check_same_spec(a: HilbertSpec, b: HilbertSpec) -> None:
    if a.mode_dims != b.mode_dims:
        raise InvalidInputError(f"incompatible Hilbert spaces {a.mode_dims} vs {b.mode_dims}")


# --------------------------------------------------------------------------
# construction


def ladder_operators(dim: int) -> tuple[OperatorMatrix, OperatorMatrix]:
    """Truncated annihilation and creation operators ``(a, a^dagger)``."""
    if int(dim) != dim or dim < 2:
        raise InvalidInputError(f"dim must be an integer >= 2, got {dim!r}")
    dim = int(dim)
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)
    spec = HilbertSpec((dim,))
    return OperatorMatrix(spec, a), OperatorMatrix(spec, a.conj().T)


def number_operator(dim: int) -> OperatorMatrix:
    return OperatorMatrix(HilbertSpec((dim,)), np.diag(np.arange(dim, dtype=complex)), True)


def identity(dims) -> OperatorMatrix:
    spec = _as_spec(dims)
    return OperatorMatrix(spec, np.eye(spec.dim, dtype=complex), True)


def basis_state(spec, index: int | Sequence[int]) -> StateVector:
    """Computational basis vector; ``index`` may be a per-mode tuple."""
    spec = _as_spec(spec)
    if not isinstance(index, (int, np.integer)):
        index = int(np.ravel_multi_index(tuple(index), spec.mode_dims))
    if not 0 <= index < spec.dim:
        raise InvalidInputError(f"basis index {index} out of range")
    amps = np.zeros(spec.dim, dtype=complex)
    amps[index] = 1.0
    return StateVector(spec, amps)


def fock_state(n: int, dim: int) -> StateVector:
    return basis_state(HilbertSpec((dim,)), n)


def coherent_tail(alpha: complex, dim: int) -> float:
    """Probability weight of ``|alpha>`` on levels ``n >= dim``."""
    mean = abs(alpha) ** 2
    if mean == 0.0:
        return 0.0
    # P(Poisson(mean) >= dim) is the regularized lower incomplete gamma
    return float(gammainc(dim, mean))


def required_dim(alpha: complex) -> int:
    """Smallest accepted truncation for ``|alpha>``: tail < 1e-12 plus margin."""
    n = 2
    while coherent_tail(alpha, n) >= TAIL_TOL:
        n += 1
    return n + TRUNCATION_MARGIN


def _check_truncation(alpha: complex, dim: int) -> None:
    if int(dim) != dim or dim < 2:
        raise InvalidInputError(f"dim must be an integer >= 2, got {dim!r}")
    tail = coherent_tail(alpha, dim)
    if tail >= TAIL_TOL:
        need = required_dim(alpha)
        raise TruncationError(
            f"dim={dim} leaves tail weight {tail:.2e} for |alpha|={abs(alpha):.3g}; "
            f"use dim >= {need}", need)


def _coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    n = np.arange(dim)
    # log-space to avoid overflow in n! for large truncations
    log_mag = -0.5 * abs(alpha) ** 2 - 0.5 * np.array([math.lgamma(k + 1) for k in n])
    if alpha == 0:
        amps = np.zeros(dim, dtype=complex)
        amps[0] = 1.0
        return amps
    log_mag = log_mag + n * math.log(abs(alpha))
    return np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))


def coherent_state(alpha: complex, dim: int) -> StateVector:
    """Truncated coherent state ``|alpha>``, renormalized after truncation.

    Raises :class:`TruncationError` when more than 1e-12 of the Poisson
    weight falls outside the kept levels.
    """
    _check_truncation(alpha, dim)
    return StateVector(HilbertSpec((int(dim),)), _coherent_amplitudes(complex(alpha), int(dim))).normalize()


def cat_state(alpha: complex, dim: int) -> StateVector:
    """Even cat ``(|alpha> + |-alpha>)`` normalized including the branch overlap."""
    _check_truncation(alpha, dim)
    amps = _coherent_amplitudes(complex(alpha), int(dim)) + _coherent_amplitudes(-complex(alpha), int(dim))
    return StateVector(HilbertSpec((int(dim),)), amps).normalize()


def tensor(items: Sequence) -> OperatorMatrix | StateVector:
    """Kronecker product of a list of states or a list of operators."""
    items = list(items)
    if not items:
        raise InvalidInputError("tensor() of an empty list")
    if all(isinstance(x, StateVector) for x in items):
        amps = items[0].amplitudes
        dims = items[0].spec.mode_dims
        for x in items[1:]:
            amps = np.kron(amps, x.amplitudes)
            dims = dims + x.spec.mode_dims
        return StateVector(HilbertSpec(dims), amps)
    if all(isinstance(x, OperatorMatrix) for x in items):
        mat = items[0].matrix
        dims = items[0].spec.mode_dims
        herm = items[0].hermitian
        for x in items[1:]:
            mat = np.kron(mat, x.matrix)
            dims = dims + x.spec.mode_dims
            herm = herm and x.hermitian
        return OperatorMatrix(HilbertSpec(dims), mat, herm)
    raise InvalidInputError("tensor() needs all states or all operators")


def embed(op: OperatorMatrix, mode: int, spec: HilbertSpec) -> OperatorMatrix:
    """Lift a single-mode operator onto ``spec`` acting on ``mode``."""
    spec = _as_spec(spec)
    if op.spec.mode_dims != (spec.mode_dims[mode],):
        raise InvalidInputError("operator dimension does not match the target mode")
    parts = [identity(d) for d in spec.mode_dims]
    parts[mode] = op
    return tensor(parts)


# --------------------------------------------------------------------------
# dynamics and expectation values


class Propagator:
    """Cached spectral decomposition of a Hermitian Hamiltonian (in joules).

    Repeated calls at different times reuse the eigensystem.
    """

    def __init__(self, H: OperatorMatrix, const: PhysicalConstants = CONSTANTS):
        if not _is_hermitian(H.matrix):
            raise InvalidInputError("Hamiltonian is not Hermitian")
        self.spec = H.spec
        herm = 0.5 * (H.matrix + H.matrix.conj().T)
        # diagonalize in rad/s so eigenvector tolerances are not set by hbar
        self.frequencies, self.vectors = np.linalg.eigh(herm / const.hbar)

    def evolve(self, psi: StateVector, t: float) -> StateVector:
        _check_same_spec(self.spec, psi.spec)
        coeffs = self.vectors.conj().T @ psi.amplitudes
        return StateVector(self.spec, self.vectors @ (np.exp(-1j * self.frequencies * t) * coeffs))

    def unitary(self, t: float) -> np.ndarray:
        return (self.vectors * np.exp(-1j * self.frequencies * t)) @ self.vectors.conj().T


def evolve_exact(H: OperatorMatrix, psi: StateVector, t: float,
                 const: PhysicalConstants = CONSTANTS) -> StateVector:
    """``exp(-i H t / hbar) psi`` by Hermitian eigendecomposition."""
    return Propagator(H, const).evolve(psi, t)


def _normalize_modes(keep: Iterable[int], n_modes: int) -> list[int]:
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise InvalidInputError("keep must name at least one mode")
    if keep[0] < 0 or keep[-1] >= n_modes:
        raise InvalidInputError(f"mode index out of range for {n_modes} modes: {keep}")
    return keep


def reduced_matrix(matrix: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Partial trace of a raw matrix; ``keep`` must be sorted and valid."""
    n = len(dims)
    t = matrix.reshape(tuple(dims) + tuple(dims))
    traced = [k for k in range(n) if k not in keep]
    # trace the highest axes first so lower indices stay put
    for k in sorted(traced, reverse=True):
        m = t.ndim // 2
        t = np.trace(t, axis1=k, axis2=k + m)
    d = int(np.prod([dims[k] for k in keep]))
    return t.reshape(d, d)


def partial_trace(rho: DensityMatrix | StateVector, keep: Iterable[int]) -> DensityMatrix:
    """Reduced density matrix on the modes in ``keep`` (in ascending order)."""
    if isinstance(rho, StateVector):
        rho = rho.to_density()
    keep = _normalize_modes(keep, rho.spec.n_modes)
    mat = reduced_matrix(rho.matrix, rho.spec.mode_dims, keep)
    mat = 0.5 * (mat + mat.conj().T)
    return DensityMatrix(HilbertSpec(tuple(rho.spec.mode_dims[k] for k in keep)), mat)


def weak_value_expectation(A: OperatorMatrix, psi: StateVector) -> float | complex:
    """``<psi|A|psi>``; returned as a float when ``A`` is flagged Hermitian."""
    _check_same_spec(A.spec, psi.spec)
    value = complex(np.vdot(psi.amplitudes, A.matrix @ psi.amplitudes))
    if A.hermitian:
        return value.real
    return value


def expectation(A: OperatorMatrix, rho: DensityMatrix) -> complex:
    _check_same_spec(A.spec, rho.spec)
    return complex(np.trace(A.matrix @ rho.matrix))
