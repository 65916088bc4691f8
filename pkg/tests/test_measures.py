import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gravlab import eft
from gravlab.errors import InvalidInputError
from gravlab.measures import (Bipartition, bell_witness, coherence_offdiagonal, entanglement_entropy,
                              is_entangled, negativity, partial_transpose, schmidt_coefficients,
                              trace_norm)
from gravlab.qstate import DensityMatrix, HilbertSpec, StateVector, tensor


def sv(dims, amps):
    amps = np.asarray(amps, dtype=complex)
    return StateVector(HilbertSpec(tuple(dims)), amps / np.linalg.norm(amps))


def random_state(rng, dims):
    d = int(np.prod(dims))
    return sv(dims, rng.normal(size=d) + 1j * rng.normal(size=d))


def random_unitary(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


BELL = sv((2, 2), [1, 0, 0, 1])


def test_bell_state_values():
    assert negativity(BELL) == pytest.approx(0.5, abs=1e-14)
    assert entanglement_entropy(BELL) == pytest.approx(math.log(2), abs=1e-14)
    assert np.allclose(schmidt_coefficients(BELL), [1 / math.sqrt(2)] * 2)
    assert is_entangled(BELL)


def test_product_state_zero():
    prod = tensor([sv((3,), [1, 2j, -1]), sv((2,), [0.3, 1])])
    assert negativity(prod) < 1e-14
    assert entanglement_entropy(prod) < 1e-12
    assert not is_entangled(prod)


def test_maximally_entangled_qutrits():
    psi = sv((3, 3), np.eye(3).ravel())
    assert negativity(psi) == pytest.approx(1.0, abs=1e-13)   # (d-1)/2


def test_werner_state_threshold():
    proj = BELL.to_density().matrix
    for p, expected in ((0.2, 0.0), (1 / 3, 0.0), (0.6, (3 * 0.6 - 1) / 4), (1.0, 0.5)):
        rho = DensityMatrix(HilbertSpec((2, 2)), p * proj + (1 - p) * np.eye(4) / 4)
        assert negativity(rho) == pytest.approx(expected, abs=1e-14)


def test_partial_transpose_is_involution():
    rng = np.random.default_rng(0)
    m = rng.normal(size=(12, 12))
    pt = partial_transpose(m, (3, 4), [1])
    assert np.allclose(partial_transpose(pt, (3, 4), [1]), m)
    assert np.allclose(partial_transpose(m, (3, 4), [0, 1]), m.T)


def test_cut_choice_for_three_modes():
    # Bell pair on modes 0,1 with mode 2 in a product state
    psi = tensor([BELL, sv((2,), [1, 0])])
    assert negativity(psi, Bipartition.split(3, [0])) == pytest.approx(0.5)
    assert negativity(psi, Bipartition.split(3, [2])) < 1e-14
    assert negativity(psi, Bipartition((0, 2), (1,))) == pytest.approx(0.5)


@pytest.mark.parametrize("cut", [Bipartition((), (0, 1)), Bipartition((0,), (0, 1)), Bipartition((0,), ())])
def test_bad_cuts(cut):
    with pytest.raises(InvalidInputError):
        negativity(BELL, cut)


def test_entropy_rejects_unnormalized():
    with pytest.raises(InvalidInputError):
        entanglement_entropy(StateVector(HilbertSpec((2, 2)), np.array([1, 0, 0, 1], dtype=complex)))


def test_coherence_offdiagonal():
    rho = BELL.to_density()
    assert coherence_offdiagonal(rho, 0, 3) == pytest.approx(0.5)
    with pytest.raises(InvalidInputError):
        coherence_offdiagonal(rho, 0, 4)


@settings(max_examples=30)
@given(st.sampled_from([(2, 2), (2, 3), (3, 3), (2, 4)]), st.integers(0, 2 ** 31))
def test_local_unitary_invariance(dims, seed):
    rng = np.random.default_rng(seed)
    psi = random_state(rng, dims)
    U = np.kron(random_unitary(rng, dims[0]), random_unitary(rng, dims[1]))
    phi = StateVector(psi.spec, U @ psi.amplitudes)
    assert abs(negativity(psi) - negativity(phi)) < 1e-10
    assert abs(entanglement_entropy(psi) - entanglement_entropy(phi)) < 1e-10


@settings(max_examples=30)
@given(st.sampled_from([(2, 2), (2, 3), (3, 3)]), st.integers(0, 2 ** 31))
def test_pure_state_negativity_from_schmidt(dims, seed):
    psi = random_state(np.random.default_rng(seed), dims)
    s = schmidt_coefficients(psi)
    expected = (s.sum() ** 2 - 1) / 2
    assert negativity(psi) == pytest.approx(expected, abs=1e-10)
    assert trace_norm(psi.to_density()) == pytest.approx(1, abs=1e-12)


@settings(max_examples=30)
@given(st.integers(0, 2 ** 31), st.integers(1, 4))
def test_mixtures_of_products_are_separable(seed, k):
    rng = np.random.default_rng(seed)
    w = rng.dirichlet(np.ones(k))
    rho = np.zeros((6, 6), dtype=complex)
    for wi in w:
        prod = tensor([random_state(rng, (2,)), random_state(rng, (3,))])
        rho += wi * np.outer(prod.amplitudes, prod.amplitudes.conj())
    assert negativity(DensityMatrix(HilbertSpec((2, 3)), rho)) < 1e-12


# -------------------------------------------------------------- Bell witness

def phase_state(dphi):
    return sv((2, 2), [1, 1, np.exp(1j * dphi), 1])


def test_witness_spectrum_bound():
    sx = np.array([[0, 1], [1, 0]])
    sy = np.array([[0, -1j], [1j, 0]])
    sz = np.diag([1, -1])
    eig = np.linalg.eigvalsh(np.kron(sx - sy, sz))
    assert np.allclose(sorted(eig), [-math.sqrt(2)] * 2 + [math.sqrt(2)] * 2)


def test_product_state_reaches_sqrt_two():
    # the +1 eigenvector of (sx - sy)/sqrt2 times |0>
    q = sv((2,), [1, np.exp(-1j * math.pi / 4)])
    psi = tensor([q, sv((2,), [1, 0])])
    assert negativity(psi) < 1e-14
    assert bell_witness(psi) == pytest.approx(math.sqrt(2), abs=1e-12)


def test_witness_at_pi_phase_is_exactly_one():
    # differential phase pi gives a maximally entangled state, yet W = 1
    psi = phase_state(math.pi)
    assert negativity(psi) == pytest.approx(0.5, abs=1e-12)
    assert bell_witness(psi) == pytest.approx(1.0, abs=1e-12)


def test_witness_zero_phase():
    assert bell_witness(phase_state(0.0)) == pytest.approx(0.0, abs=1e-12)


def test_witness_family_maximum():
    grid = np.linspace(0, 2 * math.pi, 4001)
    w = np.array([bell_witness(phase_state(p)) for p in grid])
    # this family peaks at 1/2 + 1/sqrt2, below what a product state reaches
    assert w.max() == pytest.approx(0.5 + 1 / math.sqrt(2), abs=1e-6)
    assert w.max() < math.sqrt(2)


def test_witness_on_interferometer_state():
    cfg = eft.InterferometerPair.standard(1e-14, 1e-5, 1e-4, 1.0)
    v = bell_witness(eft.final_interferometer_state(cfg))
    assert 0 <= v <= math.sqrt(2)


@settings(max_examples=50)
@given(st.integers(0, 2 ** 31))
def test_witness_never_exceeds_sqrt_two(seed):
    assert bell_witness(random_state(np.random.default_rng(seed), (2, 2))) <= math.sqrt(2) + 1e-12


def test_witness_requires_two_qubits():
    with pytest.raises(InvalidInputError):
        bell_witness(random_state(np.random.default_rng(0), (2, 3)))
