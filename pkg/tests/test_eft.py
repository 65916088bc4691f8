import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gravlab import eft, measures
from gravlab.errors import InvalidInputError
from gravlab.qstate import Propagator, basis_state, evolve_exact
from gravlab.quantities import CONSTANTS

G, HBAR = CONSTANTS.G_N, CONSTANTS.hbar


def test_coupling_formula():
    pair = eft.OscillatorPair(1e-12, 1.0, 1e-6)
    assert eft.coupling_lambda(pair) == pytest.approx(G * 1e-12 / 1e-18, rel=1e-14)
    assert eft.coupling_lambda(pair) == pytest.approx(6.67e-5, rel=1e-3)


def test_displayed_fiducial_differs_from_formula():
    pair = eft.OscillatorPair(1e-12, 1.0, 1e-6)
    ratio = eft.coupling_lambda(pair) / eft.coupling_lambda_displayed(pair)
    assert 1e3 < ratio < 1.2e3


@given(st.floats(1e-15, 1e-9), st.floats(0.1, 1e3), st.floats(1e-4, 1e-2))
def test_with_coupling_inverts(m, omega, rel):
    pair = eft.OscillatorPair.with_coupling(m, omega, rel * omega)
    assert eft.coupling_lambda(pair) == pytest.approx(rel * omega, rel=1e-10)


def test_coupling_scalings():
    base = eft.coupling_lambda(eft.OscillatorPair(1e-12, 1.0, 1e-6))
    assert eft.coupling_lambda(eft.OscillatorPair(2e-12, 1.0, 1e-6)) == pytest.approx(2 * base)
    assert eft.coupling_lambda(eft.OscillatorPair(1e-12, 2.0, 1e-6)) == pytest.approx(base / 2)
    assert eft.coupling_lambda(eft.OscillatorPair(1e-12, 1.0, 2e-6)) == pytest.approx(base / 8)


@pytest.mark.parametrize("kw", [dict(m=0), dict(omega=-1), dict(d=0), dict(dim=1), dict(dim=2.5)])
def test_pair_validation(kw):
    base = dict(m=1e-12, omega=1.0, d=1e-6)
    base.update(kw)
    with pytest.raises(InvalidInputError):
        eft.OscillatorPair(**base)


def test_hamiltonian_structure():
    pair = eft.OscillatorPair(1e-12, 1.0, 1e-6, dim=4)
    H = eft.pair_hamiltonian(pair).matrix / HBAR
    lam = eft.coupling_lambda(pair)
    i10 = np.ravel_multi_index((1, 0), (4, 4))
    i01 = np.ravel_multi_index((0, 1), (4, 4))
    assert H[i10, i10] == pytest.approx(1.0)
    assert H[i10, i01] == pytest.approx(lam)
    # excitation number is conserved in the rotating-wave form
    n = np.add.outer(np.arange(4), np.arange(4)).ravel()
    nz = np.argwhere(np.abs(H) > 0)
    assert np.all(n[nz[:, 0]] == n[nz[:, 1]])
    full = eft.pair_hamiltonian(eft.OscillatorPair(1e-12, 1.0, 1e-6, dim=4, rwa=False)).matrix / HBAR
    assert full[0, np.ravel_multi_index((1, 1), (4, 4))] == pytest.approx(lam)


def test_single_excitation_swap():
    pair = eft.OscillatorPair(1e-12, 1.0, 1e-6, dim=4)
    lam = eft.coupling_lambda(pair)
    prop = Propagator(eft.pair_hamiltonian(pair))
    psi0 = basis_state(pair.spec, (1, 0))
    t = math.pi / (2 * lam)
    out = prop.evolve(psi0, t)
    assert abs(out.inner(basis_state(pair.spec, (0, 1)))) == pytest.approx(1, abs=1e-9)
    quarter = prop.evolve(psi0, t / 2)
    assert measures.negativity(quarter) == pytest.approx(0.5, abs=1e-9)


@settings(max_examples=20)
@given(st.floats(1e-4, 1e-2))
def test_small_time_negativity_equals_lambda_t(lt):
    pair = eft.OscillatorPair(1e-12, 1.0, 1e-6, dim=4)
    lam = eft.coupling_lambda(pair)
    neg = measures.negativity(evolve_exact(eft.pair_hamiltonian(pair), basis_state(pair.spec, (1, 0)), lt / lam))
    assert neg == pytest.approx(abs(math.sin(2 * lt)) / 2, rel=1e-9)
    assert abs(neg - lt) / lt < 1e-3


@pytest.mark.parametrize("lt", [0.0, 0.2, math.pi / 4, math.pi / 2])
def test_cat_closed_form(lt):
    pair = eft.OscillatorPair.with_coupling(1e-12, 1.0, 1e-6, dim=24)
    lam = eft.coupling_lambda(pair)
    psi0 = eft.cat_vacuum_state(1.0, pair.dim)
    out = Propagator(eft.pair_hamiltonian(pair)).evolve(psi0, lt / lam)
    assert out.fidelity(eft.evolve_cat_vacuum(pair, 1.0, lt / lam)) > 1 - 1e-9


def test_cat_closed_form_requires_rwa():
    pair = eft.OscillatorPair(1e-12, 1.0, 1e-6, dim=24, rwa=False)
    with pytest.raises(InvalidInputError):
        eft.evolve_cat_vacuum(pair, 1.0, 1.0)


# ------------------------------------------------------------- interferometers

def test_standard_geometries():
    cfg = eft.InterferometerPair.standard(1e-14, 1e-5, 1e-4, 1.0)
    assert cfg.d_ij == {"LL": 1.1e-4, "LR": 1.1e-4, "RL": 1e-4, "RR": 1.1e-4}
    col = eft.InterferometerPair.standard(1e-14, 1e-5, 1e-4, 1.0, "collinear")
    assert col.d_ij["LR"] == pytest.approx(1.2e-4)
    D = col.distance_matrix()
    assert np.allclose(D, D.T)
    assert D[1, 2] == pytest.approx(1e-4)
    with pytest.raises(InvalidInputError):
        eft.InterferometerPair.standard(1e-14, 1e-5, 1e-4, 1.0, "ring")
    with pytest.raises(InvalidInputError):
        eft.InterferometerPair(1e-14, 1e-5, 1e-4, 1.0, {"LL": 1.0})


def test_delta_phi_formulas():
    m, dx, d, T = 1e-14, 1e-6, 1e-4, 2.0
    cfg = eft.InterferometerPair.standard(m, dx, d, T)
    dp = eft.delta_phi(cfg)
    assert dp.approximate == pytest.approx(G * m * m * dx * T / (HBAR * d * d), rel=1e-14)
    assert dp.exact == pytest.approx(G * m * m * T / HBAR * (1 / d - 1 / (d + dx)), rel=1e-12)
    # exact and approximate agree to O(dx/d)
    assert dp.exact / dp.approximate == pytest.approx(1, abs=2 * dx / d)
    assert dp.entangling == pytest.approx(dp.exact, rel=1e-12)   # approximate geometry


def test_fiducial_delta_phi_value():
    # 1 ng, 1 um arms, 1 s, 1 mm separation gives ~0.63 rad
    dp = eft.delta_phi(eft.InterferometerPair.standard(1e-12, 1e-6, 1e-3, 1.0))
    assert 0.6 < dp.approximate < 0.7
    assert eft.DISPLAYED_DELTA_PHI / dp.approximate > 50


def test_delta_phi_warns_for_large_dx():
    with pytest.warns(UserWarning):
        eft.delta_phi(eft.InterferometerPair.standard(1e-14, 5e-5, 1e-4, 1.0))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        eft.delta_phi(eft.InterferometerPair.standard(1e-14, 1e-6, 1e-4, 1.0))


def test_final_state_entanglement_tracks_entangling_phase():
    for target in (1e-3, 0.3, math.pi / 2, math.pi):
        d, dx = 1e-4, 1e-5
        pref = target * d * (d + dx) / dx
        m = math.sqrt(pref * HBAR / G)
        cfg = eft.InterferometerPair.standard(m, dx, d, 1.0)
        neg = measures.negativity(eft.final_interferometer_state(cfg))
        assert neg == pytest.approx(abs(math.sin(target / 2)) / 2, abs=1e-10)


def test_potential_corrections():
    pn, q = eft.eft_potential_corrections(1e-6, 1e-6, 1e-6)
    assert pn == pytest.approx(G * 2e-6 / (CONSTANTS.c ** 2 * 1e-6), rel=1e-14)
    assert q == pytest.approx(CONSTANTS.L_p ** 2 / 1e-12, rel=1e-10)
    pn2, q2 = eft.eft_potential_corrections(1e-6, 1e-6, 2e-6, lam=3.0, xi=0.5)
    assert pn2 == pytest.approx(1.5 * pn)
    assert q2 == pytest.approx(q / 8)
    with pytest.raises(InvalidInputError):
        eft.eft_potential_corrections(-1, 1, 1)
    with pytest.raises(InvalidInputError):
        eft.eft_potential_corrections(1, 1, 0)
