import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gravlab import eft, measures
from gravlab.errors import InvalidInputError, SingularPotentialError
from gravlab.quantities import CONSTANTS
from gravlab.semiclassical import (BranchConfiguration, Particle, mean_potential, sn_branch_evolution,
                                   sn_branch_phases, sn_mean_density, sn_threshold_mass,
                                   twin_interferometer_configuration)

G, HBAR = CONSTANTS.G_N, CONSTANTS.hbar
H = 1 / math.sqrt(2)


def two_particles(m=1e-14, d=1e-4):
    p1 = Particle(m, {"L": (0, 0, 0), "R": (1e-5, 0, 0)})
    p2 = Particle(m, {"L": (d, 0, 0), "R": (d + 1e-5, 0, 0)})
    return p1, p2


def test_threshold_mass():
    for s in (1e-9, 1e-6):
        m = sn_threshold_mass(s)
        assert m ** 3 == pytest.approx(HBAR ** 2 / (G * s), rel=1e-12)
    assert sn_threshold_mass(1e-9) == pytest.approx(5.5e-20, rel=0.05)
    with pytest.raises(InvalidInputError):
        sn_threshold_mass(0)


def test_configuration_validation():
    p1, p2 = two_particles()
    with pytest.raises(InvalidInputError):
        BranchConfiguration((p1, p2), {("L", "L"): 0.5})
    with pytest.raises(InvalidInputError):
        BranchConfiguration((p1, p2), {("L",): 1.0})
    with pytest.raises(InvalidInputError):
        BranchConfiguration((p1, p2), {("L", "X"): 1.0})
    with pytest.raises(InvalidInputError):
        Particle(1.0, {})
    with pytest.raises(InvalidInputError):
        Particle(-1.0, {"L": (0, 0, 0)})


def test_mean_density_weights():
    p1, p2 = two_particles()
    cfg = BranchConfiguration.product([p1, p2], [{"L": 0.6, "R": 0.8}, {"L": 1.0}])
    w = {(s.particle, s.label): s.weight for s in sn_mean_density(cfg)}
    assert w[(0, "L")] == pytest.approx(0.36 * p1.mass)
    assert w[(0, "R")] == pytest.approx(0.64 * p1.mass)
    assert w[(1, "R")] == 0.0
    assert sum(w.values()) == pytest.approx(p1.mass + p2.mass)


def test_point_source_potential():
    p1, p2 = two_particles(d=1e-3)
    cfg = BranchConfiguration.product([p1, p2], [{"L": 1.0}, {"L": 1.0}])
    assert mean_potential(cfg, 0, "L") == pytest.approx(-G * p2.mass / 1e-3, rel=1e-12)
    # R branch of particle 0 sees the same source at d - 1e-5
    assert mean_potential(cfg, 0, "R") == pytest.approx(-G * p2.mass / (1e-3 - 1e-5), rel=1e-12)


def test_self_interaction_switch():
    p1, p2 = two_particles()
    cfg = BranchConfiguration.product([p1, p2], [{"L": H, "R": H}, {"L": 1.0}])
    base = mean_potential(cfg, 0, "L")
    with_self = mean_potential(cfg, 0, "L", include_self=True, self_softening=1e-6)
    expected = -G * (p1.mass / 2) / 1e-5 - G * (p1.mass / 2) / 1e-6
    assert with_self - base == pytest.approx(expected, rel=1e-12)


def test_coincident_source_raises():
    p1 = Particle(1e-14, {"L": (0, 0, 0)})
    p2 = Particle(1e-14, {"L": (0, 0, 0)})
    cfg = BranchConfiguration.product([p1, p2], [{"L": 1.0}, {"L": 1.0}])
    with pytest.raises(SingularPotentialError):
        mean_potential(cfg, 0, "L")


def test_distance_override_is_symmetric():
    p1, p2 = two_particles()
    cfg = BranchConfiguration.product([p1, p2], [{"L": 1.0}, {"L": 1.0}], {((0, "L"), (1, "L")): 7.0})
    assert cfg.distance((1, "L"), (0, "L")) == 7.0
    assert cfg.distance((0, "L"), (0, "R")) == pytest.approx(1e-5)


def test_twin_interferometer_half_phase():
    """Each arm sources half a mass, so branch phase differences are dphi/2."""
    cfg = eft.InterferometerPair.standard(1e-14, 1e-5, 1e-4, 1.0)
    dphi = eft.delta_phi(cfg).exact
    ph = sn_branch_phases(twin_interferometer_configuration(cfg), cfg.dt)
    assert ph[0]["R"] - ph[0]["L"] == pytest.approx(dphi / 2, rel=1e-10)
    assert ph[1]["R"] - ph[1]["L"] == pytest.approx(-dphi / 2, rel=1e-10)


def test_twin_interferometer_product_output():
    cfg = eft.InterferometerPair.standard(3e-14, 1e-5, 1e-4, 1.0)
    out = sn_branch_evolution(twin_interferometer_configuration(cfg), cfg.dt)
    assert measures.negativity(out.to_state_vector()) < 1e-12
    assert out.to_state_vector().norm == pytest.approx(1, abs=1e-12)


def test_zero_time_is_identity():
    cfg = twin_interferometer_configuration(eft.InterferometerPair.standard(1e-14, 1e-5, 1e-4, 1.0))
    out = sn_branch_evolution(cfg, 0.0)
    for k, v in cfg.amplitudes.items():
        assert out.amplitudes[k] == v
    with pytest.raises(InvalidInputError):
        sn_branch_evolution(cfg, -1.0)


@settings(max_examples=40)
@given(st.floats(1e-16, 1e-12), st.floats(0.0, 1.0), st.floats(0.0, 2 * math.pi),
       st.floats(0.0, 1.0), st.floats(0.0, 2 * math.pi), st.floats(0.1, 10.0))
def test_product_states_stay_product(m, a, pa, b, pb, T):
    p1, p2 = two_particles(m)
    l1 = {"L": math.sqrt(a), "R": math.sqrt(1 - a) * complex(math.cos(pa), math.sin(pa))}
    l2 = {"L": math.sqrt(b), "R": math.sqrt(1 - b) * complex(math.cos(pb), math.sin(pb))}
    out = sn_branch_evolution(BranchConfiguration.product([p1, p2], [l1, l2]), T)
    psi = out.to_state_vector()
    assert abs(psi.norm - 1) < 1e-10
    assert measures.negativity(psi) < 1e-10
    # Born weights are untouched by a pure phase evolution
    for k, v in out.marginals()[0].items():
        assert v == pytest.approx(BranchConfiguration.product([p1, p2], [l1, l2]).marginals()[0][k], abs=1e-12)
