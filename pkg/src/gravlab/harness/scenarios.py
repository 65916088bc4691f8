"""Scenario dispatch and the model-comparison table."""
from __future__ import annotations

import math
import warnings

import numpy as np

from .. import classical_channel as cc
from .. import collapse, eft, estimates, measures, semiclassical
from ..errors import ConfigError
from ..qstate import HilbertSpec, StateVector, basis_state, evolve_exact
from .config import ScenarioConfig
from .records import (EXACT, MONTE_CARLO, NOT_IN_SOURCE, ORDER_OF_MAGNITUDE, SIMULATION,
                      UNSPECIFIED, Observable, ResultRecord)

#: Wavepacket width used for the Schrodinger-Newton mass threshold in the table, m.
TABLE_SIGMA_X = 1e-9
#: BEC example: critical temperature (K), regulator (m), atomic mass (kg).
TABLE_BEC = (1e-7, 1e-15, 1e-25)
#: Matter-wave example: 1e5 amu molecule with a 1e-20 m regulator.
TABLE_MATTERWAVE_R0 = 1e-20
#: Two-resonator example: 1 ng, 1 rad/s, 1 um apart, 1 s.
TABLE_OSC = (1e-12, 1.0, 1e-6, 1.0)


def _record(cfg: ScenarioConfig, observables, provenance: str) -> ResultRecord:
    return ResultRecord(cfg.scenario, cfg.model, cfg.inputs(), tuple(observables), provenance)


def _osc_pair(cfg: ScenarioConfig) -> list[ResultRecord]:
    const = cfg.physical_constants()
    p, n = cfg.physical, cfg.numerics
    pair = eft.OscillatorPair(p["m"], p["omega"], p["d"], dim=n["dim"], rwa=n["rwa"])
    lam = eft.coupling_lambda(pair, const)
    H = eft.pair_hamiltonian(pair, const)
    if p["alpha"] > 0:
        psi0 = eft.cat_vacuum_state(p["alpha"], pair.dim)
        label = "cat-vacuum"
    else:
        psi0 = basis_state(pair.spec, (1, 0))
        label = "fock-10"
    psi = evolve_exact(H, psi0, p["t"], const)
    obs = [
        Observable("coupling_lambda", lam, "rad/s"),
        Observable("lambda_t", lam * p["t"], "rad"),
        Observable("negativity", measures.negativity(psi), "1"),
        Observable("entanglement_entropy", measures.entanglement_entropy(psi.normalize()), "nat"),
        Observable("density_m_over_d3", pair.density, "kg/m^3"),
    ]
    if p["alpha"] > 0 and pair.rwa:
        ref = eft.evolve_cat_vacuum(pair, p["alpha"], p["t"], const)
        obs.append(Observable("cat_fidelity_vs_closed_form", psi.fidelity(ref), "1"))
    return [_record(cfg, obs, f"exact propagation of {label} in a truncated Fock space")]


def _interferometer(cfg: ScenarioConfig) -> list[ResultRecord]:
    const = cfg.physical_constants()
    p, n = cfg.physical, cfg.numerics
    ip = eft.InterferometerPair.standard(p["m"], p["dx"], p["d"], p["dt"], cfg.options["geometry"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        dphi = eft.delta_phi(ip, const)
    base = [Observable("delta_phi_approx", dphi.approximate, "rad"),
            Observable("delta_phi_entangling", dphi.entangling, "rad")]
    if cfg.model == "eft":
        psi = eft.final_interferometer_state(ip, const)
        obs = base + [Observable("delta_phi_exact", dphi.exact, "rad"),
                      Observable("negativity", measures.negativity(psi), "1"),
                      Observable("bell_witness", measures.bell_witness(psi), "1")]
        return [_record(cfg, obs, "closed-form branch phases")]
    if cfg.model == "sn":
        branch = semiclassical.twin_interferometer_configuration(ip)
        phases = semiclassical.sn_branch_phases(branch, p["dt"], const=const)
        out = semiclassical.sn_branch_evolution(branch, p["dt"], const=const).to_state_vector()
        obs = base + [Observable("relative_phase_1", phases[0]["R"] - phases[0]["L"], "rad"),
                      Observable("relative_phase_2", phases[1]["R"] - phases[1]["L"], "rad"),
                      Observable("negativity", measures.negativity(out), "1"),
                      Observable("bell_witness", measures.bell_witness(out), "1")]
        return [_record(cfg, obs, "mean-field phases with frozen potential")]
    # classical channel
    R0 = n["R0"] if n["R0"] > 0 else None
    model = cc.LatticeMassModel.from_interferometer(ip, R0)
    psi0 = StateVector(HilbertSpec((2, 2)), np.full(4, 0.5, dtype=complex))
    dt = p["dt"] / n["n_steps"]
    tc = cc.TrajectoryConfig(gamma=n["gamma"], dt=dt, n_steps=n["n_steps"], seed=n["seed"],
                             n_traj=n["n_traj"], record_every=n["n_steps"], feedback=True,
                             estimator=n["estimator"], tau=n["tau"])
    res = cc.run_ensemble(psi0, model, tc, const=const)
    neg = measures.negativity(res.density(-1))
    se = float(np.sqrt(np.sum(res.stderr_re[-1] ** 2 + res.stderr_im[-1] ** 2)))
    neg_se = 0.5 * math.sqrt(psi0.spec.dim) * se
    coh = res.rho[-1, 0, 3]
    obs = base + [
        Observable("negativity", neg, "1", stderr=neg_se, n_samples=tc.n_traj, flag=SIMULATION),
        Observable("coherence_LL_RR", abs(coh), "1",
                   stderr=float(math.hypot(res.stderr_re[-1, 0, 3], res.stderr_im[-1, 0, 3])),
                   n_samples=tc.n_traj, flag=SIMULATION),
    ]
    return [_record(cfg, obs, "ensemble of measurement-feedback trajectories")]


def _dp_rate(cfg: ScenarioConfig) -> list[ResultRecord]:
    const = cfg.physical_constants()
    p, n = cfg.physical, cfg.numerics
    body = collapse.SuperposedBody.displaced(p["m"], p["R0"], p["separation"])
    rate = collapse.dp_rate(body, const)
    plateau = collapse.plateau_rate(p["m"], p["R0"], const=const)
    obs = [Observable("dp_rate", rate, "1/s"),
           Observable("plateau_rate", plateau, "1/s"),
           Observable("rate_over_plateau", rate / plateau, "1"),
           Observable("coherence_time", math.inf if rate == 0 else 1.0 / rate, "s")]
    prov = "analytic uniform-sphere reduction"
    if n["mc_samples"] > 0:
        mc = collapse.dp_rate_mc(body, n["mc_samples"], seed=n["seed"], const=const)
        obs.append(Observable("dp_rate_mc", mc.value, "1/s", mc.stderr, mc.n_samples, MONTE_CARLO))
        prov += "; Monte Carlo cross-check"
    return [_record(cfg, obs, prov)]


def _penrose(cfg: ScenarioConfig) -> list[ResultRecord]:
    const = cfg.physical_constants()
    p, n = cfg.physical, cfg.numerics
    pref = cfg.options["prefactor"]
    left = [collapse.SphereMass(p["m"], p["R0"])]
    right = [collapse.SphereMass(p["m"], p["R0"], (p["separation"], 0.0, 0.0))]
    de = collapse.penrose_delta_e(left, right, pref, const)
    obs = [Observable("delta_e", de, "J"),
           Observable("penrose_time", collapse.penrose_time(de, const), "s")]
    prov = f"analytic uniform-sphere reduction, prefactor {pref}"
    if n["mc_samples"] > 0:
        mc = collapse.penrose_delta_e_mc(p["m"], p["R0"], p["separation"], n["mc_samples"],
                                         seed=n["seed"], prefactor=pref, const=const)
        obs.append(Observable("delta_e_mc", mc.value, "J", mc.stderr, mc.n_samples, MONTE_CARLO))
        prov += "; Monte Carlo cross-check"
    return [_record(cfg, obs, prov)]


def _cc_trajectories(cfg: ScenarioConfig) -> list[ResultRecord]:
    const = cfg.physical_constants()
    p, n = cfg.physical, cfg.numerics
    model = cc.LatticeMassModel.two_site(p["m"], p["separation"], p["R0"])
    psi0 = StateVector(HilbertSpec((2,)), np.full(2, 1 / math.sqrt(2), dtype=complex))
    tc = cc.TrajectoryConfig(gamma=n["gamma"], dt=n["dt"], n_steps=n["n_steps"], seed=n["seed"],
                             n_traj=n["n_traj"], record_every=n["record_every"],
                             feedback=n["feedback"], estimator=cfg.options["estimator"], tau=n["tau"])
    res = cc.run_ensemble(psi0, model, tc, const=const)
    rate, se = cc.decay_rate_estimate(res)
    obs = [Observable("dephasing_rate", rate, "1/s", se, tc.n_traj, SIMULATION),
           Observable("dephasing_rate_lindblad", cc.two_site_dephasing_rate(p["m"], n["gamma"], const), "1/s"),
           Observable("coherence_final", abs(res.rho[-1, 0, 1]), "1",
                      float(math.hypot(res.stderr_re[-1, 0, 1], res.stderr_im[-1, 0, 1])),
                      tc.n_traj, SIMULATION)]
    return [_record(cfg, obs, "ensemble of weak-measurement trajectories on two sites")]


def _estimates(cfg: ScenarioConfig) -> list[ResultRecord]:
    const = cfg.physical_constants()
    p = cfg.physical
    em = estimates.EmitterParams(N=p["N"], L=p["L"], omega=p["omega"], m=p["m"])
    rates = estimates.emission_rates(em, const)
    oom = ORDER_OF_MAGNITUDE
    mb = p["m_brems"]
    obs = [
        Observable("em_gr_ratio", rates.ratio, "1", flag=oom),
        Observable("em_gr_ratio_cyclic", estimates.em_gr_ratio_cyclic(em, const), "1", flag=oom),
        Observable("gamma_em", rates.gamma_em, "1/s", flag=oom),
        Observable("gamma_gr", rates.gamma_gr, "1/s", flag=oom),
        Observable("resonator_graviton_decoherence_time",
                   estimates.resonator_graviton_decoherence_time(em.Q, em.omega, const), "s", flag=oom),
        Observable("background_decoherence_rate",
                   estimates.solar_graviton_decoherence_rate(p["sigma"], p["flux"], const), "1/s", flag=oom),
        Observable("bremsstrahlung_decoherence",
                   estimates.bremsstrahlung_decoherence(mb * p["v"], mb, p["tau"], const), "1", flag=oom),
        Observable("matterwave_time", estimates.penrose_style_matterwave_time(mb, p["R0"], const), "s",
                   flag=oom),
        Observable("r0_bound", collapse.r0_bound(mb, p["coherence_time"], const=const), "m", flag=oom),
    ]
    return [_record(cfg, obs, "closed-form dimensional estimates")]


_DISPATCH = {
    "osc-pair": _osc_pair,
    "interferometer-pair": _interferometer,
    "dp-rate": _dp_rate,
    "penrose": _penrose,
    "cc-trajectories": _cc_trajectories,
    "estimates": _estimates,
}


def run_scenario(cfg: ScenarioConfig) -> list[ResultRecord]:
    """Run one configured scenario; deterministic for a fixed config and seed."""
    try:
        fn = _DISPATCH[cfg.scenario]
    except KeyError:
        raise ConfigError(f"unknown scenario {cfg.scenario!r}") from None
    return fn(cfg)


def summary_table(const=None) -> list[ResultRecord]:
    """One record per (model, experiment type) cell of the comparison table."""
    from ..quantities import CONSTANTS
    const = CONSTANTS if const is None else const
    rows = []

    def row(model, body, entangles, example, provenance, inputs=None):
        obs = [Observable("entanglement", entangles, "1",
                          flag=UNSPECIFIED if entangles == UNSPECIFIED else EXACT)]
        obs.append(example)
        rows.append(ResultRecord(f"table-{body}-body", model, inputs or {}, tuple(obs), provenance))

    fid = estimates.FIDUCIAL_EMITTER
    row("eft", "single", "yes",
        Observable("example_value", estimates.resonator_graviton_decoherence_time(fid.Q, fid.omega, const),
                   "s", flag=ORDER_OF_MAGNITUDE),
        "resonator decoherence time from graviton emission",
        {"m": fid.m, "L": fid.L, "omega": fid.omega})
    m, w, d, t = TABLE_OSC
    pair = eft.OscillatorPair(m, w, d)
    row("eft", "two", "yes",
        Observable("example_value", eft.coupling_lambda(pair, const) * t, "rad"),
        "two resonators: interference phase lambda_g * dt", {"m": m, "omega": w, "d": d, "dt": t})
    row("sn", "single", "no",
        Observable("example_value", semiclassical.sn_threshold_mass(TABLE_SIGMA_X, const), "kg",
                   flag=ORDER_OF_MAGNITUDE),
        "Talbot-Lau threshold mass", {"sigma_x": TABLE_SIGMA_X})
    row("sn", "two", "no", Observable("example_value", NOT_IN_SOURCE, "1", flag=NOT_IN_SOURCE),
        "no example given")
    Tc, R0, mb = TABLE_BEC
    row("classical-channel", "single", "no",
        Observable("example_value", cc.bec_coherence_bound(Tc, R0, mb, const), "s",
                   flag=ORDER_OF_MAGNITUDE),
        "BEC interferometry coherence bound", {"T_c": Tc, "R0": R0, "m": mb})
    row("classical-channel", "two", "no",
        Observable("example_value", NOT_IN_SOURCE, "1", flag=NOT_IN_SOURCE), "no example given")
    mm = 1e5 * const.amu
    row("diosi-penrose", "single", UNSPECIFIED,
        Observable("example_value",
                   estimates.penrose_style_matterwave_time(mm, TABLE_MATTERWAVE_R0, const), "s",
                   flag=ORDER_OF_MAGNITUDE),
        "matter-wave interferometry coherence time", {"m": mm, "R0": TABLE_MATTERWAVE_R0})
    row("diosi-penrose", "two", UNSPECIFIED,
        Observable("example_value", UNSPECIFIED, "1", flag=UNSPECIFIED),
        "dynamics beyond collapse unspecified")
    return rows
