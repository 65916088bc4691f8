"""``gravlab`` command line.

Exit codes: 0 success, 1 selftest failure, 2 configuration error,
3 numerical breakdown.
"""
from __future__ import annotations

import argparse
import logging
import sys
from typing import Callable, Sequence

from .. import classical_channel, collapse, eft, estimates, semiclassical
from ..errors import ConfigError, InvalidInputError, InvalidRegimeError, NumericalBreakdownError
from ..quantities import CONSTANTS, derived_planck_units
from .config import FORMATS, load_config
from .records import ORDER_OF_MAGNITUDE, Observable, ResultRecord, emit
from .scenarios import run_scenario, summary_table

log = logging.getLogger("gravlab")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3


def _planck(p):
    M, P, L = derived_planck_units(CONSTANTS)
    return [Observable("M_p", M, "kg"), Observable("P_p", P, "kg m/s"), Observable("L_p", L, "m")]


def _em_gr(p):
    e = estimates.EmitterParams(N=p.get("N", 1.0), L=p.get("L", 1e-6), omega=p.get("omega", 1e6),
                                m=p.get("m", 1e-12))
    return [Observable("em_gr_ratio", estimates.em_gr_ratio(e), "1", flag=ORDER_OF_MAGNITUDE),
            Observable("em_gr_ratio_cyclic", estimates.em_gr_ratio_cyclic(e), "1", flag=ORDER_OF_MAGNITUDE)]


def _background(p):
    sigma = p.get("sigma", estimates.QUOTED_GRAVITON_CROSS_SECTION)
    flux = p.get("flux", estimates.SOLAR_GRAVITON_FLUX)
    return [Observable("rate", estimates.solar_graviton_decoherence_rate(sigma, flux), "1/s",
                       flag=ORDER_OF_MAGNITUDE),
            Observable("planck_cross_section", estimates.planck_cross_section(), "m^2")]


def _brems(p):
    m = p.get("m", 1e5 * CONSTANTS.amu)
    mom = p.get("p", m * p.get("v", 10.0))
    tau = p.get("tau", 1.0)
    return [Observable("factor", estimates.bremsstrahlung_coherence_factor(mom, m, tau), "1"),
            Observable("one_minus_factor", estimates.bremsstrahlung_decoherence(mom, m, tau), "1")]


def _resonator(p):
    m, L = p.get("m", 1e-12), p.get("L", 1e-6)
    return [Observable("time", estimates.resonator_graviton_decoherence_time(p.get("Q", m * L * L),
                                                                             p.get("omega", 1e6)),
                       "s", flag=ORDER_OF_MAGNITUDE)]


def _matterwave(p):
    return [Observable("time", estimates.penrose_style_matterwave_time(
        p.get("m", 1e5 * CONSTANTS.amu), p.get("R0", 1e-20)), "s", flag=ORDER_OF_MAGNITUDE)]


def _r0(p):
    m, t = p.get("m", 1e5 * CONSTANTS.amu), p.get("coherence_time", 1.0)
    return [Observable("r0_bound", collapse.r0_bound(m, t), "m"),
            Observable("r0_bound_sphere", collapse.r0_bound(m, t, collapse.SELF_FACTOR), "m")]


def _plateau(p):
    return [Observable("plateau_rate", collapse.plateau_rate(p.get("m", 1e5 * CONSTANTS.amu),
                                                             p.get("R0", 1e-20)), "1/s")]


def _bec(p):
    return [Observable("time", classical_channel.bec_coherence_bound(
        p.get("T_c", 1e-7), p.get("R0", 1e-15), p.get("m", 1e-25)), "s", flag=ORDER_OF_MAGNITUDE)]


def _sn_mass(p):
    return [Observable("m_sn", semiclassical.sn_threshold_mass(p.get("sigma_x", 1e-9)), "kg",
                       flag=ORDER_OF_MAGNITUDE)]


def _eft_corr(p):
    pn, q = eft.eft_potential_corrections(p.get("m1", 1e-6), p.get("m2", 1e-6), p.get("r", 1e-6))
    return [Observable("post_newtonian", pn, "1", flag=ORDER_OF_MAGNITUDE),
            Observable("quantum", q, "1", flag=ORDER_OF_MAGNITUDE)]


def _coupling(p):
    pair = eft.OscillatorPair(p.get("m", 1e-12), p.get("omega", 1.0), p.get("d", 1e-6))
    return [Observable("lambda_g", eft.coupling_lambda(pair), "rad/s")]


ESTIMATORS: dict[str, Callable[[dict], list[Observable]]] = {
    "planck-units": _planck,
    "em-gr-ratio": _em_gr,
    "background-rate": _background,
    "bremsstrahlung": _brems,
    "resonator-time": _resonator,
    "matterwave-time": _matterwave,
    "r0-bound": _r0,
    "plateau-rate": _plateau,
    "bec-bound": _bec,
    "sn-mass": _sn_mass,
    "eft-corrections": _eft_corr,
    "coupling": _coupling,
}


def _parse_params(items: Sequence[str]) -> dict[str, float]:
    out = {}
    for item in items:
        key, sep, val = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"parameter {item!r} is not key=value")
        try:
            out[key.strip()] = float(val)
        except ValueError:
            raise ConfigError(f"parameter {key}: {val!r} is not a number") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=lambda s: int(s, 0), help="override the RNG seed")
    common.add_argument("--format", choices=FORMATS, help="output format (default csv)")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--quiet", action="store_true", help="suppress log messages")

    ap = argparse.ArgumentParser(prog="gravlab", description="Low-energy gravity model calculators.")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", parents=[common], help="run a scenario config file")
    run.add_argument("config")
    sub.add_parser("table", parents=[common], help="emit the model comparison table")
    est = sub.add_parser("estimate", parents=[common], help="evaluate one closed-form estimate")
    est.add_argument("name", choices=sorted(ESTIMATORS))
    est.add_argument("params", nargs="*", metavar="key=value")
    sub.add_parser("selftest", parents=[common], help="run the invariant checks")
    return ap


def _write(records: list[ResultRecord], fmt: str, path: str | None) -> None:
    text = emit(records, fmt, path)
    if path is None:
        sys.stdout.write(text)
    else:
        log.info("wrote %d record(s) to %s", len(records), path)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.command == "run":
            cfg = load_config(args.config)
            if args.seed is not None:
                cfg = cfg.with_seed(args.seed)
            cfg = cfg.with_output(args.format, args.out)
            log.info("scenario %s / model %s, seed %d", cfg.scenario, cfg.model, cfg.seed)
            _write(run_scenario(cfg), cfg.output.format, cfg.output.path)
        elif args.command == "table":
            _write(summary_table(), args.format or "csv", args.out)
        elif args.command == "estimate":
            params = _parse_params(args.params)
            obs = ESTIMATORS[args.name](params)
            rec = ResultRecord("estimate", args.name, params, tuple(obs), "closed form")
            _write([rec], args.format or "csv", args.out)
        elif args.command == "selftest":
            from ..selftest import run_selftest
            results = run_selftest()
            for r in results:
                print(f"{'PASS' if r.passed else 'FAIL'} {r.name} ({r.seconds:.2f} s): {r.detail}")
            return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL
    except NumericalBreakdownError as exc:
        where = f" at step {exc.step}" if exc.step is not None else ""
        log.error("numerical breakdown%s: %s", where, exc)
        return EXIT_NUMERICAL
    except (ConfigError, InvalidInputError, InvalidRegimeError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
