"""Fast invariant checks runnable without pytest (``gravlab selftest``)."""
from __future__ import annotations

import os
import tempfile
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import collapse, eft, measures
from .errors import TruncationError
from .harness import config as hconfig
from .harness import records, scenarios
from .qstate import (TRUNCATION_MARGIN, HilbertSpec, Propagator, StateVector, coherent_state,
                     required_dim)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _random_state(rng, dims) -> StateVector:
    d = int(np.prod(dims))
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return StateVector(HilbertSpec(tuple(dims)), v / np.linalg.norm(v))


def _random_unitary(rng, d) -> np.ndarray:
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def check_qstate_unitarity() -> str:
    pair = eft.OscillatorPair(1e-12, 1.0, 1e-6, dim=8, rwa=False)
    prop = Propagator(eft.pair_hamiltonian(pair))
    U = prop.unitary(3.7e3)
    err = np.abs(U.conj().T @ U - np.eye(len(U))).max()
    assert err < 1e-10, f"U^dag U deviates by {err:.2e}"
    return f"max |U^dag U - 1| = {err:.1e}"


def check_qstate_composition() -> str:
    pair = eft.OscillatorPair(1e-12, 1.0, 1e-6, dim=8)
    prop = Propagator(eft.pair_hamiltonian(pair))
    psi = _random_state(np.random.default_rng(1), (8, 8))
    a = prop.evolve(prop.evolve(psi, 1.3e3), 2.1e3)
    b = prop.evolve(psi, 3.4e3)
    err = np.abs(a.amplitudes - b.amplitudes).max()
    assert err < 1e-10, f"U(s)U(t) != U(s+t) by {err:.2e}"
    return f"max deviation {err:.1e}"


def check_qstate_truncation() -> str:
    alpha = 2.0
    need = required_dim(alpha)
    coherent_state(alpha, need)
    short = need - TRUNCATION_MARGIN - 1
    try:
        coherent_state(alpha, short)
    except TruncationError as exc:
        assert exc.required_dim == need
        return f"alpha = {alpha}: dim {need} accepted, {short} rejected"
    raise AssertionError("undersized truncation was accepted")


def check_measures_local_unitary() -> str:
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(5):
        psi = _random_state(rng, (2, 3))
        U = np.kron(_random_unitary(rng, 2), _random_unitary(rng, 3))
        phi = StateVector(psi.spec, U @ psi.amplitudes)
        worst = max(worst, abs(measures.negativity(psi) - measures.negativity(phi)))
    assert worst < 1e-10, f"negativity changed by {worst:.2e}"
    return f"max change {worst:.1e}"


def check_collapse_symmetry_positivity() -> str:
    rng = np.random.default_rng(3)
    for _ in range(20):
        R = 10 ** rng.uniform(-9, -6)
        x, y = rng.normal(size=3) * 3 * R, rng.normal(size=3) * 3 * R
        s = collapse.SphereMass(1e-15, R)
        a = collapse.dp_rate(collapse.SuperposedBody(s, x, y))
        b = collapse.dp_rate(collapse.SuperposedBody(s, y, x))
        assert a == b, f"asymmetric rate {a} vs {b}"
        assert a >= 0, f"negative rate {a}"
    return "20 random geometries: symmetric and non-negative"


def check_harness_reproducibility() -> str:
    text = ("[scenario]\nname = interferometer-pair\nmodel = classical-channel\n"
            "[numerics]\nn_traj = 50\nn_steps = 20\nseed = 5\n")
    outs = []
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "run.ini")
        with open(path, "w") as fh:
            fh.write(text)
        for i in range(2):
            cfg = hconfig.load_config(path, environ={})
            out = os.path.join(tmp, f"out{i}.csv")
            records.emit(scenarios.run_scenario(cfg), "csv", out)
            with open(out, "rb") as fh:
                outs.append(fh.read())
    assert outs[0] == outs[1], "outputs differ"
    return f"{len(outs[0])} identical bytes"


CHECKS: dict[str, Callable[[], str]] = {
    "qstate.unitarity": check_qstate_unitarity,
    "qstate.composition": check_qstate_composition,
    "qstate.truncation": check_qstate_truncation,
    "measures.local_unitary_invariance": check_measures_local_unitary,
    "collapse.symmetry_positivity": check_collapse_symmetry_positivity,
    "harness.byte_reproducibility": check_harness_reproducibility,
}


def run_selftest() -> list[CheckResult]:
    out = []
    for name, fn in CHECKS.items():
        t0 = time.perf_counter()
        try:
            detail, ok = fn(), True
        except Exception as exc:  # noqa: BLE001 - report every failure
            detail, ok = f"{type(exc).__name__}: {exc}", False
        out.append(CheckResult(name, ok, detail, time.perf_counter() - t0))
    return out
