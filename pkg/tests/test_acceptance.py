"""End-to-end acceptance gates for the workbench, one per numbered claim.

Each test prints one `CRITERION n: PASS|FAIL - <measured values>` line
to the real stdout (bypassing capture) so the tee'd run log always shows
the scorecard, then asserts.  Shared expensive runs (the five model-only
optimizations and the five balanced mismatch optimizations) are built
once per session in module fixtures.

Criterion 4 asks the balanced run on the lossy mismatch backend for a
full-tomography fidelity of 0.99 at 2.45 ms or better.  The emulated
relaxation (Markovian per-slice damping and dephasing channels) caps the
achievable fidelity near 0.93 at those durations, so that criterion is
expected to fail honestly with the cap reported; the supplementary test
at the bottom shows the same machinery clears 0.99 once relaxation is
removed, and the time clause is met on the lossy backend itself.
"""

import contextlib
import math
import re
import time

import numpy as np
import pytest

from belltime.cartan import cartan_coordinates, kak_factorize, minimum_time_bell
from belltime.cli import main
from belltime.dynamics import (
    SystemModel,
    fidelity_and_gradients,
    model_fidelity,
    random_pulse,
)
from belltime.experiment import ExperimentBackend, ExperimentConfig
from belltime.linalg import ket, singlet_state
from belltime.optimizer import (
    OptimizerConfig,
    run_optimization,
    verify_trace_invariants,
)

G_HZ = 217.4

MISMATCH = dict(
    true_g_hz=1.01 * G_HZ,
    amplitude_scale=(0.98, 1.0, 0.98, 1.0),
    distortion_tau_s=50e-6,
    noise_sigma=1e-3,
    t1_s=(0.730, 0.096),
    t2_s=(0.0965, 0.0425),
)

# Step scale and thresholds sized to the noisy oracle and to the lossy
# backend's reachable fidelity (see README on scenario configuration).
LOSSY_SCENARIO = OptimizerConfig(
    d1_init=1e3,
    target_fidelity=0.93,
    threshold_floor=0.90,
    threshold_drop=0.099,
    threshold_rate=300.0,
    max_iterations=2000,
)

SEEDS = range(5)


_CAPTURE_MANAGER = None


@pytest.fixture(autouse=True)
def _expose_capture_manager(request):
    global _CAPTURE_MANAGER
    _CAPTURE_MANAGER = request.config.pluginmanager.getplugin("capturemanager")
    yield


def report(criterion, passed: bool, details: str) -> str:
    label = f"CRITERION {criterion}" if isinstance(criterion, int) else str(criterion)
    line = f"{label}: {'PASS' if passed else 'FAIL'} - {details}"
    suspend = (
        _CAPTURE_MANAGER.global_and_fixture_disabled()
        if _CAPTURE_MANAGER is not None
        else contextlib.nullcontext()
    )
    with suspend:
        print(f"\n{line}", flush=True)
    return line


@pytest.fixture(scope="module")
def model():
    return SystemModel(g_hz=G_HZ)


@pytest.fixture(scope="module")
def model_runs(model):
    started = time.monotonic()
    runs = {s: run_optimization("model-only", model, OptimizerConfig(), seed=s)
            for s in SEEDS}
    runs["elapsed_s"] = time.monotonic() - started
    return runs


@pytest.fixture(scope="module")
def balanced_runs(model):
    runs = {}
    for s in SEEDS:
        experiment = ExperimentConfig(seed=100 + s, **MISMATCH)
        runs[s] = run_optimization(
            "balanced", model, LOSSY_SCENARIO, experiment=experiment, seed=s
        )
    return runs


def test_criterion_1_minimum_time_formula(capsys):
    started = time.monotonic()
    assert main(["tmin", "--g-hz", "217.4"]) == 0
    out = capsys.readouterr().out
    elapsed = time.monotonic() - started
    seconds = float(re.search(r"\(([\d.e+-]+) s\)", out).group(1))
    ok = abs(seconds - 2.2999e-3) <= 1e-7 and elapsed < 1.0
    line = report(1, ok, f"tmin(217.4 Hz) = {seconds:.10e} s in {elapsed:.3f} s")
    assert ok, line


def test_criterion_2_gradient_correctness(model):
    started = time.monotonic()
    rng = np.random.default_rng(20260814)
    psi0, target = ket("00"), singlet_state()
    h_amp, h_t = 0.05, 1e-8
    worst = 0.0
    for k in range(20):
        m = (1, 5, 50)[k % 3]
        t = rng.uniform(1e-3, 6e-3)
        pulse = random_pulse(m, t, 300.0, rng)
        bundle = fidelity_and_gradients(model, pulse, psi0, target)

        def j_of(p):
            return model_fidelity(model, p, psi0, target)

        for idx in np.ndindex(pulse.amplitudes_hz.shape):
            up = pulse.amplitudes_hz.copy()
            dn = pulse.amplitudes_hz.copy()
            up[idx] += h_amp
            dn[idx] -= h_amp
            fd = (j_of(pulse.with_amplitudes(up)) - j_of(pulse.with_amplitudes(dn))) / (
                2 * h_amp
            )
            exact = bundle.grad_amplitudes[idx]
            worst = max(worst, abs(fd - exact) / max(abs(exact), 1e-9 / 1e-6))
        fd_t = (
            j_of(pulse.with_duration(t + h_t)) - j_of(pulse.with_duration(t - h_t))
        ) / (2 * h_t)
        worst = max(
            worst, abs(fd_t - bundle.grad_duration) / max(abs(bundle.grad_duration), 1e-3)
        )
    elapsed = time.monotonic() - started
    ok = worst <= 1e-6 and elapsed < 30.0
    line = report(2, ok, f"20 pulses, worst relative error {worst:.2e} in {elapsed:.1f} s")
    assert ok, line


def test_criterion_3_model_only_reproduction(model_runs):
    good = [
        s for s in SEEDS
        if model_runs[s].final_model_fidelity >= 0.999
        and 2.20e-3 <= model_runs[s].final_pulse.duration_s <= 2.40e-3
    ]
    elapsed = model_runs["elapsed_s"]
    ok = len(good) >= 4 and elapsed < 600.0
    times = ", ".join(
        f"{model_runs[s].final_pulse.duration_s * 1e3:.4f}" for s in SEEDS
    )
    line = report(
        3, ok, f"{len(good)}/5 seeds at J>=0.999 with T in [2.20,2.40] ms "
        f"(T_ms = {times}) in {elapsed:.0f} s"
    )
    assert ok, line


def test_criterion_4_balanced_reproduction(balanced_runs):
    hits = [
        s for s in SEEDS
        if balanced_runs[s].final_full_fidelity >= 0.99
        and balanced_runs[s].final_pulse.duration_s <= 2.45e-3
    ]
    detail = ", ".join(
        f"seed {s}: J={balanced_runs[s].final_full_fidelity:.4f} "
        f"T={balanced_runs[s].final_pulse.duration_s * 1e3:.3f} ms"
        for s in SEEDS
    )
    ok = len(hits) >= 3
    line = report(4, ok, f"{len(hits)}/5 seeds at full J>=0.99 and T<=2.45 ms ({detail})")
    assert ok, line


def test_criterion_5_degradation_direction(model_runs, balanced_runs):
    good = []
    detail = []
    for s in SEEDS:
        probe = ExperimentBackend(ExperimentConfig(seed=500 + s, **MISMATCH))
        predicted = model_runs[s].final_model_fidelity
        measured = probe.fidelity_full(model_runs[s].final_pulse)
        balanced = balanced_runs[s].final_full_fidelity
        if predicted - measured >= 0.005 and measured < balanced:
            good.append(s)
        detail.append(
            f"seed {s}: pred {predicted:.4f} -> meas {measured:.4f} vs balanced {balanced:.4f}"
        )
    ok = len(good) >= 4
    line = report(5, ok, f"{len(good)}/5 seeds degrade as required ({'; '.join(detail)})")
    assert ok, line


def test_criterion_6_budget_ledger(capsys):
    assert main(["budget", "--mode", "balanced", "--iterations", "2000"]) == 0
    balanced_out = capsys.readouterr().out
    assert main(["budget", "--mode", "experiment-only", "--iterations", "2000"]) == 0
    exp_out = capsys.readouterr().out
    per_bal = int(re.search(r"measurements per iteration: (\d+)", balanced_out).group(1))
    total_bal = int(re.search(r"total measurements: (\d+)", balanced_out).group(1))
    per_exp = int(re.search(r"measurements per iteration: (\d+)", exp_out).group(1))
    ok = (
        per_bal == 3
        and total_bal == 6000
        and "16.7 h" in balanced_out
        and per_exp == 1503
        and "7500 h" in exp_out  # documented discrepancy vs the computed 8350 h
        and "8350 h" in exp_out
    )
    line = report(
        6, ok, f"balanced {per_bal}/iter -> {total_bal} (16.7 h), "
        f"experiment-only {per_exp}/iter, 7500-vs-8350 h note present"
    )
    assert ok, line


def test_criterion_7_cartan_suite():
    started = time.monotonic()
    rng = np.random.default_rng(7)
    ident = cartan_coordinates(np.eye(4)).as_array()
    cnot = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
    cnot_coords = cartan_coordinates(cnot).as_array()
    ok = bool(np.all(np.abs(ident) <= 1e-9))
    ok = ok and bool(np.max(np.abs(cnot_coords - [math.pi / 4, 0.0, 0.0])) <= 1e-9)

    def haar(n=4):
        z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
        q, r = np.linalg.qr(z)
        return q * (np.diag(r) / np.abs(np.diag(r)))

    worst_residual = 0.0
    for _ in range(100):
        u = haar()
        fac = kak_factorize(u)
        from belltime.cartan import interaction_core

        rebuilt = fac.left_local @ interaction_core(fac.coordinates) @ fac.right_local
        phase = np.trace(rebuilt.conj().T @ u) / 4.0
        worst_residual = max(
            worst_residual,
            float(np.max(np.abs(u - rebuilt * (phase / abs(phase))))),
        )
    ok = ok and worst_residual <= 1e-8

    worst_dressing = 0.0
    for _ in range(25):
        u = haar()
        base = cartan_coordinates(u).as_array()
        dl = np.kron(haar(2), haar(2))
        dr = np.kron(haar(2), haar(2))
        dressed = cartan_coordinates(dl @ u @ dr).as_array()
        worst_dressing = max(worst_dressing, float(np.max(np.abs(dressed - base))))
    ok = ok and worst_dressing <= 1e-9
    elapsed = time.monotonic() - started
    ok = ok and elapsed < 30.0
    line = report(
        7, ok, f"identity/CNOT exact, 100 round trips residual {worst_residual:.1e}, "
        f"dressing drift {worst_dressing:.1e} in {elapsed:.1f} s"
    )
    assert ok, line


def test_criterion_8_oracle_equivalence(model):
    backend = ExperimentBackend(ExperimentConfig(true_g_hz=G_HZ))
    rng = np.random.default_rng(88)
    psi0, target = ket("00"), singlet_state()
    worst = 0.0
    for _ in range(50):
        pulse = random_pulse(int(rng.integers(1, 40)), rng.uniform(1e-3, 6e-3), 400.0, rng)
        worst = max(
            worst,
            abs(backend.fidelity_full(pulse) - model_fidelity(model, pulse, psi0, target)),
        )
    config = OptimizerConfig(max_iterations=300)
    pure = run_optimization("model-only", model, config, seed=4)
    hybrid = run_optimization(
        "balanced", model, config,
        experiment=ExperimentConfig(true_g_hz=G_HZ, seed=44), seed=4,
    )
    decisions_match = all(
        a.accepted == b.accepted and a.phase == b.phase
        for a, b in zip(pure.records, hybrid.records)
    )
    ok = worst <= 1e-10 and decisions_match
    line = report(
        8, ok, f"50 pulses max |J_full - J_model| = {worst:.2e}, "
        f"accept/reject sequences {'identical' if decisions_match else 'DIVERGED'}"
    )
    assert ok, line


def test_criterion_9_trace_audits(model_runs, balanced_runs):
    audited = 0
    step2_total = 0
    sub_total = 0
    try:
        for s in SEEDS:
            summary = verify_trace_invariants(model_runs[s].records, OptimizerConfig())
            audited += summary["records"]
            step2_total += summary["accepted_step2"]
            summary = verify_trace_invariants(balanced_runs[s].records, LOSSY_SCENARIO)
            audited += summary["records"]
            step2_total += summary["accepted_step2"]
            sub_total += summary["subthreshold_returns"]
        ok = audited > 0 and step2_total > 0 and sub_total > 0
        detail = (
            f"{audited} records replayed bit-exact (alpha=0.01, beta=0.999), "
            f"{step2_total} accepted shrinks, {sub_total} sub-threshold returns to frozen-T climb"
        )
    except ValueError as exc:
        ok = False
        detail = f"audit violation: {exc}"
    line = report(9, ok, detail)
    assert ok, line


def test_supplementary_relaxation_free_fidelity_band(model):
    """Not a numbered criterion: shows the criterion-4 fidelity clause is
    reachable by the same machinery once the relaxation cap is removed."""
    coherent = {k: v for k, v in MISMATCH.items() if k not in ("t1_s", "t2_s")}
    scenario = OptimizerConfig(
        d1_init=1e3,
        target_fidelity=0.992,
        threshold_floor=0.99,
        threshold_drop=0.099,
        threshold_rate=300.0,
        max_iterations=2500,
    )
    finals = []
    for s in (0, 1):
        experiment = ExperimentConfig(seed=100 + s, **coherent)
        res = run_optimization("balanced", model, scenario, experiment=experiment, seed=s)
        finals.append(res.final_full_fidelity)
    ok = all(f >= 0.99 for f in finals)
    line = report(
        "SUPPLEMENTARY", ok,
        "relaxation-free mismatch reaches full J = "
        + ", ".join(f"{f:.4f}" for f in finals) + " (>= 0.99)",
    )
    assert ok, line
