"""Dual-objective pulse optimization: climb fidelity, then shrink time.

The optimizer alternates two phases.  In the climb phase the control
amplitudes follow the fidelity gradient at fixed duration and a trial is
accepted on sufficient increase,

    J(u + d du, T)  >=  J(u, T) + alpha d sum(du * grad_u),

with du = grad_u.  In the shrink phase the amplitudes and the duration
move together along the first-order fidelity-preserving direction
du = grad_u / grad_T, dT = -sum(du^2) (so T always decreases), and a
trial is accepted while it retains the achieved fidelity,

    J(u + d du, T + d dT)  >=  beta J(u, T).

Every iteration performs exactly one fidelity evaluation: the pending
trial is measured, compared against the stored baseline, and a fresh
gradient proposes the next trial.  Rejections revert to the baseline and
shrink the step size, so the backtracking line search is spread across
iterations at a constant per-iteration measurement cost; a clean (zero
consecutive rejections) acceptance grows the step size back.  When a
climb rejection streak exhausts the backtracking budget, the stored
baseline is re-measured and the step size restarts, which protects a
noisy oracle from ratcheting its own baseline out of reach on a lucky
draw.  This keeps the run-mode cost accounting exact: model-driven
iterations are free, measurement-driven iterations cost 3 readouts for
the fidelity and, when gradients are also measured, 2 x 3 readouts per
probed parameter.

Run modes:

* ``model-only``     - fidelity and gradients from the design model.
* ``experiment-only`` - measured fidelity; gradients by central finite
  differences through the measured fidelity (4M amplitude probes plus M
  per-slice duration probes per iteration).
* ``balanced``       - measured fidelity in every acceptance test, exact
  model gradients at zero measurement cost.

The phase machine starts climbing at the initial duration, switches to
shrinking once the baseline reaches the target fidelity (or once the
climb plateaus, for systems whose reachable fidelity sits below the
target), and whenever a logged fidelity falls below the scheduled lower
threshold it returns to climbing with the duration frozen.  Runs stop on
iteration budget or once the duration has stopped moving at target
fidelity.  ``verify_trace_invariants`` replays every logged acceptance
inequality bit-exactly from the trace alone.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .dynamics import (
    GradientBundle,
    PulseSequence,
    SystemModel,
    fidelity_and_gradients,
    model_fidelity,
    random_pulse,
)
from .experiment import ExperimentBackend, ExperimentConfig, MeasurementLedger
from .linalg import ket, singlet_state

MODES = ("model-only", "experiment-only", "balanced")
STEP1 = "step1"
STEP2 = "step2"

EVENT_STALL_STEP1 = "StallInStep1"
EVENT_STALL_STEP2 = "StallInStep2"
EVENT_DEGENERATE_TIME_GRADIENT = "DegenerateTimeGradient"
EVENT_PLATEAU_PROMOTION = "PlateauPromotion"


@dataclass(frozen=True)
class OptimizerConfig:
    """Knobs of the dual-objective search.

    ``alpha`` and ``beta`` are the acceptance constants of the climb and
    shrink inequalities.  ``target_fidelity`` gates the climb-to-shrink
    switch and the stall-based termination; the scheduled lower threshold

        threshold_floor - threshold_drop * exp(-n / threshold_rate)

    sends the run back to climbing whenever a logged fidelity falls below
    it.  ``d1_init``/``d2_init`` seed the adaptive step sizes of the two
    phases.  Finite-difference steps apply to experiment-only gradients.
    """

    alpha: float = 0.01
    beta: float = 0.999
    target_fidelity: float = 0.999
    threshold_floor: float = 0.999
    threshold_drop: float = 0.099
    threshold_rate: float = 300.0
    d1_init: float = 1e-3
    d2_init: float = 1e-6
    d_min: float = 1e-12
    backtrack_factor: float = 0.5
    max_backtracks: int = 30
    max_iterations: int = 5000
    stall_window: int = 200
    stall_epsilon_t_s: float = 1e-6
    step1_patience: int = 40
    control_gradient_floor: float = 1e-8
    time_gradient_floor: float = 1e-8
    fd_step_amplitude_hz: float = 0.1
    fd_step_time_s: float = 1e-8
    amplitude_cap_hz: Optional[float] = None
    m_slices: int = 50
    initial_duration_s: float = 5e-3
    init_amplitude_hz: float = 100.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError(f"beta must lie in (0, 1], got {self.beta}")
        if not 0.0 < self.target_fidelity < 1.0:
            raise ValueError(f"target_fidelity must lie in (0, 1), got {self.target_fidelity}")
        if not 0.0 < self.threshold_floor < 1.0:
            raise ValueError(f"threshold_floor must lie in (0, 1), got {self.threshold_floor}")
        if not 0.0 <= self.threshold_drop < self.threshold_floor:
            raise ValueError(
                f"threshold_drop must lie in [0, threshold_floor), got {self.threshold_drop}"
            )
        if self.threshold_rate <= 0:
            raise ValueError(f"threshold_rate must be positive, got {self.threshold_rate}")
        if not self.d_min > 0:
            raise ValueError(f"d_min must be positive, got {self.d_min}")
        if not (self.d1_init > self.d_min and self.d2_init > self.d_min):
            raise ValueError("d1_init and d2_init must exceed d_min")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise ValueError(
                f"backtrack_factor must lie in (0, 1), got {self.backtrack_factor}"
            )
        for name in ("max_backtracks", "max_iterations", "stall_window",
                     "step1_patience", "m_slices"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be a positive integer")
        for name in ("stall_epsilon_t_s", "fd_step_amplitude_hz", "fd_step_time_s",
                     "initial_duration_s"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.init_amplitude_hz < 0:
            raise ValueError("init_amplitude_hz must be nonnegative")
        if self.amplitude_cap_hz is not None and not self.amplitude_cap_hz > 0:
            raise ValueError("amplitude_cap_hz must be positive when set")


@dataclass(frozen=True)
class IterationRecord:
    """One optimizer iteration as logged to the trace.

    ``j_oracle`` is the fidelity measured this iteration (of the trial
    point, or of the current point on baseline iterations); ``j_model``
    is the design model's prediction for the same controls.
    ``t_seconds`` is the retained duration after the accept/reject
    decision.  ``j_reference``, ``grad_dot``, ``step_size_used`` and
    ``acceptance_rhs`` reproduce the acceptance inequality exactly as it
    was evaluated, so traces can be audited arithmetically after the
    fact.  ``backtracks`` counts the consecutive rejections behind the
    step size that was used.
    """

    n: int
    phase: str
    t_seconds: float
    j_oracle: float
    j_model: float
    step_size_used: float
    accepted: bool
    backtracks: int
    measurements_this_iter: int
    j_reference: float
    grad_dot: float
    acceptance_rhs: float
    threshold: float
    event: Optional[str] = None

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class OptimizationResult:
    mode: str
    final_pulse: PulseSequence
    records: list
    termination: str
    ledger: MeasurementLedger
    seconds_per_measurement: float
    final_model_fidelity: float
    final_full_fidelity: Optional[float]
    seed: Optional[int]


@dataclass(frozen=True)
class _Proposal:
    kind: str
    trial: PulseSequence
    j_reference: float
    grad_dot: float
    step_size: float
    rhs: float


def lower_threshold(n: int, config: OptimizerConfig) -> float:
    """Scheduled return-to-climb fidelity threshold at iteration n."""
    if n < 0:
        raise ValueError(f"iteration index must be >= 0, got {n}")
    return config.threshold_floor - config.threshold_drop * math.exp(
        -n / config.threshold_rate
    )


def finite_diff_gradients(
    backend: ExperimentBackend,
    pulse: PulseSequence,
    fd_step_amplitude_hz: float,
    fd_step_time_s: float,
    baseline_fidelity: float = math.nan,
) -> GradientBundle:
    """Measured gradients by central differences through the 3-readout fidelity.

    Every control amplitude is probed twice (2 x 4M probes) and every
    slice duration is probed twice (2 x M probes); each probe is one
    3-measurement fidelity estimate.  The duration derivative of the
    uniform grid is the mean of the per-slice duration derivatives, since
    stretching T by dT stretches every slice by dT/M.
    """
    amps = pulse.amplitudes_hz
    m_slices = pulse.n_slices
    grad_u = np.zeros_like(amps)
    h = fd_step_amplitude_hz
    for m in range(m_slices):
        for c in range(4):
            probe = amps.copy()
            probe[m, c] += h
            j_plus = backend.fidelity_partial(
                pulse.with_amplitudes(probe), category="gradient_control"
            )
            probe[m, c] -= 2.0 * h
            j_minus = backend.fidelity_partial(
                pulse.with_amplitudes(probe), category="gradient_control"
            )
            grad_u[m, c] = (j_plus - j_minus) / (2.0 * h)

    ht = fd_step_time_s
    base = pulse.slice_duration_s
    slope_sum = 0.0
    for m in range(m_slices):
        durations = np.full(m_slices, base)
        durations[m] = base + ht
        j_plus = backend.fidelity_partial(
            pulse, category="gradient_time", slice_durations_s=durations
        )
        durations[m] = base - ht
        j_minus = backend.fidelity_partial(
            pulse, category="gradient_time", slice_durations_s=durations
        )
        slope_sum += (j_plus - j_minus) / (2.0 * ht)
    grad_t = slope_sum / m_slices
    return GradientBundle(
        fidelity=baseline_fidelity, grad_amplitudes=grad_u, grad_duration=grad_t
    )


def run_optimization(
    mode: str,
    model: SystemModel,
    config: OptimizerConfig,
    experiment: Optional[ExperimentConfig] = None,
    seed: int = 0,
    initial_pulse: Optional[PulseSequence] = None,
) -> OptimizationResult:
    """Run the dual-objective search in one of the three modes.

    The experiment configuration is required except in model-only mode.
    ``seed`` fixes the initial random pulse (ignored when an explicit
    ``initial_pulse`` is given); the measurement noise stream is seeded
    by the experiment configuration itself.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    backend = None
    if mode != "model-only":
        if experiment is None:
            raise ValueError(f"{mode} mode requires an experiment configuration")
        backend = ExperimentBackend(experiment)

    if initial_pulse is None:
        rng = np.random.default_rng(seed)
        pulse = random_pulse(
            config.m_slices, config.initial_duration_s, config.init_amplitude_hz, rng
        )
    else:
        pulse = initial_pulse

    psi0 = ket("00")
    target = singlet_state()

    def measure(p: PulseSequence):
        if backend is None:
            return model_fidelity(model, p, psi0, target), 0
        before = backend.ledger.total_measurements
        j = backend.fidelity_partial(p)
        return j, backend.ledger.total_measurements - before

    def gradients(p: PulseSequence, j_base: float):
        if mode == "experiment-only":
            before = backend.ledger.total_measurements
            bundle = finite_diff_gradients(
                backend, p, config.fd_step_amplitude_hz, config.fd_step_time_s,
                baseline_fidelity=j_base,
            )
            return bundle, backend.ledger.total_measurements - before
        return fidelity_and_gradients(model, p, psi0, target), 0

    records: list[IterationRecord] = []
    phase = STEP1
    d1 = config.d1_init
    d2 = config.d2_init
    streak = 0   # consecutive rejections behind the current step size
    plateau = 0  # consecutive climb rejections since the last acceptance
    pending: Optional[_Proposal] = None
    j_base = math.nan
    at_target_since = None  # first iteration of the current j_base >= target run
    incumbent: Optional[PulseSequence] = None  # latest state meeting the target
    termination = "max_iterations"

    for n in range(config.max_iterations):
        event = None
        refresh = False

        # 1. One oracle evaluation: the pending trial, or a baseline
        #    measurement of the current point when nothing is pending.
        if pending is None:
            j_trial, n_meas = measure(pulse)
            j_base = j_trial
            rec_phase = phase
            accepted = True
            step_used = 0.0
            grad_dot = 0.0
            reference = j_trial
            rhs = j_trial
            backtracks = streak
            j_model_rec = (
                j_trial if backend is None
                else model_fidelity(model, pulse, psi0, target)
            )
        else:
            j_trial, n_meas = measure(pending.trial)
            rec_phase = pending.kind
            rhs = pending.rhs
            accepted = bool(j_trial >= rhs)
            step_used = pending.step_size
            grad_dot = pending.grad_dot
            reference = pending.j_reference
            backtracks = streak
            j_model_rec = (
                j_trial if backend is None
                else model_fidelity(model, pending.trial, psi0, target)
            )
            if accepted:
                pulse = pending.trial
                j_base = j_trial
                if streak == 0:
                    if pending.kind == STEP1:
                        d1 = d1 / config.backtrack_factor
                    else:
                        d2 = d2 / config.backtrack_factor
                streak = 0
                plateau = 0
            else:
                streak += 1
                if pending.kind == STEP1:
                    d1 = max(d1 * config.backtrack_factor, config.d_min)
                    plateau += 1
                else:
                    d2 = max(d2 * config.backtrack_factor, config.d_min)
                if streak >= config.max_backtracks:
                    event = (
                        EVENT_STALL_STEP1 if pending.kind == STEP1
                        else EVENT_STALL_STEP2
                    )
                    streak = 0
                    if pending.kind == STEP1:
                        # A noisy oracle can inflate the stored baseline on a
                        # lucky draw and starve the climb; re-measure the
                        # current point next iteration and restart the step
                        # size from scratch.
                        d1 = config.d1_init
                        refresh = True

        threshold = lower_threshold(n, config)

        # 2. Phase decision for the next proposal.  A sub-threshold logged
        #    fidelity always forces a return to climbing at frozen T; the
        #    climb hands over to shrinking at target fidelity, or on a
        #    plateau when the target is out of physical reach.
        if j_trial < threshold:
            if phase != STEP1:
                phase = STEP1
                streak = 0
                plateau = 0
        elif phase == STEP1 and j_base >= config.target_fidelity:
            phase = STEP2
            streak = 0
            plateau = 0
        elif phase == STEP1 and plateau >= config.step1_patience:
            event = event or EVENT_PLATEAU_PROMOTION
            phase = STEP2
            streak = 0
            plateau = 0
        elif rec_phase == STEP2 and phase == STEP2 and not accepted and d2 <= config.d_min:
            # the shrink direction is exhausted at the smallest step;
            # climb again so the baseline can recover before retrying
            phase = STEP1
            streak = 0
            plateau = 0

        # 3. Propose the next trial from the gradient at the current point.
        bundle, g_meas = gradients(pulse, j_base)
        n_meas += g_meas
        grad_u = bundle.grad_amplitudes
        grad_t = bundle.grad_duration

        if phase == STEP2 and abs(grad_t) <= config.time_gradient_floor:
            event = event or EVENT_DEGENERATE_TIME_GRADIENT
            phase = STEP1
            streak = 0
            plateau = 0

        pending = None
        if refresh:
            pass  # next iteration re-measures the baseline instead
        elif phase == STEP1:
            if float(np.max(np.abs(grad_u))) <= config.control_gradient_floor:
                event = event or EVENT_STALL_STEP1
            else:
                trial_amps = pulse.amplitudes_hz + d1 * grad_u
                if config.amplitude_cap_hz is not None:
                    np.clip(
                        trial_amps, -config.amplitude_cap_hz, config.amplitude_cap_hz,
                        out=trial_amps,
                    )
                delta = trial_amps - pulse.amplitudes_hz
                next_dot = float(np.sum(delta * grad_u) / d1)
                pending = _Proposal(
                    kind=STEP1,
                    trial=pulse.with_amplitudes(trial_amps),
                    j_reference=j_base,
                    grad_dot=next_dot,
                    step_size=d1,
                    rhs=j_base + config.alpha * d1 * next_dot,
                )
        else:
            du = grad_u / grad_t
            dt_change = -float(np.sum(du * du))
            while d2 > config.d_min and pulse.duration_s + d2 * dt_change <= 0.0:
                d2 = max(d2 * config.backtrack_factor, config.d_min)
            new_duration = pulse.duration_s + d2 * dt_change
            if new_duration <= 0.0:
                event = event or EVENT_DEGENERATE_TIME_GRADIENT
                phase = STEP1
                streak = 0
                plateau = 0
            else:
                trial_amps = pulse.amplitudes_hz + d2 * du
                if config.amplitude_cap_hz is not None:
                    np.clip(
                        trial_amps, -config.amplitude_cap_hz, config.amplitude_cap_hz,
                        out=trial_amps,
                    )
                delta = trial_amps - pulse.amplitudes_hz
                pending = _Proposal(
                    kind=STEP2,
                    trial=pulse.with_amplitudes(trial_amps).with_duration(new_duration),
                    j_reference=j_base,
                    grad_dot=float(np.sum(delta * grad_u) / d2),
                    step_size=d2,
                    rhs=config.beta * j_base,
                )

        records.append(
            IterationRecord(
                n=n,
                phase=rec_phase,
                t_seconds=pulse.duration_s,
                j_oracle=j_trial,
                j_model=j_model_rec,
                step_size_used=step_used,
                accepted=accepted,
                backtracks=backtracks,
                measurements_this_iter=n_meas,
                j_reference=reference,
                grad_dot=grad_dot,
                acceptance_rhs=rhs,
                threshold=threshold,
                event=event,
            )
        )

        # 4. Stall termination: duration unchanged over a full window spent
        #    entirely at target fidelity.
        if j_base >= config.target_fidelity:
            incumbent = pulse
            if at_target_since is None:
                at_target_since = n
        else:
            at_target_since = None
        if (
            len(records) > config.stall_window
            and at_target_since is not None
            and n - at_target_since >= config.stall_window
        ):
            t_then = records[-1 - config.stall_window].t_seconds
            if t_then - pulse.duration_s < config.stall_epsilon_t_s:
                termination = "stalled"
                break

    # The returned pulse is the latest state that met the target fidelity;
    # a run cut off mid way through a shrink-and-recover cycle falls back
    # to it rather than reporting the half-recovered endpoint.  Runs that
    # never met the target return their last state.
    final_pulse = incumbent if incumbent is not None else pulse
    final_model = model_fidelity(model, final_pulse, psi0, target)
    # The closing full tomography is a report-time diagnostic, not part of
    # the optimization loop, so it runs on a detached replay of the same
    # instrument and leaves the run ledger untouched.
    final_full = (
        ExperimentBackend(backend.config).fidelity_full(final_pulse)
        if backend is not None
        else None
    )
    return OptimizationResult(
        mode=mode,
        final_pulse=final_pulse,
        records=records,
        termination=termination,
        ledger=backend.ledger if backend is not None else MeasurementLedger(),
        seconds_per_measurement=(
            backend.config.seconds_per_measurement if backend is not None else 10.0
        ),
        final_model_fidelity=final_model,
        final_full_fidelity=final_full,
        seed=None if initial_pulse is not None else seed,
    )


def verify_trace_invariants(records, config: OptimizerConfig) -> dict:
    """Replay a trace's acceptance inequalities and phase rules exactly.

    Checks, from the logged values alone: every accepted climb record
    satisfies j_oracle >= j_reference + alpha * step * grad_dot; every
    accepted shrink record satisfies j_oracle >= beta * j_reference (both
    recomputed bit-exactly and cross-checked against the logged rhs);
    durations never increase, and change only at accepted shrink records;
    and any record whose measured fidelity falls below the scheduled
    threshold is followed by a climb record at identical duration.
    Raises ValueError naming the first offending record; returns summary
    counts otherwise.
    """
    n_accepted = 0
    n_step2_accepted = 0
    n_subthreshold = 0
    previous = None
    for record in records:
        if record.accepted:
            n_accepted += 1
            if record.phase == STEP1:
                rhs = record.j_reference + config.alpha * record.step_size_used * record.grad_dot
            elif record.phase == STEP2:
                rhs = config.beta * record.j_reference
                n_step2_accepted += 1
            else:
                raise ValueError(f"record {record.n}: unknown phase {record.phase!r}")
            if record.step_size_used > 0.0 and rhs != record.acceptance_rhs:
                raise ValueError(
                    f"record {record.n}: logged acceptance_rhs {record.acceptance_rhs!r} "
                    f"does not reproduce from its own fields ({rhs!r})"
                )
            if not record.j_oracle >= rhs:
                raise ValueError(
                    f"record {record.n}: accepted {record.phase} violates its "
                    f"acceptance inequality ({record.j_oracle!r} < {rhs!r})"
                )
        if previous is not None:
            if record.t_seconds > previous.t_seconds:
                raise ValueError(
                    f"record {record.n}: duration increased "
                    f"({previous.t_seconds!r} -> {record.t_seconds!r})"
                )
            if record.t_seconds != previous.t_seconds and not (
                record.accepted and record.phase == STEP2
            ):
                raise ValueError(
                    f"record {record.n}: duration changed outside an accepted "
                    "shrink step"
                )
            if previous.j_oracle < lower_threshold(previous.n, config):
                n_subthreshold += 1
                if record.phase != STEP1:
                    raise ValueError(
                        f"record {record.n}: fidelity {previous.j_oracle!r} fell below "
                        f"threshold at n={previous.n} but the next phase is not a climb"
                    )
                if record.t_seconds != previous.t_seconds:
                    raise ValueError(
                        f"record {record.n}: duration moved during a forced "
                        "return to climbing"
                    )
        previous = record
    return {
        "records": len(records),
        "accepted": n_accepted,
        "accepted_step2": n_step2_accepted,
        "subthreshold_returns": n_subthreshold,
    }
