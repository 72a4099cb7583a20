"""Simulation of the vibrationally controlled system and its averaged twin.

The controlled system dx/dt = (A + V(t/eps)/eps) x is integrated in slow
time with a fixed step resolving the fastest dither period 40 times; the
averaged system uses the same integrator with no dither, so the two
coincide bit-for-bit when the plan is empty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .avg import averaged_closed_form, averaged_numeric
from .errors import GridMismatch, NotNilpotent, ValidationError
from .netcore import NetworkSystem
from .numerics import simulate_sinusoidal, spectral_abscissa
from .synth import VibrationPlan, validate_plan_sparsity

MIN_EPSILON = 1e-4


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    blew_up: bool = False

    @property
    def initial_norm(self) -> float:
        return float(np.linalg.norm(self.states[0]))

    @property
    def final_norm(self) -> float:
        return float(np.linalg.norm(self.states[-1]))


@dataclass(frozen=True)
class StabilityVerdict:
    abscissa_a_bar: float
    decay_observed: bool
    final_over_initial_norm: float
    epsilon_used: float
    method: str


@dataclass
class SimOptions:
    horizon: float = 10.0
    decay_threshold: float = 0.1
    step: Optional[float] = None
    x0: Optional[np.ndarray] = None
    avg_tol: float = 1e-6


def _default_x0(n: int, x0) -> np.ndarray:
    if x0 is None:
        return np.ones(n)
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (n,):
        raise ValidationError(f"x0 must have shape ({n},)")
    return x0


def _constant_step(horizon: float) -> float:
    return min(0.005, horizon / 2000.0)


def simulate_full(sys: NetworkSystem, plan: VibrationPlan, x0=None,
                  horizon: float = 10.0, step: Optional[float] = None) -> Trajectory:
    """Integrate the controlled system over [0, horizon] (slow time).

    The step defaults to eps * (fastest dither period) / 40.  Epsilon below
    1e-4 is rejected at these horizons to bound runtime.  A blown-up run is
    returned truncated with the flag set rather than raised.
    """
    if horizon <= 0:
        raise ValidationError("horizon must be positive")
    validate_plan_sparsity(sys, plan)
    entries = [e for e in plan.entries if e.u != 0.0]
    if entries and plan.epsilon < MIN_EPSILON:
        raise ValidationError(
            f"epsilon {plan.epsilon:g} below {MIN_EPSILON:g}; integration cost "
            "would blow up at this horizon")
    x0 = _default_x0(sys.n, x0)
    if step is None:
        if entries:
            beta_max = max(e.beta for e in entries)
            step = plan.epsilon * (2.0 * math.pi / beta_max) / 40.0
        else:
            step = _constant_step(horizon)
    times, states, blew_up = simulate_sinusoidal(
        sys.a,
        positions=[(e.i - 1, e.j - 1) for e in entries],
        amps=[e.u for e in entries],
        betas=[e.beta for e in entries],
        phases=[e.phase for e in entries],
        eps=plan.epsilon, x0=x0, t_end=horizon, h=step)
    return Trajectory(times=times, states=states, blew_up=blew_up)


def simulate_averaged(a_bar, x0=None, horizon: float = 10.0,
                      step: Optional[float] = None) -> Trajectory:
    """Integrate dx/dt = A_bar x with the same integrator, no dither."""
    a_bar = np.asarray(a_bar, dtype=float)
    n = a_bar.shape[0]
    x0 = _default_x0(n, x0)
    if step is None:
        step = _constant_step(horizon)
    times, states, blew_up = simulate_sinusoidal(
        a_bar, positions=[], amps=[], betas=[], phases=[],
        eps=1.0, x0=x0, t_end=horizon, h=step)
    return Trajectory(times=times, states=states, blew_up=blew_up)


def compare(full: Trajectory, averaged: Trajectory) -> float:
    """Sup over the averaged grid of the Euclidean gap between the two runs,
    with the full run linearly interpolated onto that grid."""
    if full.states.shape[1] != averaged.states.shape[1]:
        raise GridMismatch("state dimensions differ")
    if not np.allclose(full.states[0], averaged.states[0], atol=1e-12):
        raise GridMismatch("initial conditions differ")
    if abs(full.times[-1] - averaged.times[-1]) > 1e-9 * max(1.0, averaged.times[-1]):
        raise GridMismatch("horizons differ")
    n = averaged.states.shape[1]
    resampled = np.empty_like(averaged.states)
    for k in range(n):
        resampled[:, k] = np.interp(averaged.times, full.times, full.states[:, k])
    gaps = np.linalg.norm(resampled - averaged.states, axis=1)
    return float(gaps.max())


def sweep_errors(sys: NetworkSystem, plan: VibrationPlan, epsilons,
                 horizon: float = 10.0, x0=None) -> list[tuple[float, float]]:
    """(epsilon, sup-error) points comparing the full and averaged runs."""
    a_bar = _averaged_matrix(sys, plan)
    x0v = _default_x0(sys.n, x0)
    avg_traj = simulate_averaged(a_bar, x0=x0v, horizon=horizon)
    out = []
    for eps in epsilons:
        scaled = VibrationPlan(entries=plan.entries, epsilon=float(eps),
                               targets=plan.targets)
        full = simulate_full(sys, scaled, x0=x0v, horizon=horizon)
        out.append((float(eps), compare(full, avg_traj)))
    return out


def _averaged_matrix(sys: NetworkSystem, plan: VibrationPlan,
                     tol: float = 1e-6) -> np.ndarray:
    try:
        return averaged_closed_form(sys, plan).a_bar
    except NotNilpotent:
        return averaged_numeric(sys, plan, tol=tol).a_bar


def verdict(sys: NetworkSystem, plan: VibrationPlan,
            options: Optional[SimOptions] = None) -> StabilityVerdict:
    """Averaged spectral abscissa plus an observed-decay check on the full run."""
    opts = options or SimOptions()
    try:
        res = averaged_closed_form(sys, plan)
        method = "closed_form"
    except NotNilpotent:
        res = averaged_numeric(sys, plan, tol=opts.avg_tol)
        method = "numeric"
    absc = spectral_abscissa(res.a_bar).abscissa
    traj = simulate_full(sys, plan, x0=opts.x0, horizon=opts.horizon,
                         step=opts.step)
    if traj.blew_up or traj.initial_norm == 0.0:
        ratio = math.inf
    else:
        ratio = traj.final_norm / traj.initial_norm
    return StabilityVerdict(
        abscissa_a_bar=absc,
        decay_observed=bool(ratio < opts.decay_threshold),
        final_over_initial_norm=ratio,
        epsilon_used=plan.epsilon,
        method=method)


def verdict_to_dict(v: StabilityVerdict) -> dict:
    return {
        "abscissa_a_bar": v.abscissa_a_bar,
        "decay_observed": v.decay_observed,
        "final_over_initial_norm": v.final_over_initial_norm,
        "epsilon": v.epsilon_used,
        "averaging_method": v.method,
    }


def trajectory_to_csv(traj: Trajectory, path) -> None:
    n = traj.states.shape[1]
    header = "t," + ",".join(f"x{k}" for k in range(1, n + 1))
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for t, row in zip(traj.times, traj.states):
            fh.write(f"{t:.12g}," + ",".join(f"{v:.12g}" for v in row) + "\n")
