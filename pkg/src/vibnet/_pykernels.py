"""Pure-Python (numpy) fallback for the compiled inner loops.

Same contracts as ``vibnet._kernels``; selected by ``vibnet._backend`` when
the extension is unavailable or when VIBNET_BACKEND=python.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def _vibration_matrix(n, rows, cols, amps, betas, phases, s, out):
    out[:] = 0.0
    for k in range(len(rows)):
        out[rows[k], cols[k]] += amps[k] * np.sin(betas[k] * s + phases[k])
    return out


def simulate_vibration(a, rows, cols, amps, betas, phases, eps, x0, t_end, h, stride):
    """Fixed-step RK4 for dx/dt = (A + V(t/eps)/eps) x with sinusoidal V.

    Returns (times, states, blew_up).  States are sampled every `stride`
    steps plus the final step; on overflow the output is truncated at the
    last finite sample and blew_up is True.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    m = len(rows)
    nsteps = max(1, int(round(t_end / h)))
    h = t_end / nsteps

    x = np.array(x0, dtype=float)
    times = [0.0]
    states = [x.copy()]

    def rhs(t, x):
        y = a @ x
        if m:
            s = t / eps
            for k in range(m):
                y[rows[k]] += (amps[k] / eps) * np.sin(betas[k] * s + phases[k]) * x[cols[k]]
        return y

    t = 0.0
    blew_up = False
    for step in range(1, nsteps + 1):
        k1 = rhs(t, x)
        k2 = rhs(t + h / 2, x + (h / 2) * k1)
        k3 = rhs(t + h / 2, x + (h / 2) * k2)
        k4 = rhs(t + h, x + h * k3)
        x = x + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        t = step * h
        if not np.all(np.isfinite(x)):
            blew_up = True
            break
        if step % stride == 0 or step == nsteps:
            times.append(t)
            states.append(x.copy())
    return np.array(times), np.array(states), blew_up


def make_averaging_state(n):
    return {
        "psi": np.eye(n),
        "pinv": np.eye(n),
        "i1g": np.zeros((n, n)),
        "i2g": np.zeros((n, n)),
        "i1p": np.zeros((n, n)),
        "i2p": np.zeros((n, n)),
        "g_prev": None,   # set on first advance
        "p_prev": None,
        "s": 0.0,
        "max_psi": 1.0,
    }


def advance_averaging(a, rows, cols, amps, betas, phases, h, t_add, state):
    """Advance the auxiliary flow Psi' = V(s) Psi, Pinv' = -Pinv V(s) by t_add,
    accumulating trapezoid integrals of g = Pinv A Psi and of Psi, plus their
    first antiderivatives (for the triangular-window average)."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    m = len(rows)
    psi = state["psi"]
    pinv = state["pinv"]
    i1g, i2g = state["i1g"], state["i2g"]
    i1p, i2p = state["i1p"], state["i2p"]
    s = state["s"]
    if state["g_prev"] is None:
        state["g_prev"] = pinv @ a @ psi
        state["p_prev"] = psi.copy()
    g_prev = state["g_prev"]
    p_prev = state["p_prev"]
    max_psi = state["max_psi"]

    scratch = np.zeros((n, n))

    def vib(t):
        return _vibration_matrix(n, rows, cols, amps, betas, phases, t, scratch).copy()

    nsteps = max(1, int(round(t_add / h)))
    hh = t_add / nsteps
    for _ in range(nsteps):
        if m:
            v1 = vib(s)
            v2 = vib(s + hh / 2)
            v4 = vib(s + hh)
            k1 = v1 @ psi
            l1 = -pinv @ v1
            k2 = v2 @ (psi + (hh / 2) * k1)
            l2 = -(pinv + (hh / 2) * l1) @ v2
            k3 = v2 @ (psi + (hh / 2) * k2)
            l3 = -(pinv + (hh / 2) * l2) @ v2
            k4 = v4 @ (psi + hh * k3)
            l4 = -(pinv + hh * l3) @ v4
            psi = psi + (hh / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
            pinv = pinv + (hh / 6) * (l1 + 2 * l2 + 2 * l3 + l4)
        s += hh
        g = pinv @ a @ psi
        i1g_new = i1g + (hh / 2) * (g_prev + g)
        i2g = i2g + (hh / 2) * (i1g + i1g_new)
        i1g = i1g_new
        g_prev = g
        i1p_new = i1p + (hh / 2) * (p_prev + psi)
        i2p = i2p + (hh / 2) * (i1p + i1p_new)
        i1p = i1p_new
        p_prev = psi.copy()
        mp = float(np.abs(psi).max())
        if mp > max_psi:
            max_psi = mp

    state.update(psi=psi, pinv=pinv, i1g=i1g, i2g=i2g, i1p=i1p, i2p=i2p,
                 g_prev=g_prev, p_prev=p_prev, s=s, max_psi=max_psi)
    return state
