# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: vibrational-system RK4 and auxiliary-flow averaging.

Mirrors vibnet._pykernels; keep the two in sync.
"""

from libc.math cimport sin, fabs, isfinite

import numpy as np

BACKEND_NAME = "compiled"


cdef inline void _rhs(double[:, ::1] a, Py_ssize_t n,
                      long[::1] rows, long[::1] cols, Py_ssize_t m,
                      double[::1] amps, double[::1] betas, double[::1] phases,
                      double inv_eps, double t,
                      double[::1] x, double[::1] out) noexcept nogil:
    cdef Py_ssize_t i, j, k
    cdef double acc, s
    for i in range(n):
        acc = 0.0
        for j in range(n):
            acc += a[i, j] * x[j]
        out[i] = acc
    if m:
        s = t * inv_eps
        for k in range(m):
            out[rows[k]] += amps[k] * inv_eps * sin(betas[k] * s + phases[k]) * x[cols[k]]


def simulate_vibration(double[:, ::1] a, long[::1] rows, long[::1] cols,
                       double[::1] amps, double[::1] betas, double[::1] phases,
                       double eps, double[::1] x0, double t_end, double h,
                       long stride):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = rows.shape[0]
    cdef long nsteps = <long>(t_end / h + 0.5)
    if nsteps < 1:
        nsteps = 1
    cdef double hh = t_end / nsteps
    cdef double inv_eps = 1.0 / eps

    cdef long nsamples = nsteps // stride + 2
    times_arr = np.zeros(nsamples)
    states_arr = np.zeros((nsamples, n))
    cdef double[::1] times = times_arr
    cdef double[:, ::1] states = states_arr

    x_arr = np.array(x0, dtype=float)
    cdef double[::1] x = x_arr
    k1_arr = np.zeros(n); k2_arr = np.zeros(n); k3_arr = np.zeros(n); k4_arr = np.zeros(n)
    tmp_arr = np.zeros(n)
    cdef double[::1] k1 = k1_arr, k2 = k2_arr, k3 = k3_arr, k4 = k4_arr, tmp = tmp_arr

    cdef Py_ssize_t i
    cdef long step, nrec = 0
    cdef double t = 0.0
    cdef bint blew_up = False
    cdef bint finite

    for i in range(n):
        states[0, i] = x[i]
    times[0] = 0.0
    nrec = 1

    with nogil:
        for step in range(1, nsteps + 1):
            _rhs(a, n, rows, cols, m, amps, betas, phases, inv_eps, t, x, k1)
            for i in range(n):
                tmp[i] = x[i] + 0.5 * hh * k1[i]
            _rhs(a, n, rows, cols, m, amps, betas, phases, inv_eps, t + 0.5 * hh, tmp, k2)
            for i in range(n):
                tmp[i] = x[i] + 0.5 * hh * k2[i]
            _rhs(a, n, rows, cols, m, amps, betas, phases, inv_eps, t + 0.5 * hh, tmp, k3)
            for i in range(n):
                tmp[i] = x[i] + hh * k3[i]
            _rhs(a, n, rows, cols, m, amps, betas, phases, inv_eps, t + hh, tmp, k4)
            finite = True
            for i in range(n):
                x[i] = x[i] + hh / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                if not isfinite(x[i]):
                    finite = False
            t = step * hh
            if not finite:
                blew_up = True
                break
            if step % stride == 0 or step == nsteps:
                times[nrec] = t
                for i in range(n):
                    states[nrec, i] = x[i]
                nrec += 1

    return times_arr[:nrec].copy(), states_arr[:nrec].copy(), bool(blew_up)


def make_averaging_state(n):
    return {
        "psi": np.eye(n),
        "pinv": np.eye(n),
        "i1g": np.zeros((n, n)),
        "i2g": np.zeros((n, n)),
        "i1p": np.zeros((n, n)),
        "i2p": np.zeros((n, n)),
        "g_prev": None,
        "p_prev": None,
        "s": 0.0,
        "max_psi": 1.0,
    }


cdef inline void _matmul(double[:, ::1] out, double[:, ::1] x, double[:, ::1] y,
                         Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j, k
    cdef double acc
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for k in range(n):
                acc += x[i, k] * y[k, j]
            out[i, j] = acc


cdef inline void _apply_v_left(double[:, ::1] out, double[:, ::1] psi,
                               long[::1] rows, long[::1] cols, Py_ssize_t m,
                               double[::1] amps, double[::1] betas, double[::1] phases,
                               double s, Py_ssize_t n) noexcept nogil:
    # out = V(s) @ psi  with V sparse sinusoidal
    cdef Py_ssize_t k, j
    cdef double c
    for k in range(n):
        for j in range(n):
            out[k, j] = 0.0
    for k in range(m):
        c = amps[k] * sin(betas[k] * s + phases[k])
        for j in range(n):
            out[rows[k], j] += c * psi[cols[k], j]


cdef inline void _apply_v_right(double[:, ::1] out, double[:, ::1] pinv,
                                long[::1] rows, long[::1] cols, Py_ssize_t m,
                                double[::1] amps, double[::1] betas, double[::1] phases,
                                double s, Py_ssize_t n) noexcept nogil:
    # out = -pinv @ V(s)
    cdef Py_ssize_t k, i
    cdef double c
    for k in range(n):
        for i in range(n):
            out[k, i] = 0.0
    for k in range(m):
        c = amps[k] * sin(betas[k] * s + phases[k])
        for i in range(n):
            out[i, cols[k]] -= c * pinv[i, rows[k]]


def advance_averaging(double[:, ::1] a, long[::1] rows, long[::1] cols,
                      double[::1] amps, double[::1] betas, double[::1] phases,
                      double h, double t_add, dict state):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = rows.shape[0]

    psi_arr = np.ascontiguousarray(state["psi"])
    pinv_arr = np.ascontiguousarray(state["pinv"])
    i1g_arr = np.ascontiguousarray(state["i1g"])
    i2g_arr = np.ascontiguousarray(state["i2g"])
    i1p_arr = np.ascontiguousarray(state["i1p"])
    i2p_arr = np.ascontiguousarray(state["i2p"])
    if state["g_prev"] is None:
        state["g_prev"] = np.asarray(state["pinv"]) @ np.asarray(a) @ np.asarray(state["psi"])
        state["p_prev"] = np.array(state["psi"])
    gp_arr = np.ascontiguousarray(state["g_prev"])
    pp_arr = np.ascontiguousarray(state["p_prev"])

    cdef double[:, ::1] psi = psi_arr, pinv = pinv_arr
    cdef double[:, ::1] i1g = i1g_arr, i2g = i2g_arr, i1p = i1p_arr, i2p = i2p_arr
    cdef double[:, ::1] g_prev = gp_arr, p_prev = pp_arr

    k1_arr = np.zeros((n, n)); k2_arr = np.zeros((n, n)); k3_arr = np.zeros((n, n)); k4_arr = np.zeros((n, n))
    l1_arr = np.zeros((n, n)); l2_arr = np.zeros((n, n)); l3_arr = np.zeros((n, n)); l4_arr = np.zeros((n, n))
    st_arr = np.zeros((n, n)); g_arr = np.zeros((n, n)); ap_arr = np.zeros((n, n)); i1n_arr = np.zeros((n, n))
    cdef double[:, ::1] k1 = k1_arr, k2 = k2_arr, k3 = k3_arr, k4 = k4_arr
    cdef double[:, ::1] l1 = l1_arr, l2 = l2_arr, l3 = l3_arr, l4 = l4_arr
    cdef double[:, ::1] stage = st_arr, g = g_arr, apsi = ap_arr, i1_new = i1n_arr

    cdef double s = state["s"]
    cdef double max_psi = state["max_psi"]
    cdef long nsteps = <long>(t_add / h + 0.5)
    if nsteps < 1:
        nsteps = 1
    cdef double hh = t_add / nsteps

    cdef long step
    cdef Py_ssize_t i, j
    cdef double v

    with nogil:
        for step in range(nsteps):
            if m:
                # RK4 stages for psi (k*) and pinv (l*)
                _apply_v_left(k1, psi, rows, cols, m, amps, betas, phases, s, n)
                _apply_v_right(l1, pinv, rows, cols, m, amps, betas, phases, s, n)

                for i in range(n):
                    for j in range(n):
                        stage[i, j] = psi[i, j] + 0.5 * hh * k1[i, j]
                _apply_v_left(k2, stage, rows, cols, m, amps, betas, phases, s + 0.5 * hh, n)
                for i in range(n):
                    for j in range(n):
                        stage[i, j] = pinv[i, j] + 0.5 * hh * l1[i, j]
                _apply_v_right(l2, stage, rows, cols, m, amps, betas, phases, s + 0.5 * hh, n)

                for i in range(n):
                    for j in range(n):
                        stage[i, j] = psi[i, j] + 0.5 * hh * k2[i, j]
                _apply_v_left(k3, stage, rows, cols, m, amps, betas, phases, s + 0.5 * hh, n)
                for i in range(n):
                    for j in range(n):
                        stage[i, j] = pinv[i, j] + 0.5 * hh * l2[i, j]
                _apply_v_right(l3, stage, rows, cols, m, amps, betas, phases, s + 0.5 * hh, n)

                for i in range(n):
                    for j in range(n):
                        stage[i, j] = psi[i, j] + hh * k3[i, j]
                _apply_v_left(k4, stage, rows, cols, m, amps, betas, phases, s + hh, n)
                for i in range(n):
                    for j in range(n):
                        stage[i, j] = pinv[i, j] + hh * l3[i, j]
                _apply_v_right(l4, stage, rows, cols, m, amps, betas, phases, s + hh, n)

                for i in range(n):
                    for j in range(n):
                        psi[i, j] += hh / 6.0 * (k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j])
                        pinv[i, j] += hh / 6.0 * (l1[i, j] + 2.0 * l2[i, j] + 2.0 * l3[i, j] + l4[i, j])
            s += hh

            # g = pinv @ a @ psi, trapezoid into i1g, i1g into i2g
            _matmul(apsi, a, psi, n)
            _matmul(g, pinv, apsi, n)
            for i in range(n):
                for j in range(n):
                    i1_new[i, j] = i1g[i, j] + 0.5 * hh * (g_prev[i, j] + g[i, j])
                    i2g[i, j] += 0.5 * hh * (i1g[i, j] + i1_new[i, j])
                    i1g[i, j] = i1_new[i, j]
                    g_prev[i, j] = g[i, j]
            for i in range(n):
                for j in range(n):
                    i1_new[i, j] = i1p[i, j] + 0.5 * hh * (p_prev[i, j] + psi[i, j])
                    i2p[i, j] += 0.5 * hh * (i1p[i, j] + i1_new[i, j])
                    i1p[i, j] = i1_new[i, j]
                    p_prev[i, j] = psi[i, j]
                    v = fabs(psi[i, j])
                    if v > max_psi:
                        max_psi = v

    state.update(psi=psi_arr, pinv=pinv_arr, i1g=i1g_arr, i2g=i2g_arr,
                 i1p=i1p_arr, i2p=i2p_arr, g_prev=gp_arr, p_prev=pp_arr,
                 s=s, max_psi=max_psi)
    return state
