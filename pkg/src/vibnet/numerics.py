"""Dense linear-algebra and integration primitives.

Eigenvalues go through LAPACK (Hessenberg reduction + shifted QR, via
numpy).  A characteristic-polynomial cross-check for small matrices is
provided as an independent verification route; it never shares code with
the QR path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import impl
from .errors import NoConvergence, NonFinite


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    abscissa: float


def spectral_abscissa(m) -> Spectrum:
    """Eigenvalues and their maximal real part."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"need a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    try:
        eig = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    order = np.lexsort((eig.imag, eig.real))
    eig = eig[order]
    return Spectrum(eigenvalues=eig, abscissa=float(eig.real.max()))


def charpoly_coefficients(m) -> list[float]:
    """Monic characteristic polynomial coefficients by the trace recursion
    (Faddeev-LeVerrier); pure matrix arithmetic, no eigensolver."""
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    coeffs = [1.0]
    b = np.zeros_like(m)
    c = 1.0
    for k in range(1, n + 1):
        b = m @ (b + c * np.eye(n))
        c = -np.trace(b) / k
        coeffs.append(float(c))
    return coeffs


def charpoly_spectrum(m, digits: int = 30) -> Spectrum:
    """Independent small-n spectrum: characteristic polynomial roots via
    mpmath's polynomial solver.  Intended as a test oracle for n <= 4."""
    import mpmath

    coeffs = charpoly_coefficients(m)
    with mpmath.workdps(digits):
        roots = mpmath.polyroots(coeffs, maxsteps=200, extraprec=80)
    eig = np.array([complex(r) for r in roots])
    order = np.lexsort((eig.imag, eig.real))
    eig = eig[order]
    return Spectrum(eigenvalues=eig, abscissa=float(eig.real.max()))


def integrate_ltv(f, x0, t_span, h):
    """Classic fixed-step RK4 for dx/dt = F(t) x with a time-dependent matrix.

    `f` maps a time to an (n, n) array.  Raises NonFinite with the blow-up
    time if the state overflows.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if h <= 0:
        raise ValueError("step must be positive")
    x = np.array(x0, dtype=float)
    nsteps = max(1, int(round((t1 - t0) / h)))
    hh = (t1 - t0) / nsteps
    times = np.empty(nsteps + 1)
    states = np.empty((nsteps + 1, x.size))
    times[0] = t0
    states[0] = x
    t = t0
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, nsteps + 1):
            k1 = f(t) @ x
            k2 = f(t + hh / 2) @ (x + (hh / 2) * k1)
            k3 = f(t + hh / 2) @ (x + (hh / 2) * k2)
            k4 = f(t + hh) @ (x + hh * k3)
            x = x + (hh / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
            t = t0 + k * hh
            if not np.all(np.isfinite(x)):
                raise NonFinite(f"state overflow at t={t:.6g}", time=t)
            times[k] = t
            states[k] = x
    return times, states


# --- backend-dispatched hot loops -------------------------------------------

def _as_plan_arrays(positions, amps, betas, phases):
    rows = np.ascontiguousarray([p[0] for p in positions], dtype=np.int64)
    cols = np.ascontiguousarray([p[1] for p in positions], dtype=np.int64)
    amps = np.ascontiguousarray(amps, dtype=float)
    betas = np.ascontiguousarray(betas, dtype=float)
    phases = np.ascontiguousarray(phases, dtype=float)
    return rows, cols, amps, betas, phases


def simulate_sinusoidal(a, positions, amps, betas, phases, eps, x0, t_end, h,
                        max_samples: int = 4001):
    """Integrate dx/dt = (A + V(t/eps)/eps) x; positions are 0-based (row, col).

    Returns (times, states, blew_up).
    """
    a = np.array(a, dtype=float, order="C")  # writable copy for the kernel
    rows, cols, amps, betas, phases = _as_plan_arrays(positions, amps, betas, phases)
    nsteps = max(1, int(round(t_end / h)))
    stride = max(1, nsteps // (max_samples - 1))
    x0 = np.ascontiguousarray(x0, dtype=float)
    return impl.simulate_vibration(a, rows, cols, amps, betas, phases,
                                   float(eps), x0, float(t_end), float(h), stride)


class AveragingIntegrator:
    """Incremental auxiliary-flow averager used by the numeric oracle.

    Integrates Psi' = V(s) Psi and Psi^{-1}' = -Psi^{-1} V(s) from the
    identity, accumulating running and triangular-window averages of both
    Psi^{-1} A Psi and Psi itself.
    """

    def __init__(self, a, positions, amps, betas, phases, h):
        self.a = np.array(a, dtype=float, order="C")  # writable copy for the kernel
        (self.rows, self.cols, self.amps,
         self.betas, self.phases) = _as_plan_arrays(positions, amps, betas, phases)
        self.h = float(h)
        self.state = impl.make_averaging_state(self.a.shape[0])

    def advance(self, t_add: float) -> None:
        impl.advance_averaging(self.a, self.rows, self.cols, self.amps,
                               self.betas, self.phases, self.h, float(t_add),
                               self.state)

    @property
    def horizon(self) -> float:
        return self.state["s"]

    @property
    def max_psi_norm(self) -> float:
        return self.state["max_psi"]

    def windowed_average(self) -> np.ndarray:
        """Triangular-window average of Psi^{-1} A Psi over [0, s]."""
        s = self.state["s"]
        return 2.0 * self.state["i2g"] / (s * s)

    def running_average(self) -> np.ndarray:
        return self.state["i1g"] / self.state["s"]

    def windowed_psi_average(self) -> np.ndarray:
        s = self.state["s"]
        return 2.0 * self.state["i2p"] / (s * s)
