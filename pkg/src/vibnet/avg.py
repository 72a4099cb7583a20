"""Averaged system computation and functioning-network diffs.

For plans whose positions have disjoint row and column sets, the auxiliary
flow has the closed-form fundamental matrix Psi(s) = I + N(s) with
N(s) = -sum_k (U_k / beta_k) cos(beta_k s + phi_k) and N(s1) N(s2) = 0, so

    Abar = A - sum_{k,l: beta_k = beta_l} (cos(phi_k - phi_l) / 2)
                (U_k / beta_k) A (U_l / beta_l).

The numeric route integrates the auxiliary flow from the identity instead,
which is a different fundamental matrix; the two averages differ by a
similarity by the time average of Psi.  Conjugating by that average maps
the numeric result onto the same functioning network the closed form (and
the edge designs) use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import NonConvergent, NotNilpotent, SingularFundamental, ValidationError
from .netcore import NetworkSystem
from .numerics import AveragingIntegrator
from .synth import VibrationEntry, VibrationPlan, same_frequency, validate_plan_sparsity


@dataclass(frozen=True)
class DiffEntry:
    i: int
    j: int
    before: float
    after: float
    kind: str              # increase | decrease | removal | creation
    side_effect: bool = False


@dataclass(frozen=True)
class AveragedResult:
    a_bar: np.ndarray
    diff: tuple[DiffEntry, ...]
    method: str            # closed_form | numeric
    horizon: float = 0.0
    residual: float = 0.0


@dataclass(frozen=True)
class FundamentalMatrix:
    """Symbolic Psi(s) = I + N(s) for an index-2 nilpotent plan."""

    n: int
    terms: tuple[tuple[int, int, float, float, float], ...]  # (i, j, u/beta, beta, phase)

    def n_of(self, s: float) -> np.ndarray:
        m = np.zeros((self.n, self.n))
        for (i, j, ratio, beta, phase) in self.terms:
            m[i - 1, j - 1] -= ratio * math.cos(beta * s + phase)
        return m

    def psi(self, s: float) -> np.ndarray:
        return np.eye(self.n) + self.n_of(s)

    def psi_inv(self, s: float) -> np.ndarray:
        return np.eye(self.n) - self.n_of(s)

    @property
    def sup_bound(self) -> float:
        """Bound on max-norm of Psi: 1 + sum |u_k| / beta_k."""
        return 1.0 + sum(abs(r) for (_, _, r, _, _) in self.terms)


def _active_entries(plan: VibrationPlan) -> list[VibrationEntry]:
    return [e for e in plan.entries if e.u != 0.0]


def _check_nilpotent(entries: Sequence[VibrationEntry]) -> None:
    rows = {e.i for e in entries}
    cols = {e.j for e in entries}
    overlap = rows & cols
    if overlap:
        raise NotNilpotent(
            f"plan rows and columns share nodes {sorted(overlap)}; "
            "closed form unavailable"
        )


def fundamental_analytic(plan: VibrationPlan, n: int) -> FundamentalMatrix:
    """Closed-form fundamental matrix; raises NotNilpotent when the plan's
    positions do not keep N(s1) N(s2) = 0."""
    entries = _active_entries(plan)
    _check_nilpotent(entries)
    terms = tuple((e.i, e.j, e.u / e.beta, e.beta, e.phase) for e in entries)
    return FundamentalMatrix(n=n, terms=terms)


def averaged_closed_form(sys: NetworkSystem, plan: VibrationPlan,
                         diff_tol: float = 1e-9) -> AveragedResult:
    """Exact averaged matrix for nilpotent plans."""
    validate_plan_sparsity(sys, plan)
    entries = _active_entries(plan)
    _check_nilpotent(entries)
    a = sys.a
    a_bar = a.copy()
    for ek in entries:
        for el in entries:
            if not same_frequency(ek, el):
                continue
            coeff = 0.5 * math.cos(ek.phase - el.phase) * ek.ratio * el.ratio
            # (e_k A e_l) lands at (row_k, col_l) with weight a[col_k, row_l]
            a_bar[ek.i - 1, el.j - 1] -= coeff * a[ek.j - 1, el.i - 1]
    diff = diff_networks(a, a_bar, diff_tol, targets=plan.targets or None)
    return AveragedResult(a_bar=a_bar, diff=tuple(diff), method="closed_form")


def averaged_numeric(sys: NetworkSystem, plan: VibrationPlan,
                     tol: float = 1e-6, t_max: float = 1e6,
                     steps_per_period: int = 64,
                     diff_tol: Optional[float] = None) -> AveragedResult:
    """Long-horizon averaging oracle; independent of the closed form.

    Integrates the auxiliary flow and its inverse by RK4, accumulates the
    triangular-window (Cesaro) average of Psi^{-1} A Psi, doubles the horizon
    until the average moves less than `tol`, then conjugates by the window
    average of Psi to land in the closed form's coordinates.
    """
    validate_plan_sparsity(sys, plan)
    entries = _active_entries(plan)
    if diff_tol is None:
        diff_tol = 10.0 * tol
    if not entries:
        diff = diff_networks(sys.a, sys.a, diff_tol, targets=plan.targets or None)
        return AveragedResult(a_bar=sys.a.copy(), diff=tuple(diff),
                              method="numeric", horizon=0.0, residual=0.0)

    beta_max = max(e.beta for e in entries)
    beta_min = min(e.beta for e in entries)
    h = (2.0 * math.pi / beta_max) / steps_per_period
    t0 = 100.0 * (2.0 * math.pi / beta_min)

    integ = AveragingIntegrator(
        sys.a,
        positions=[(e.i - 1, e.j - 1) for e in entries],
        amps=[e.u for e in entries],
        betas=[e.beta for e in entries],
        phases=[e.phase for e in entries],
        h=h,
    )
    integ.advance(t0)
    prev = integ.windowed_average()
    while True:
        integ.advance(integ.horizon)  # double the horizon
        cur = integ.windowed_average()
        residual = float(np.abs(cur - prev).max())
        if integ.max_psi_norm > 1e9:
            raise SingularFundamental(
                f"auxiliary flow unbounded (|Psi| ~ {integ.max_psi_norm:.2e})"
            )
        if residual < tol:
            break
        if integ.horizon > t_max:
            raise NonConvergent(
                f"averaging not converged by T={integ.horizon:.3g} "
                f"(residual {residual:.3g} > tol {tol:.3g})"
            )
        prev = cur

    p_bar = integ.windowed_psi_average()
    try:
        p_inv = np.linalg.inv(p_bar)
    except np.linalg.LinAlgError as exc:
        raise SingularFundamental("time average of Psi is singular") from exc
    cond = np.abs(p_bar).max() * np.abs(p_inv).max()
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularFundamental(f"conditioning of <Psi> too poor ({cond:.2e})")
    a_bar = p_bar @ cur @ p_inv
    diff = diff_networks(sys.a, a_bar, diff_tol, targets=plan.targets or None)
    return AveragedResult(a_bar=a_bar, diff=tuple(diff), method="numeric",
                          horizon=integ.horizon, residual=residual)


def diff_networks(a, a_bar, tol: float,
                  targets: Optional[Sequence[tuple[int, int]]] = None) -> list[DiffEntry]:
    """Classify entry changes between a system matrix and its averaged matrix.

    Entries that moved by less than `tol` are unchanged and not reported,
    except that any original edge whose averaged weight dropped below `tol`
    in magnitude is always reported as a removal.
    """
    a = np.asarray(a, dtype=float)
    a_bar = np.asarray(a_bar, dtype=float)
    if a.shape != a_bar.shape:
        raise ValidationError(f"shape mismatch: {a.shape} vs {a_bar.shape}")
    tset = {tuple(t) for t in targets} if targets is not None else None
    out = []
    n = a.shape[0]
    for i in range(n):
        for j in range(n):
            before = float(a[i, j])
            after = float(a_bar[i, j])
            if before != 0.0 and abs(after) < tol:
                kind = "removal"
            elif before == 0.0 and abs(after) >= tol:
                kind = "creation"
            elif abs(after - before) >= tol:
                kind = "increase" if after > before else "decrease"
            else:
                continue
            side = tset is not None and (i + 1, j + 1) not in tset
            out.append(DiffEntry(i=i + 1, j=j + 1, before=before, after=after,
                                 kind=kind, side_effect=side))
    return out


def averaged_result_to_dict(res: AveragedResult) -> dict:
    return {
        "a_bar": res.a_bar.tolist(),
        "method": res.method,
        "horizon": res.horizon,
        "residual": res.residual,
        "diff": [
            {"i": d.i, "j": d.j, "before": d.before, "after": d.after,
             "kind": d.kind, "side_effect": d.side_effect}
            for d in res.diff
        ],
    }
