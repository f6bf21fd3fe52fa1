"""Monotone maps on boxes: solving ``f(x) = F`` and tuning a δ′ chain.

If ``f: prod [a_k, b_k] -> R^m`` is continuous, every component is
nondecreasing in every argument, and the corner values

    F_k^- = f_k(b_1, .., b_{k-1}, a_k, b_{k+1}, .., b_m)
    F_k^+ = f_k(a_1, .., a_{k-1}, b_k, a_{k+1}, .., a_m)

satisfy ``F_k^- < F_k^+``, then every ``F`` in ``prod [F_k^-, F_k^+]`` is
attained.  That is an existence statement only.  :func:`solve_box` looks
for the point with Gauss-Seidel sweeps of scalar root finds, which converge
fast when each ``f_k`` depends mostly on ``x_k``, and it says so when they
do not.

:func:`tune_chain` uses this to place eigenvalues ``m+1 .. 2m`` of an
``m``-cell coupled chain exactly on prescribed values ``nu_1 < .. < nu_m``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from . import cell_spectrum
from .errors import CouplingTooStrong, NoBracket, NonConvergence, SpectralDesignError
from .operator_assembly import Schedule
from .truncated_spectrum import TruncatedOperator, eigenvalues_below, nth_eigenvalue

log = logging.getLogger(__name__)


def _factor_signs(signs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Write a +-1 matrix as ``outer(row, col)``; only such patterns can be
    reduced to the nondecreasing case by reflections."""
    row = signs[:, 0].copy()
    col = signs[0, :] * row[0]
    if not np.array_equal(np.outer(row, col), signs):
        raise ValueError("monotone_signs is not reducible by reflections")
    return row, col


class MonotoneBoxProblem:
    """``f(x) = F`` on a box, with ``f`` componentwise monotone.

    ``monotone_signs[k, j] = -1`` declares ``f_k`` nonincreasing in ``x_j``.
    Internally coordinates and components are reflected so that every
    component becomes nondecreasing; the corner values and the hypotheses
    are checked in that normal form at construction.
    """

    def __init__(self, f: Callable[[np.ndarray], np.ndarray], lower: Sequence[float],
                 upper: Sequence[float], target: Sequence[float],
                 monotone_signs: np.ndarray | None = None):
        self.f = f
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        self.target = np.asarray(target, dtype=float)
        self.m = m = len(self.lower)
        if not (len(self.upper) == m == len(self.target)):
            raise ValueError("box and target dimensions differ")
        if not np.all(self.lower < self.upper):
            raise ValueError("need a_k < b_k for every coordinate")
        signs = np.ones((m, m)) if monotone_signs is None else np.asarray(monotone_signs, float)
        self.row_sign, self.col_sign = _factor_signs(signs)
        self.f_minus, self.f_plus = self._corner_values()
        if not np.all(self.f_minus < self.f_plus):
            raise ValueError(f"corner values violate F^- < F^+: {self.f_minus}, {self.f_plus}")
        t = self.row_sign * self.target
        if not np.all((self.f_minus <= t) & (t <= self.f_plus)):
            raise ValueError("target lies outside prod [F_k^-, F_k^+]")

    # normal form: y in the reflected box, g nondecreasing everywhere
    def _to_x(self, y: np.ndarray) -> np.ndarray:
        return np.where(self.col_sign > 0, y, self.lower + self.upper - y)

    def g(self, y: np.ndarray) -> np.ndarray:
        return self.row_sign * np.asarray(self.f(self._to_x(y)), dtype=float)

    def _corner_values(self):
        a, b = self.lower, self.upper
        fm, fp = np.empty(self.m), np.empty(self.m)
        for k in range(self.m):
            y = b.copy()
            y[k] = a[k]
            fm[k] = self.g(y)[k]
            y = a.copy()
            y[k] = b[k]
            fp[k] = self.g(y)[k]
        return fm, fp


@dataclass
class BoxSolution:
    x: np.ndarray
    value: np.ndarray
    residual: float
    sweeps: int
    history: list[float] = field(default_factory=list)


def solve_box(problem: MonotoneBoxProblem, tol: float = 1e-10, max_sweeps: int = 50,
              order: Sequence[int] | None = None) -> BoxSolution:
    """Cyclic coordinate root finding for ``f(x) = F``.

    Each sweep solves ``f_k(x) = F_k`` for ``x_k`` with the other coordinates
    frozen.  If a coordinate cannot straddle its target it is clamped to the
    nearer end of its range.  After three sweeps that cut the residual by
    less than 10% the iterate is pulled halfway toward the box centre once;
    :class:`NonConvergence` carries the best point when ``max_sweeps`` run out.
    """
    P = problem
    t = P.row_sign * P.target
    order = list(range(P.m)) if order is None else list(order)
    y = 0.5 * (P.lower + P.upper)
    val = P.g(y)
    res = float(np.max(np.abs(val - t)))
    best = (res, y.copy(), val.copy())
    history = [res]
    restarted = False
    for sweep in range(1, max_sweeps + 1):
        if res <= tol:
            break
        for k in order:
            def fk(s, k=k):
                z = y.copy()
                z[k] = s
                return P.g(z)[k] - t[k]

            lo_v, hi_v = fk(P.lower[k]), fk(P.upper[k])
            if lo_v > 0 or hi_v < 0:
                log.debug("sweep %d: %s", sweep, NoBracket(f"coordinate {k} clamped"))
                y[k] = P.lower[k] if lo_v > 0 else P.upper[k]
            elif lo_v == 0:
                y[k] = P.lower[k]
            elif hi_v == 0:
                y[k] = P.upper[k]
            else:
                width = P.upper[k] - P.lower[k]
                y[k] = brentq(fk, P.lower[k], P.upper[k], xtol=1e-15 * width,
                              rtol=4 * np.finfo(float).eps, maxiter=200)
        val = P.g(y)
        res = float(np.max(np.abs(val - t)))
        history.append(res)
        log.debug("sweep %d residual %.3e", sweep, res)
        if res < best[0]:
            best = (res, y.copy(), val.copy())
        if res > tol and len(history) >= 4 and history[-1] > 0.9 * history[-4] and not restarted:
            restarted = True
            y = 0.5 * (y + 0.5 * (P.lower + P.upper))
    res, y, val = best
    if res > tol:
        raise NonConvergence(f"residual {res:.3e} > {tol:.1e} after {max_sweeps} sweeps",
                             best=P._to_x(y), residual=res)
    return BoxSolution(P._to_x(y), P.row_sign * val, res, len(history) - 1, history)


@dataclass(frozen=True)
class ChainTuneSpec:
    """Targets, cell lengths, junction strength and the spectral window.

    Defaults: every ``d_k = pi / sqrt(2 nu_m)`` so ``nu_m = (pi/d)^2 / 2``;
    the window is ``(nu_1 / 2, (nu_m + (pi/d)^2) / 2)``.
    """

    targets: tuple[float, ...]
    coupling: float
    lengths: tuple[float, ...] | None = None
    window: tuple[float, float] | None = None

    def resolved(self) -> "ChainTuneSpec":
        nu = tuple(float(v) for v in self.targets)
        m = len(nu)
        if m < 1 or any(b <= a for a, b in zip(nu, nu[1:])) or nu[0] <= 0:
            raise ValueError("targets must be positive and strictly increasing")
        d = self.lengths or (math.pi / math.sqrt(2.0 * nu[-1]),) * m
        if len(d) != m:
            raise ValueError("one length per target")
        top = min((math.pi / dk) ** 2 for dk in d)
        if not nu[-1] < top:
            raise ValueError("every cell needs nu_m < (pi/d_k)^2")
        window = self.window or (0.5 * nu[0], 0.5 * (nu[-1] + top))
        guard = min((2.0 * math.pi / dk) ** 2 for dk in d)
        if not (0 < window[0] < nu[0] and nu[-1] < window[1] < guard):
            raise ValueError(f"window {window} must contain the targets and stay below {guard}")
        return ChainTuneSpec(nu, float(self.coupling), tuple(d), tuple(window))


@dataclass
class ChainTuneResult:
    schedule: Schedule
    eigenvalues: list[float]
    solution: BoxSolution
    box: tuple[np.ndarray, np.ndarray]
    corners: tuple[np.ndarray, np.ndarray]


def _chain_schedule(lengths, t, p) -> Schedule:
    qs = [cell_spectrum.INF if tk == 0 else 1.0 / tk for tk in t]
    return Schedule.from_cells(lengths, qs, [p] * (len(lengths) - 1))


def _chain_map(spec: ChainTuneSpec):
    m = len(spec.targets)

    def f(t):
        op = TruncatedOperator(_chain_schedule(spec.lengths, t, spec.coupling))
        return np.array([nth_eigenvalue(op, m + k) for k in range(1, m + 1)])

    return f


def tune_chain(spec: ChainTuneSpec, tol: float = 1e-8, max_sweeps: int = 60) -> ChainTuneResult:
    """Choose ``t_k = 1/q_k`` so that eigenvalues ``m+1..2m`` equal the targets.

    Eigenvalues grow with each ``t_k`` (the form adds ``t_k |jump|^2``), so
    the normal form needs no reflection.  The box for ``t_k`` is where the
    isolated cell's second eigenvalue lies within ``gamma`` of ``nu_k``.
    """
    spec = spec.resolved()
    nu = np.asarray(spec.targets)
    m = len(nu)
    lo_w, hi_w = spec.window
    gaps = np.diff(nu) if m > 1 else np.array([math.inf])
    gamma = 0.45 * min(float(np.min(gaps)), nu[0] - lo_w, hi_w - nu[-1])
    t_lo = np.array([1.0 / cell_spectrum.tune_q(d, v - gamma) for d, v in zip(spec.lengths, nu)])
    t_hi = np.array([1.0 / cell_spectrum.tune_q(d, v + gamma) for d, v in zip(spec.lengths, nu)])
    f = _chain_map(spec)

    _audit_monotone(f, t_lo, t_hi)
    try:
        problem = MonotoneBoxProblem(f, t_lo, t_hi, nu)
    except ValueError as exc:
        raise CouplingTooStrong(f"corner inequalities fail at p = {spec.coupling}: {exc}") from exc
    if not np.all((problem.f_minus < nu) & (nu < problem.f_plus)):
        raise CouplingTooStrong("corner inequalities are not strict")

    sol = solve_box(problem, tol=tol, max_sweeps=max_sweeps)
    sched = _chain_schedule(spec.lengths, sol.x, spec.coupling)
    sched.meta = {"targets": list(nu), "window": list(spec.window)}
    spectrum = eigenvalues_below(TruncatedOperator(sched), hi_w * 1.0000001 + 1e-9)
    ev = spectrum.eigenvalues
    tuned = [nth_eigenvalue(TruncatedOperator(sched), m + k) for k in range(1, m + 1)]
    if len(ev) < 2 * m or max(ev[:m]) >= lo_w:
        raise CouplingTooStrong("low eigenvalues leave [0, inf I)")
    if len(ev) > 2 * m:
        raise CouplingTooStrong("an eigenvalue beyond 2m entered the window")
    if np.max(np.abs(np.asarray(tuned) - nu)) > tol:
        raise NonConvergence("tuned eigenvalues miss their targets", best=sol.x)
    return ChainTuneResult(sched, ev, sol, (t_lo, t_hi), (problem.f_minus, problem.f_plus))


def _audit_monotone(f, lower, upper, grid: int = 3, slack: float = 1e-9):
    """Check nondecreasing behaviour along each coordinate on a small grid."""
    centre = 0.5 * (lower + upper)
    for j in range(len(lower)):
        prev = None
        for s in np.linspace(lower[j], upper[j], grid):
            x = centre.copy()
            x[j] = s
            val = f(x)
            if prev is not None and np.any(val < prev - slack * np.maximum(1.0, np.abs(prev))):
                raise SpectralDesignError(f"chain map is not monotone in coordinate {j}")
            prev = val
