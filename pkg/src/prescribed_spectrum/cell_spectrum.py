"""Exact spectrum of one Neumann cell with a midpoint δ′-interaction.

The cell is an interval of length ``d`` with Neumann ends.  At the midpoint
the derivative is continuous and the value jumps by ``q`` times the
derivative, ``u(y+) - u(y-) = q u'(y)``.  ``q = 0`` is the plain Neumann
interval, ``q = inf`` splits the cell into two independent Neumann halves.

Because the interaction sits exactly at the midpoint the problem splits by
reflection symmetry:

* even modes do not see the interaction and give ``(2 n pi / d)**2``;
* odd modes satisfy ``theta * tan(theta) = d / q`` with
  ``theta = sqrt(lambda) * d / 2``, one root in each
  ``(m pi, m pi + pi/2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .errors import BracketFailure, TargetOutOfRange

INF = math.inf

_SERIES_CUTOFF = 1e-4


class Branch(str, Enum):
    EVEN = "even"
    ODD = "odd"


@dataclass(frozen=True)
class CellSpec:
    """Cell of length ``d`` with midpoint strength ``q`` (0, positive, or INF)."""

    d: float
    q: float = 0.0

    def __post_init__(self):
        if not (self.d > 0 and math.isfinite(self.d)):
            raise ValueError(f"cell length must be positive and finite, got {self.d}")
        if not (self.q >= 0):
            raise ValueError(f"strength must be >= 0 or INF, got {self.q}")


@dataclass(frozen=True)
class CellEigenvalues:
    values: tuple[float, ...]
    branch_tags: tuple[Branch, ...]

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]


def secular_residual(d: float, q: float, lam: float) -> float:
    """Odd-mode secular function ``q k sin(k d/2) - 2 cos(k d/2)``, ``k = sqrt(lam)``.

    Its positive zeros are the odd-mode eigenvalues; the value at 0 is the
    continuous limit -2.  For ``k d < 1e-4`` a Taylor expansion is used.
    """
    if lam < 0:
        raise ValueError("lam must be >= 0")
    k = math.sqrt(lam)
    h = 0.5 * k * d
    if k * d < _SERIES_CUTOFF:
        # k sin(h) = k h (1 - h^2/6), cos(h) = 1 - h^2/2 + h^4/24
        return q * k * h * (1.0 - h * h / 6.0) - 2.0 * (1.0 - h * h / 2.0 + h ** 4 / 24.0)
    return q * k * math.sin(h) - 2.0 * math.cos(h)


def _odd_theta(c: float, m: int) -> float:
    """Root of ``theta sin(theta) - c cos(theta)`` in ``(m pi, m pi + pi/2)``."""
    if c == 0.0:
        return m * math.pi
    if math.isinf(c):
        return m * math.pi + 0.5 * math.pi
    lo, hi = m * math.pi, m * math.pi + 0.5 * math.pi
    sign = -1.0 if m % 2 else 1.0

    def g(theta):
        return sign * (theta * math.sin(theta) - c * math.cos(theta))

    if m == 0 and c < 1e-8:
        # theta^2 (1 + theta^2/3 + ...) = c
        t = math.sqrt(c)
        return t * (1.0 - c / 6.0)
    glo, ghi = g(lo), g(hi)
    if not (glo < 0 < ghi):
        raise BracketFailure(f"odd-mode bracket {m} lost its sign change (c={c})")
    return brentq(g, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200)


def _odd_eigenvalue(d: float, q: float, m: int) -> float:
    c = INF if q == 0 else d / q
    theta = _odd_theta(c, m)
    return (2.0 * theta / d) ** 2


def eigenvalues(cell: CellSpec, J: int) -> CellEigenvalues:
    """First ``J`` eigenvalues of the cell operator, with multiplicity."""
    if J < 1:
        raise ValueError("J must be >= 1")
    d, q = cell.d, cell.q
    pairs = []
    for n in range(J):
        pairs.append(((2.0 * n * math.pi / d) ** 2, 0, Branch.EVEN))
        pairs.append((_odd_eigenvalue(d, q, n), 1, Branch.ODD))
    pairs.sort(key=lambda t: (t[0], t[1]))
    pairs = pairs[:J]
    return CellEigenvalues(tuple(p[0] for p in pairs), tuple(p[2] for p in pairs))


def second_eigenvalue(d: float, q: float) -> float:
    """``lambda_2`` of the cell; this is always the lowest odd mode."""
    return _odd_eigenvalue(d, q, 0)


def tune_q(d: float, s: float, rtol: float = 1e-12) -> float:
    """Strength ``q > 0`` whose cell has second eigenvalue ``s``.

    Requires ``0 < s < (pi/d)**2``.  The closed-form candidate
    ``q = 2 / (k tan(k d / 2))`` is checked against :func:`second_eigenvalue`
    and refined by bisection in ``log q`` if it misses ``rtol``.
    """
    upper = (math.pi / d) ** 2
    if not (0 < s < upper):
        raise TargetOutOfRange(f"s = {s} is outside (0, (pi/d)^2) = (0, {upper})")
    k = math.sqrt(s)
    h = 0.5 * k * d
    q = 2.0 / (k * math.tan(h)) if h > _SERIES_CUTOFF else 4.0 / (s * d) * (1.0 - h * h / 3.0)
    if abs(second_eigenvalue(d, q) - s) <= rtol * s:
        return q

    # lambda_2 decreases in q, so bisect on log q
    lo, hi = math.log(q) - 1.0, math.log(q) + 1.0
    while second_eigenvalue(d, math.exp(lo)) < s:
        lo -= 2.0
    while second_eigenvalue(d, math.exp(hi)) > s:
        hi += 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lam = second_eigenvalue(d, math.exp(mid))
        if abs(lam - s) <= rtol * s:
            return math.exp(mid)
        if lam > s:
            lo = mid
        else:
            hi = mid
    q = math.exp(0.5 * (lo + hi))
    if abs(second_eigenvalue(d, q) - s) > max(rtol, 1e-10) * s:
        raise BracketFailure(f"could not tune q for d={d}, s={s}")
    return q


def resolvent_diff_bound(d: float, q: float, q_hat: float) -> float:
    """Upper bound ``max(d, 8/d) |1/q_hat - 1/q|`` on the difference of
    ``(A_q + I)^{-1}`` and ``(A_q_hat + I)^{-1}`` in operator norm."""
    return max(d, 8.0 / d) * abs(1.0 / q_hat - 1.0 / q)
