"""Rooms joined by thin passages: sequence constraints and test-function norms.

Room ``R_k`` is the square ``(x_k - d_k, x_k) x (-d_k/2, d_k/2)`` and
passage ``P_k`` the rectangle ``[x_k, x_k + dhat_k] x (-beta_k/2, beta_k/2)``.
The test function ``u_k`` equals ``1/d_k`` on ``R_k`` and falls linearly
to zero across the two adjacent passages.  If ``||u_k||^2`` stays near 1
while ``||grad u_k||^2 -> 0`` the ratio
``||u||^2 / (||u||^2 + ||grad u||^2)`` tends to 1 on functions supported
ever closer to the far end of the domain, so the embedding of ``H^1`` into
``L^2`` cannot be compact.

Sequences are held as :class:`fractions.Fraction` when the exponent is an
integer, so the (non-strict) invariants can be checked exactly; several hold
with equality at ``k = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np

from .errors import IndexOutOfRange, SpectralDesignError

Number = Fraction | float


@dataclass
class RPSequences:
    d: list[Number]
    dhat: list[Number]
    beta: list[Number]
    C1: Number
    C2: Number
    alpha: int | float

    @property
    def K(self) -> int:
        return len(self.d)

    @property
    def x(self) -> list[Number]:
        """Right ends of the rooms: ``x_k = sum_{j<=k} (d_j + dhat_j) - dhat_k``."""
        out, acc = [], 0
        for dk, hk in zip(self.d, self.dhat):
            acc = acc + dk + hk
            out.append(acc - hk)
        return out

    def invariant_report(self) -> dict[str, bool]:
        K, d, h, b = self.K, self.d, self.dhat, self.beta
        a = self.alpha
        top = max(h)
        x = self.x
        return {
            "ddd": all(h[k] <= self.C1 * min(d[k], d[k + 1]) for k in range(K - 1)),
            "beta": all(b[k] <= self.C2 * _power(h[k], a) for k in range(K)),
            "alpha": a >= 3,
            "C2": self.C2 <= _power(top, 1 - a) / self.C1,
            "thickness": all(b[k] <= min(d[k], d[k + 1]) for k in range(K - 1)),
            "positions": all(x[k + 1] - x[k] == h[k] + d[k + 1] for k in range(K - 1)),
            "positive": all(v > 0 for v in list(d) + list(h) + list(b)),
        }

    def check(self) -> "RPSequences":
        bad = [name for name, ok in self.invariant_report().items() if not ok]
        if bad:
            raise SpectralDesignError(f"rooms-and-passages invariants violated: {bad}")
        return self


def _power(v: Number, a) -> Number:
    if isinstance(v, Rational) and float(a).is_integer():
        return Fraction(v) ** int(a)
    return float(v) ** float(a)


def default_sequences(K: int, alpha: int | float = 4, C1: Number = Fraction(9, 4)) -> RPSequences:
    """``d_k = (2k-1)^-2``, ``dhat_k = (2k)^-2``, ``beta_k = C2 dhat_k^alpha``.

    ``C2`` is the largest value allowed, ``(1/C1) (max dhat)^(1 - alpha)``.
    With ``alpha = 3`` the gradient norms tend to ``2 C2`` instead of 0, so
    the default exponent is 4.
    """
    if K < 2:
        raise IndexOutOfRange("need K >= 2")
    d = [Fraction(1, (2 * k - 1) ** 2) for k in range(1, K + 1)]
    dhat = [Fraction(1, (2 * k) ** 2) for k in range(1, K + 1)]
    C2 = _power(max(dhat), 1 - alpha) / C1
    beta = [C2 * _power(h, alpha) for h in dhat]
    return RPSequences(d, dhat, beta, C1, C2, alpha).check()


@dataclass(frozen=True)
class TestFunctionNorms:
    __test__ = False

    k: int
    l2_sq: float
    grad_sq: float

    @property
    def ratio(self) -> float:
        return self.l2_sq / (self.l2_sq + self.grad_sq)


def test_function_norms(seq: RPSequences, k: int, exact: bool = False):
    """Closed-form ``||u_k||^2`` and ``||grad u_k||^2`` for ``2 <= k <= K - 1`` (1-based)."""
    if not 2 <= k <= seq.K - 1:
        raise IndexOutOfRange(f"k = {k} outside 2..{seq.K - 1}")
    i = k - 1
    d, h, b = seq.d[i], seq.dhat, seq.beta
    l2 = 1 + (b[i - 1] * h[i - 1] + b[i] * h[i]) / (3 * d * d)
    grad = (b[i - 1] / h[i - 1] + b[i] / h[i]) / (d * d)
    if exact:
        return l2, grad
    return TestFunctionNorms(k, float(l2), float(grad))


test_function_norms.__test__ = False


def nominal_gradient_bound(seq: RPSequences, k: int) -> float:
    """``2 C1 C2 d_k^(alpha-3)``.

    Holds from ``k = 3`` on for the default sequences but not at ``k = 2``;
    :func:`gradient_bound` is the version that holds for every ``k``.
    """
    return float(2 * seq.C1 * seq.C2 * _power(seq.d[k - 1], seq.alpha - 3))


def gradient_bound(seq: RPSequences, k: int) -> float:
    """``2 C2 C1^(alpha-1) d_k^(alpha-3)``, which follows from ``dhat <= C1 d``."""
    return float(2 * seq.C2 * _power(seq.C1, seq.alpha - 1) * _power(seq.d[k - 1], seq.alpha - 3))


def gamma_lower_bound_scan(seq: RPSequences) -> list[float]:
    """Ratios ``l2 / (l2 + grad)`` for ``k = 2..K-1``."""
    if seq.K < 4:
        raise IndexOutOfRange("need K >= 4")
    return [test_function_norms(seq, k).ratio for k in range(2, seq.K)]


def norms_table(seq: RPSequences, k_max: int | None = None) -> list[TestFunctionNorms]:
    k_max = seq.K - 1 if k_max is None else min(k_max, seq.K - 1)
    return [test_function_norms(seq, k) for k in range(2, k_max + 1)]


# --- quadrature oracle -------------------------------------------------------

def _rectangle_midpoint(x0, x1, y0, y1, nx, ny, f):
    """Midpoint rule of ``f(x, y)`` over a rectangle on an ``nx x ny`` grid."""
    hx, hy = (x1 - x0) / nx, (y1 - y0) / ny
    xs = x0 + hx * (np.arange(nx) + 0.5)
    ys = y0 + hy * (np.arange(ny) + 0.5)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    return float(np.sum(f(X, Y)) * hx * hy)


def quadrature_norms(seq: RPSequences, k: int, rtol: float = 1e-9, ny: int = 4,
                     n0: int = 8, n_max: int = 1 << 16) -> tuple[float, float]:
    """``||u_k||^2`` and ``||grad u_k||^2`` by the midpoint rule on the three rectangles.

    ``u_k`` is evaluated from its piecewise definition.  The grid along the
    passages is doubled, with Richardson extrapolation of successive
    midpoint values, until two extrapolants agree to ``rtol``.
    """
    if not 2 <= k <= seq.K - 1:
        raise IndexOutOfRange(f"k = {k} outside 2..{seq.K - 1}")
    i = k - 1
    x = [float(v) for v in seq.x]
    d = float(seq.d[i])
    h_prev, h = float(seq.dhat[i - 1]), float(seq.dhat[i])
    b_prev, b = float(seq.beta[i - 1]), float(seq.beta[i])
    xk, xprev = x[i], x[i - 1]

    def u(X, Y):
        out = np.zeros_like(X)
        room = (X > xk - d) & (X < xk)
        out[room] = 1.0 / d
        right = (X >= xk) & (X <= xk + h)
        out[right] = (xk + h - X[right]) / (d * h)
        left = (X >= xprev) & (X <= xprev + h_prev)
        out[left] = (xprev - X[left]) / (d * (xprev - xk + d))
        return out

    def u_x(X, Y):
        out = np.zeros_like(X)
        out[(X >= xk) & (X <= xk + h)] = -1.0 / (d * h)
        out[(X >= xprev) & (X <= xprev + h_prev)] = 1.0 / (d * h_prev)
        return out

    rects = [(xk - d, xk, -d / 2, d / 2), (xk, xk + h, -b / 2, b / 2),
             (xprev, xprev + h_prev, -b_prev / 2, b_prev / 2)]

    def sweep(n):
        l2 = sum(_rectangle_midpoint(*r, n, ny, lambda X, Y: u(X, Y) ** 2) for r in rects)
        grad = sum(_rectangle_midpoint(*r, n, ny, lambda X, Y: u_x(X, Y) ** 2) for r in rects)
        return l2, grad

    n = n0
    prev_raw = sweep(n)
    prev_ext = None
    while n < n_max:
        n *= 2
        raw = sweep(n)
        ext = tuple((4 * a - c) / 3 for a, c in zip(raw, prev_raw))
        if prev_ext is not None and all(abs(e - p) <= rtol * max(1.0, abs(e))
                                        for e, p in zip(ext, prev_ext)):
            return ext
        prev_raw, prev_ext = raw, ext
    raise SpectralDesignError("quadrature did not reach the requested self-consistency")


def ratios_approach_one(ratios: Sequence[float], start: int = 20, step: int = 10,
                        slack: float = 1e-12) -> bool:
    """``ratio_{k+step} >= ratio_k - slack`` for every ``k >= start`` (1-based ``k``)."""
    by_k = {k: r for k, r in zip(range(2, len(ratios) + 2), ratios)}
    return all(by_k[k + step] >= by_k[k] - slack for k in by_k if k >= start and k + step in by_k)
