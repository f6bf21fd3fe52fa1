"""Finite-difference oracle for chains of intervals with δ′ junctions.

A chain is a list of free segment lengths and, between consecutive
segments, jump coefficients ``beta`` in ``[0, inf]`` (``u+ - u- = beta u'``).
Each segment gets a uniform grid.  The quadratic form

    sum_segments int |u'|^2  +  sum_junctions (1/beta) |u+ - u-|^2

is discretized with linear elements and a lumped (diagonal) mass, which is
the three-point Laplacian with ghost-point Neumann ends.  Junction nodes are
duplicated and tied by the penalty ``1/beta``; ``beta = 0`` merges them,
``beta = inf`` leaves them uncoupled.  After symmetric scaling by the mass
the matrix is symmetric tridiagonal, so eigenvalue counts below a level come
from a Sturm sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

_PIVOT_FLOOR = 1e-300


@dataclass
class Tridiagonal:
    diag: np.ndarray
    off: np.ndarray

    @property
    def n(self) -> int:
        return len(self.diag)

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)


def segment_counts(lengths: Sequence[float], h: float, min_intervals: int = 2) -> list[int]:
    return [max(min_intervals, math.ceil(L / h - 1e-9)) for L in lengths]


def assemble(lengths: Sequence[float], betas: Sequence[float],
             counts: Sequence[int]) -> Tridiagonal:
    """Mass-scaled stiffness matrix of the chain on the given grid."""
    if len(betas) != len(lengths) - 1:
        raise ValueError("need one junction between each pair of segments")
    kd: list[float] = []
    ko: list[float] = []
    mass: list[float] = []
    for i, (L, n) in enumerate(zip(lengths, counts)):
        h = L / n
        w = 1.0 / h
        if i == 0 or betas[i - 1] == 0.0:
            if i == 0:
                kd.append(w)
                mass.append(0.5 * h)
            else:
                # continuity: the first node is the previous segment's last node
                kd[-1] += w
                mass[-1] += 0.5 * h
        else:
            beta = betas[i - 1]
            pen = 0.0 if math.isinf(beta) else 1.0 / beta
            kd[-1] += pen
            ko.append(-pen)
            kd.append(w + pen)
            mass.append(0.5 * h)
        for j in range(n):
            ko.append(-w)
            last = j == n - 1
            kd.append(w if last else 2.0 * w)
            mass.append(0.5 * h if last else h)
    m = np.sqrt(np.asarray(mass))
    diag = np.asarray(kd) / (m * m)
    off = np.asarray(ko) / (m[:-1] * m[1:])
    return Tridiagonal(diag, off)


def sturm_count(T: Tridiagonal, x: float) -> int:
    """Number of eigenvalues of ``T`` strictly below ``x``.

    LDL^T pivots of ``T - x I``; a zero pivot is nudged to a tiny negative
    value, which counts an eigenvalue sitting exactly at ``x`` as below it
    only when the perturbation decides so (measure-zero event).
    """
    a = T.diag.tolist()
    b2 = (T.off * T.off).tolist()
    count = 0
    piv = a[0] - x
    if piv == 0.0:
        piv = -_PIVOT_FLOOR
    if piv < 0:
        count += 1
    for i in range(1, len(a)):
        piv = a[i] - x - b2[i - 1] / piv
        if piv == 0.0:
            piv = -_PIVOT_FLOOR
        if piv < 0:
            count += 1
    return count


def eigenvalues_upto(T: Tridiagonal, upper: float) -> np.ndarray:
    """All eigenvalues in ``(-1, upper]`` by LAPACK bisection (stebz)."""
    if T.n == 1:
        v = T.diag[:1]
        return v[(v > -1) & (v <= upper)]
    return eigvalsh_tridiagonal(T.diag, T.off, select="v", select_range=(-1.0, upper),
                                lapack_driver="stebz")


@dataclass
class OracleResult:
    values: np.ndarray          # extrapolated eigenvalues below the cutoff
    coarse: np.ndarray
    fine: np.ndarray
    count: int                  # Sturm count of the fine matrix below the cutoff
    h: float


def chain_eigenvalues(lengths: Sequence[float], betas: Sequence[float], cutoff: float,
                      h: float | None = None) -> OracleResult:
    """Eigenvalues below ``cutoff`` on grids ``h`` and ``h/2`` plus the
    Richardson value ``(4 fine - coarse) / 3``.

    The default step satisfies ``h sqrt(cutoff) <= 0.01``.
    """
    if h is None:
        h = 0.01 / math.sqrt(max(cutoff, 1.0))
    counts = segment_counts(lengths, h)
    coarse_T = assemble(lengths, betas, counts)
    fine_T = assemble(lengths, betas, [2 * n for n in counts])
    count = sturm_count(fine_T, cutoff)
    # the discrete values lie below the exact ones, so a small margin on
    # the coarse grid keeps every pair
    fine = eigenvalues_upto(fine_T, cutoff)
    coarse = eigenvalues_upto(coarse_T, cutoff * 1.05 + 1.0)[: len(fine)]
    n = min(len(fine), len(coarse))
    extrap = (4.0 * fine[:n] - coarse[:n]) / 3.0
    return OracleResult(extrap, coarse[:n], fine[:n], count, h)


def cell_chain(d: float, q: float) -> tuple[list[float], list[float]]:
    """Single cell as a two-segment chain."""
    return [0.5 * d, 0.5 * d], [q]
