"""Cyclic Jacobi eigenvalue iteration for dense symmetric matrices."""

from __future__ import annotations

import numpy as np


def jacobi_eigh(A: np.ndarray, tol: float = 1e-14, max_sweeps: int = 60,
                vectors: bool = False):
    """Eigenvalues (ascending) of a real symmetric matrix.

    Row-cyclic sweeps of plane rotations; each rotation zeroes ``A[p, q]``.
    Off-diagonal pairs already below ``tol * ||A||_F / n`` are skipped.
    Converges quadratically once the off-diagonal mass is small.
    """
    a = np.array(A, dtype=float, copy=True)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("square matrix required")
    if not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, np.abs(a).max(initial=0.0))):
        raise ValueError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    v = np.eye(n) if vectors else None
    scale = np.linalg.norm(a)
    if n < 2 or scale == 0:
        w = np.diag(a).copy()
        order = np.argsort(w)
        return (w[order], v[:, order]) if vectors else w[order]

    skip = tol * scale / n
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.0))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
                if vectors:
                    vp, vq = v[:, p].copy(), v[:, q].copy()
                    v[:, p] = c * vp - s * vq
                    v[:, q] = s * vp + c * vq
    w = np.diag(a).copy()
    order = np.argsort(w)
    return (w[order], v[:, order]) if vectors else w[order]
