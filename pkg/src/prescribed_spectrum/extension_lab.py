"""Matrix model of a self-adjoint extension glued from A0 and a parameter Xi.

Given a symmetric ``A0`` (stand-in for an operator with compact
resolvent), a symmetric ``Xi`` acting on the first ``m`` coordinates, and a
real ``mu`` away from both spectra, the resolvent at ``mu`` is declared to be

    R_mu = (A0 - mu)^{-1} + [[(Xi - mu)^{-1}, 0], [0, 0]]

and ``A = R_mu^{-1} + mu``.  In infinite dimensions the first summand is
compact, so ``A`` and ``Xi`` share their essential spectrum.  A matrix has
no essential spectrum; :func:`clustering_experiment` shows instead that the
eigenvalues of ``A`` crowd around the accumulation points of ``Xi`` more
tightly as the model grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidModel, SingularRmu
from .jacobi import jacobi_eigh

SEPARATION = 1e-8
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class ExtensionModel:
    A0: np.ndarray
    Xi: np.ndarray
    mu: float

    def __post_init__(self):
        self.A0 = np.atleast_2d(np.asarray(self.A0, dtype=float))
        self.Xi = np.asarray(self.Xi, dtype=float).reshape(
            (0, 0) if np.size(self.Xi) == 0 else np.atleast_2d(self.Xi).shape)
        n, m = self.n, self.m
        if self.A0.shape != (n, n) or self.Xi.shape != (m, m) or m > n:
            raise InvalidModel("A0 must be n x n and Xi m x m with m <= n")
        for name, M in (("A0", self.A0), ("Xi", self.Xi)):
            if M.size and np.max(np.abs(M - M.T)) > 1e-13 * max(1.0, np.max(np.abs(M))):
                raise InvalidModel(f"{name} is not symmetric")
        for name, M in (("A0", self.A0), ("Xi", self.Xi)):
            if M.size and np.min(np.abs(np.linalg.eigvalsh(M) - self.mu)) <= SEPARATION:
                raise InvalidModel(f"mu = {self.mu} is within {SEPARATION} of spec({name})")

    @property
    def n(self) -> int:
        return self.A0.shape[0]

    @property
    def m(self) -> int:
        return self.Xi.shape[0]

    def embed_xi_resolvent(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        if self.m:
            out[: self.m, : self.m] = np.linalg.inv(self.Xi - self.mu * np.eye(self.m))
        return out

    def projection(self) -> np.ndarray:
        P = np.zeros((self.n, self.n))
        P[: self.m, : self.m] = np.eye(self.m)
        return P


@dataclass
class ExtensionResult:
    A: np.ndarray
    R_mu: np.ndarray
    diagnostics: dict = field(default_factory=dict)


def build_extension(model: ExtensionModel) -> ExtensionResult:
    n, mu = model.n, model.mu
    I = np.eye(n)
    R = np.linalg.inv(model.A0 - mu * I) + model.embed_xi_resolvent()
    R = 0.5 * (R + R.T)
    if model.m == 0:
        A = model.A0.copy()
    else:
        sv = np.linalg.svd(R, compute_uv=False)
        if sv[0] == 0.0 or sv[-1] < 1e-12 * sv[0]:
            raise SingularRmu(f"R_mu is numerically singular at mu = {mu} "
                              f"(sigma_min = {sv[-1]:.2e}, sigma_max = {sv[0]:.2e})")
        A = np.linalg.inv(R) + mu * I
    sym = float(np.linalg.norm(A - A.T, 2))
    A = 0.5 * (A + A.T)
    result = ExtensionResult(A, R, {"symmetry_defect": sym})
    result.diagnostics["weyl_defect"] = weyl_identity_check(model, result)
    return result


def weyl_identity_check(model: ExtensionModel, result: ExtensionResult) -> float:
    """Spectral norm of ``(A - mu)^{-1} - [(Xi - mu)^{-1} 0; 0 0] - (A0 - mu)^{-1}``.

    The inverse of ``A - mu`` is recomputed from ``A``, so the defect
    measures the round trip, not a stored intermediate.
    """
    I = np.eye(model.n)
    lhs = np.linalg.inv(result.A - model.mu * I)
    D = lhs - model.embed_xi_resolvent() - np.linalg.inv(model.A0 - model.mu * I)
    return float(np.linalg.norm(D, 2))


def boundary_condition_check(model: ExtensionModel, result: ExtensionResult, trials: int = 100,
                             rng: np.random.Generator | None = None,
                             vectors: np.ndarray | None = None) -> dict:
    """Abstract boundary condition on ``f = R_mu h = f0 + f_mu``.

    With ``f0 = (A0 - mu)^{-1} h`` and ``f_mu = (Xi - mu)^{-1} P h`` both
    ``(Xi - mu) f_mu`` and ``P (A0 - mu) f0`` equal ``P h``.  Returns the
    worst relative mismatch of that identity (``bc``) and of
    ``f0 + f_mu = (A - mu)^{-1} h`` (``range``).
    """
    rng = rng or np.random.default_rng(0)
    n, m, mu = model.n, model.m, model.mu
    H = vectors if vectors is not None else rng.standard_normal((trials, n))
    I = np.eye(n)
    worst_bc = worst_range = 0.0
    for h in np.atleast_2d(H):
        hn = np.linalg.norm(h)
        if hn == 0:
            continue
        f0 = np.linalg.solve(model.A0 - mu * I, h)
        f_mu = np.zeros(n)
        if m:
            f_mu[:m] = np.linalg.solve(model.Xi - mu * np.eye(m), h[:m])
        lhs = np.zeros(n)
        if m:
            lhs[:m] = (model.Xi - mu * np.eye(m)) @ f_mu[:m]
        rhs = model.projection() @ ((model.A0 - mu * I) @ f0)
        worst_bc = max(worst_bc, np.linalg.norm(lhs - rhs) / hn)
        f = np.linalg.solve(result.A - mu * I, h)
        worst_range = max(worst_range, np.linalg.norm(f - (f0 + f_mu)) / hn)
    return {"bc": float(worst_bc), "range": float(worst_range)}


def random_model(n: int, m: int, rng: np.random.Generator, mu: float = 0.0) -> ExtensionModel:
    """Random well-separated model: spectra of A0 and Xi in ``[1, n + 1]`` and ``[1, 5]``."""
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    a0 = np.sort(1.0 + n * rng.random(n))
    A0 = (Q * a0) @ Q.T
    A0 = 0.5 * (A0 + A0.T)
    if m:
        Qx, _ = np.linalg.qr(rng.standard_normal((m, m)))
        Xi = (Qx * (1.0 + 4.0 * rng.random(m))) @ Qx.T
        Xi = 0.5 * (Xi + Xi.T)
    else:
        Xi = np.zeros((0, 0))
    return ExtensionModel(A0, Xi, mu)


def cluster_spectrum(clusters: Sequence[float], m: int) -> np.ndarray:
    """``m`` values split evenly over the clusters, ``c + 1/j`` within each."""
    k = len(clusters)
    out = []
    for i, c in enumerate(clusters):
        mc = m // k + (1 if i < m % k else 0)
        out += [c + 1.0 / j for j in range(1, mc + 1)]
    return np.sort(np.asarray(out))


def cluster_radius(c: float, eigenvalues: np.ndarray, count: int) -> float:
    """Radius of the smallest interval around ``c`` holding ``count`` eigenvalues."""
    if count <= 0:
        return 0.0
    d = np.sort(np.abs(np.asarray(eigenvalues) - c))
    return float(d[count - 1]) if len(d) >= count else math.inf


@dataclass
class ClusteringTable:
    header: str
    rows: list[dict]

    def distances(self) -> list[float]:
        return [r["distance"] for r in self.rows]

    def to_dict(self) -> dict:
        return {"header": self.header, "rows": self.rows}


def _next_mu(mu: float, spectra: np.ndarray) -> float:
    above = spectra[spectra > mu]
    gap = (above.min() - mu) if above.size else 1.0
    return mu + GOLDEN * 0.5 * gap


def clustering_experiment(target_clusters: Sequence[float], sizes: Sequence[tuple[int, int]],
                          mu: float = 0.5, spread: float = 10.0, seed: int = 0,
                          fraction: float = 0.5, solver: str = "jacobi") -> ClusteringTable:
    """Track the concentration of ``spec(A)`` at the clusters of ``Xi``.

    For each ``(n, m)``: ``A0 = diag(j * spread)``, ``Xi`` has
    ``c + 1/j`` eigenvalues per cluster in a random (seeded) basis.  The
    reported distance for a cluster ``c`` holding ``m_c`` eigenvalues of
    ``Xi`` is the radius around ``c`` that contains ``ceil(fraction m_c)``
    eigenvalues of ``A``; the row value is the worst cluster.
    """
    clusters = [float(c) for c in target_clusters]
    rng = np.random.default_rng(seed)
    rows = []
    for n, m in sizes:
        if m > n:
            raise ValueError("need m <= n")
        A0 = np.diag(spread * np.arange(1, n + 1, dtype=float))
        xi_vals = cluster_spectrum(clusters, m) if m else np.zeros(0)
        if m:
            Q, _ = np.linalg.qr(rng.standard_normal((m, m)))
            Xi = (Q * xi_vals) @ Q.T
            Xi = 0.5 * (Xi + Xi.T)
        else:
            Xi = np.zeros((0, 0))
        spectra = np.concatenate([np.diag(A0), xi_vals])
        mu_used = mu
        for attempt in range(20):
            try:
                model = ExtensionModel(A0, Xi, mu_used)
                res = build_extension(model)
                break
            except (SingularRmu, InvalidModel):
                mu_used = _next_mu(mu_used, spectra)
        else:
            raise SingularRmu(f"no admissible mu found near {mu} for n = {n}, m = {m}")
        ev = jacobi_eigh(res.A) if solver == "jacobi" else np.linalg.eigvalsh(res.A)
        per = {}
        k = len(clusters)
        for i, c in enumerate(clusters):
            mc = m // k + (1 if i < m % k else 0)
            per[c] = cluster_radius(c, ev, math.ceil(fraction * mc))
        rows.append({"n": n, "m": m, "mu": mu_used, "distance": max(per.values()) if per else 0.0,
                     "per_cluster": {str(c): v for c, v in per.items()},
                     "weyl_defect": res.diagnostics["weyl_defect"]})
    header = ("finite matrices have no essential spectrum; distance = radius around each "
              f"cluster point holding {fraction:.0%} of its share of eigenvalues (worst cluster)")
    return ClusteringTable(header, rows)
