"""From a target set to a full operator schedule.

The pipeline is ``sample_sequence -> choose_lengths -> tune_q -> choose_couplings``:
every cell ``k`` gets a length ``d_k`` small enough that its second
eigenvalue can be tuned to ``s_k``, the lengths are summable so the whole
chain lives on a bounded interval, and the junction strengths grow so that
``rho_k = max(1/(p_k d_k), 1/(p_k d_{k+1}))`` tends to zero.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from . import cell_spectrum
from .cell_spectrum import INF, CellSpec
from .errors import MalformedSet, SpectralDesignError, TargetOutOfRange
from .target_set import SamplingSequence, TargetSet, sample_sequence

GEOMETRIC_D = 1.0
GEOMETRIC_R = 0.5
# p_k multiplier used by design(); with 1 the tuned eigenvalues of a
# 32-cell truncation move by up to ~0.2, with 30 by less than 0.02
DESIGN_COUPLING_SCALE = 30.0


def n_threads() -> int:
    """Worker cap from ``SPECFORGE_THREADS`` (0 or unset means auto)."""
    raw = os.environ.get("SPECFORGE_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else min(8, os.cpu_count() or 1)


def ordered_map(fn, items):
    items = list(items)
    workers = n_threads()
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


@dataclass(frozen=True)
class PlacedCell:
    x_left: float
    y: float
    x_right: float
    d: float
    q: float

    @property
    def spec(self) -> CellSpec:
        return CellSpec(self.d, self.q)


@dataclass(frozen=True)
class Coupling:
    x: float
    p: float


@dataclass
class Schedule:
    a: float
    b: float
    cells: list[PlacedCell]
    couplings: list[Coupling]
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_cells(cls, lengths: Sequence[float], qs: Sequence[float],
                   ps: Sequence[float], a: float = 0.0, meta: dict | None = None) -> "Schedule":
        if len(lengths) != len(qs):
            raise ValueError("one strength per cell")
        if len(ps) != max(len(lengths) - 1, 0):
            raise ValueError("one coupling per interior junction")
        cells = []
        x = a
        for d, q in zip(lengths, qs):
            cells.append(PlacedCell(x, x + 0.5 * d, x + d, d, q))
            x = x + d
        couplings = [Coupling(c.x_right, p) for c, p in zip(cells, ps)]
        return cls(a, x, cells, couplings, dict(meta or {}))

    @property
    def lengths(self) -> list[float]:
        return [c.d for c in self.cells]

    @property
    def strengths(self) -> list[float]:
        return [c.q for c in self.cells]

    @property
    def coupling_strengths(self) -> list[float]:
        return [c.p for c in self.couplings]

    @property
    def rho(self) -> list[float]:
        d = self.lengths
        return [max(1.0 / (p * d[k]), 1.0 / (p * d[k + 1]))
                for k, p in enumerate(self.coupling_strengths)]

    def kappa(self, n: int) -> float:
        """``sup_{k >= n} rho_k`` over the stored (finite) schedule, 1-based."""
        tail = self.rho[n - 1:]
        return max(tail) if tail else 0.0

    def decoupled(self) -> "Schedule":
        return Schedule.from_cells(self.lengths, self.strengths,
                                   [INF] * len(self.couplings), self.a, self.meta)

    def truncate(self, N: int) -> "Schedule":
        if not 1 <= N <= len(self.cells):
            raise ValueError(f"cannot truncate {len(self.cells)} cells to {N}")
        return Schedule(self.a, self.cells[N - 1].x_right, self.cells[:N],
                        self.couplings[:N - 1], dict(self.meta))

    def check_positions(self, tol: float = 1e-14) -> None:
        x = self.a
        for c in self.cells:
            scale = max(1.0, abs(x))
            if abs(c.x_left - x) > tol * scale or abs(c.x_right - (x + c.d)) > tol * scale \
                    or abs(c.y - 0.5 * (c.x_left + c.x_right)) > tol * scale:
                raise SpectralDesignError(f"inconsistent cell position at x={x}")
            x = c.x_right
        if abs(self.b - x) > tol * max(1.0, abs(x)):
            raise SpectralDesignError("b does not equal the sum of the cell lengths")

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "cells": [{"x_left": c.x_left, "y": c.y, "x_right": c.x_right,
                       "d": c.d, "q": _enc(c.q)} for c in self.cells],
            "couplings": [{"x": c.x, "p": _enc(c.p)} for c in self.couplings],
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "Schedule":
        try:
            cells = [PlacedCell(float(c["x_left"]), float(c["y"]), float(c["x_right"]),
                                float(c["d"]), _dec(c["q"])) for c in raw["cells"]]
            couplings = [Coupling(float(c["x"]), _dec(c["p"])) for c in raw["couplings"]]
            sched = cls(float(raw["a"]), float(raw["b"]), cells, couplings,
                        dict(raw.get("meta", {})))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedSet(f"bad schedule: {exc}") from exc
        if len(couplings) != max(len(cells) - 1, 0):
            raise MalformedSet("schedule needs one coupling per interior junction")
        return sched

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def loads(cls, text: str) -> "Schedule":
        return cls.from_dict(json.loads(text))


def _enc(x: float):
    # JSON has no infinity; the decoupled value travels as the string "inf"
    return "inf" if math.isinf(x) else x


def _dec(x) -> float:
    if isinstance(x, str):
        if x.strip().lower() in ("inf", "infinity"):
            return INF
        raise ValueError(f"bad strength {x!r}")
    return float(x)


def choose_lengths(samples: SamplingSequence | Sequence[float],
                   D: float = GEOMETRIC_D, r: float = GEOMETRIC_R) -> list[float]:
    """``d_k = min(pi / sqrt(2 s_k), D r^k)``.

    The first term keeps ``s_k d_k^2 < pi^2 / 2`` (a factor-2 margin below
    the tuning limit), the second makes ``sum d_k <= D r / (1 - r)``.
    """
    s = list(samples)
    if not s:
        raise ValueError("samples must be nonempty")
    return [min(math.pi / math.sqrt(2.0 * sk), D * r ** k) for k, sk in enumerate(s, start=1)]


def choose_couplings(lengths: Sequence[float], scale: float = 1.0) -> list[float]:
    """``p_k = scale sqrt(k) / min(d_k, d_{k+1})``, so ``rho_k = 1 / (scale sqrt(k))``."""
    if len(lengths) < 2:
        raise ValueError("need at least two cells")
    if not scale > 0:
        raise ValueError("scale must be positive")
    return [scale * math.sqrt(k) / min(lengths[k - 1], lengths[k])
            for k in range(1, len(lengths))]


@dataclass(frozen=True)
class CellRecord:
    k: int
    s: float
    d: float
    q: float
    achieved: float
    residual: float


@dataclass
class DesignReport:
    cells: list[CellRecord]
    total_length: float
    max_rho: float
    diverges: bool

    def to_dict(self) -> dict:
        return {
            "cells": [vars(c) for c in self.cells],
            "total_length": self.total_length,
            "max_rho": self.max_rho,
            "diverges": self.diverges,
        }


def design(S: TargetSet, K: int, tol_tune: float = 1e-12,
           coupling_scale: float = DESIGN_COUPLING_SCALE) -> tuple[Schedule, DesignReport]:
    """Build a ``K``-cell schedule whose cell second eigenvalues sample S.

    ``coupling_scale`` multiplies every ``p_k`` of :func:`choose_couplings`;
    any positive value keeps ``rho_k -> 0``.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    samples = sample_sequence(S, K)
    lengths = choose_lengths(samples)

    def tune(args):
        k, s, d = args
        try:
            q = cell_spectrum.tune_q(d, s, rtol=tol_tune)
        except TargetOutOfRange as exc:  # excluded by the length margin
            raise SpectralDesignError(f"internal: cell {k} untunable: {exc}") from exc
        achieved = cell_spectrum.second_eigenvalue(d, q)
        return CellRecord(k, s, d, q, achieved, abs(achieved - s) / s)

    records = ordered_map(tune, zip(range(1, K + 1), samples.values, lengths))
    ps = choose_couplings(lengths, coupling_scale) if K >= 2 else []
    meta = {"source_set": S.to_dict(), "K": K, "samples": list(samples.values),
            "diverges": samples.diverges, "coupling_scale": coupling_scale}
    sched = Schedule.from_cells(lengths, [r.q for r in records], ps, a=0.0, meta=meta)
    report = DesignReport(records, sched.b, max(sched.rho, default=0.0), samples.diverges)
    return sched, report
