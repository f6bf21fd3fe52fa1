"""Desk-scale check that a truncated operator's eigenvalues cluster on S.

A finite truncation has no essential spectrum, so the check is a
surrogate: for each sample ``s_k`` of the target set (from the same
deterministic sampling used by :func:`~.operator_assembly.design`) find the
nearest eigenvalue of the truncated coupled operator, skip the first ``k0``
cells, and compare the worst distance with a threshold.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .operator_assembly import Schedule
from .target_set import TargetSet, accumulation_distance, sample_sequence
from .truncated_spectrum import TruncatedOperator, eigenvalues_below


@dataclass
class VerifyReport:
    samples: list[float]
    nearest: list[float | None]
    distances: list[float]
    cover: float
    spurious: float
    N: int
    cutoff: float
    threshold: float
    skip_head: int
    decoupled: bool
    max_distance: float
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def verify(schedule: Schedule, target: TargetSet, N: int, cutoff: float,
           threshold: float, skip_head: int = 0, decouple: bool = False) -> VerifyReport:
    """Distances from each ``s_k`` (``k = 1..N``) to the truncated spectrum.

    ``skip_head`` is the 1-based index ``k0`` of the first cell that
    counts toward pass/fail; the construction only controls the tail.
    """
    op = TruncatedOperator(schedule, N, decouple=decouple)
    spec = eigenvalues_below(op, cutoff)
    ev = np.asarray(spec.eigenvalues)
    samples = list(sample_sequence(target, N).values)
    nearest, dist = [], []
    for s in samples:
        if len(ev) == 0:
            nearest.append(None)
            dist.append(float("inf"))
            continue
        j = int(np.argmin(np.abs(ev - s)))
        nearest.append(float(ev[j]))
        dist.append(float(abs(ev[j] - s)))
    if len(ev):
        cover, spurious = accumulation_distance(target, ev, cutoff)
    else:
        cover, spurious = float("inf"), 0.0
    start = max(skip_head, 1) - 1
    tail = dist[start:]
    max_d = max(tail) if tail else 0.0
    return VerifyReport(samples, nearest, dist, cover, spurious, N, cutoff, threshold,
                        skip_head, decouple, max_d, bool(max_d <= threshold))
