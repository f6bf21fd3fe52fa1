"""Prescribed closed sets and the positive sequences that realize them.

A target set is ``{0}`` plus finitely many isolated points and closed
intervals.  :func:`sample_sequence` produces positive numbers ``s_1, s_2, ...``
whose set of accumulation points is the target set (with 0 removed when it
is isolated).  These are the second eigenvalues the cells get tuned to.
"""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .errors import EmptyInput, MalformedSet, ZeroNotIncluded

_FIELDS = {"includes_zero", "points", "intervals", "lambda_max"}


@dataclass(frozen=True)
class TargetSet:
    """Closed set ``{0} ∪ points ∪ intervals`` inside ``[0, lambda_max]``.

    Use :func:`validate` (or :meth:`from_dict`) to build one from loose
    input; the constructor assumes canonical data and only re-checks the
    invariants.
    """

    points: tuple[float, ...] = ()
    intervals: tuple[tuple[float, float], ...] = ()
    lambda_max: float = 1.0
    includes_zero: bool = True

    def __post_init__(self):
        if not self.includes_zero:
            raise ZeroNotIncluded("the target set must contain 0")
        _check_canonical(self.points, self.intervals, self.lambda_max)

    @property
    def zero_isolated(self) -> bool:
        # finitely many points cannot accumulate, so only an interval
        # starting at 0 makes 0 a limit point of S \ {0}
        return not any(lo == 0.0 for lo, _ in self.intervals)

    @property
    def is_trivial(self) -> bool:
        """True for ``S = {0}``."""
        return not self.points and not self.intervals

    def distance(self, x: float) -> float:
        """Distance from ``x`` to the set."""
        best = abs(x)
        for p in self.points:
            best = min(best, abs(x - p))
        for lo, hi in self.intervals:
            if lo <= x <= hi:
                return 0.0
            best = min(best, abs(x - lo), abs(x - hi))
        return best

    def to_dict(self) -> dict:
        return {
            "includes_zero": True,
            "points": list(self.points),
            "intervals": [list(iv) for iv in self.intervals],
            "lambda_max": self.lambda_max,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "TargetSet":
        return validate(raw)


def _check_canonical(points, intervals, lambda_max):
    if not (isinstance(lambda_max, (int, float)) and math.isfinite(lambda_max)
            and lambda_max > 0):
        raise MalformedSet(f"lambda_max must be a positive finite number, got {lambda_max!r}")
    prev_hi = -math.inf
    for lo, hi in intervals:
        if not (0.0 <= lo < hi <= lambda_max) or lo <= prev_hi:
            raise MalformedSet(f"interval [{lo}, {hi}] is not canonical")
        prev_hi = hi
    for a, b in zip(points, points[1:]):
        if not a < b:
            raise MalformedSet("points must be strictly increasing")
    for p in points:
        if not 0.0 < p <= lambda_max:
            raise MalformedSet(f"point {p} outside (0, lambda_max]")
        if any(lo <= p <= hi for lo, hi in intervals):
            raise MalformedSet(f"point {p} lies inside an interval")


def _as_number(x, what):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise MalformedSet(f"{what} must be a number, got {x!r}")
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        raise MalformedSet(f"{what} must be finite, got {x!r}")
    if x < 0:
        raise MalformedSet(f"{what} must be nonnegative, got {x!r}")
    return x


def validate(raw: dict) -> TargetSet:
    """Parse and canonicalize a JSON-style target-set description.

    Overlapping or touching intervals are merged, degenerate intervals
    become points, duplicate points and points covered by an interval are
    dropped.  An explicit point 0 is redundant with ``includes_zero`` and is
    dropped as well.
    """
    if not isinstance(raw, dict):
        raise MalformedSet("target set description must be a JSON object")
    unknown = set(raw) - _FIELDS
    if unknown:
        raise MalformedSet(f"unknown fields: {sorted(unknown)}")
    missing = _FIELDS - set(raw)
    if missing:
        raise MalformedSet(f"missing fields: {sorted(missing)}")
    if not isinstance(raw["includes_zero"], bool):
        raise MalformedSet("includes_zero must be a boolean")

    lambda_max = raw["lambda_max"]
    if isinstance(lambda_max, bool) or not isinstance(lambda_max, (int, float)):
        raise MalformedSet("lambda_max must be a number")
    lambda_max = float(lambda_max)
    if not (math.isfinite(lambda_max) and lambda_max > 0):
        raise MalformedSet("lambda_max must be positive and finite")

    if not isinstance(raw["points"], list) or not isinstance(raw["intervals"], list):
        raise MalformedSet("points and intervals must be lists")
    pts = [_as_number(p, "point") for p in raw["points"]]
    ivs = []
    for iv in raw["intervals"]:
        if not isinstance(iv, (list, tuple)) or len(iv) != 2:
            raise MalformedSet(f"interval must be a pair, got {iv!r}")
        lo, hi = _as_number(iv[0], "interval bound"), _as_number(iv[1], "interval bound")
        if lo > hi:
            raise MalformedSet(f"interval [{lo}, {hi}] has lo > hi")
        ivs.append((lo, hi))
    for x in pts + [v for iv in ivs for v in iv]:
        if x > lambda_max:
            raise MalformedSet(f"{x} exceeds lambda_max = {lambda_max}")

    if not raw["includes_zero"]:
        raise ZeroNotIncluded("the target set must contain 0")

    merged: list[list[float]] = []
    for lo, hi in sorted(ivs):
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    intervals = []
    for lo, hi in merged:
        if hi > lo:
            intervals.append((lo, hi))
        else:
            pts.append(lo)
    points = sorted({p for p in pts
                     if p > 0 and not any(lo <= p <= hi for lo, hi in intervals)})
    return TargetSet(points=tuple(points), intervals=tuple(intervals),
                     lambda_max=lambda_max)


@dataclass(frozen=True)
class SamplingSequence:
    values: tuple[float, ...]
    diverges: bool = False
    eps_cover: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)


def _dyadic_sweep(lo: float, hi: float, skip_zero: bool) -> Iterator[float]:
    """Endpoints, then midpoints of successively halved subintervals."""
    if not (skip_zero and lo == 0.0):
        yield lo
    yield hi
    width = hi - lo
    for level in itertools.count(1):
        n = 2 ** level
        for i in range(1, n, 2):
            yield lo + width * i / n


def _constant(x: float) -> Iterator[float]:
    while True:
        yield x


def _toward_zero(top: float) -> Iterator[float]:
    for j in itertools.count(1):
        yield top * 2.0 ** (-j)


def _golden_offsets() -> Iterator[float]:
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    for k in itertools.count(1):
        yield 2.0 * ((k * phi) % 1.0) - 1.0


def sample_sequence(S: TargetSet, K: int, eps_cover: float = 0.0) -> SamplingSequence:
    """First ``K`` terms of a positive sequence accumulating exactly on S.

    Streams are interleaved round-robin: a constant stream per isolated
    point, a dyadic sweep per interval, and a geometric stream tending to 0
    when 0 is not isolated.  For ``S = {0}`` the sequence is ``1, 2, 3, ...``
    so that it has no finite accumulation point.

    ``eps_cover > 0`` shifts each sample by a deterministic amount of at
    most ``eps_cover`` (kept positive), for exercising perturbed inputs.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if S.is_trivial:
        return SamplingSequence(tuple(float(k) for k in range(1, K + 1)), diverges=True)

    streams: list[Iterator[float]] = [_constant(p) for p in S.points]
    streams += [_dyadic_sweep(lo, hi, skip_zero=True) for lo, hi in S.intervals]
    if not S.zero_isolated:
        top = min(hi for lo, hi in S.intervals if lo == 0.0)
        streams.append(_toward_zero(top))

    values = []
    for stream in itertools.cycle(streams):
        values.append(next(stream))
        if len(values) == K:
            break
    if eps_cover > 0:
        out = []
        for v, off in zip(values, _golden_offsets()):
            w = v + eps_cover * off
            out.append(w if w > 0 else v)
        values = out
    return SamplingSequence(tuple(values), diverges=False, eps_cover=eps_cover)


def _nearest_gap(sorted_vals: Sequence[float], x: float) -> float:
    i = bisect.bisect_left(sorted_vals, x)
    best = math.inf
    if i < len(sorted_vals):
        best = sorted_vals[i] - x
    if i > 0:
        best = min(best, x - sorted_vals[i - 1])
    return best


def accumulation_distance(S: TargetSet, values: Sequence[float],
                          cutoff: float) -> tuple[float, float]:
    """Two one-sided distances between ``S ∩ [0, cutoff]`` and ``values``.

    Returns ``(cover, spurious)``: ``cover`` is the largest distance from a
    point of ``S ∩ [0, cutoff]`` to the nearest value, ``spurious`` the
    largest distance from a value ``<= cutoff`` to S.  The supremum over an
    interval is evaluated exactly (it is attained at an interval endpoint or
    at a midpoint between consecutive values).
    """
    vals = sorted(float(v) for v in values)
    if not vals:
        raise EmptyInput("no values given")
    if any(not math.isfinite(v) for v in vals):
        raise ValueError("values must be finite")

    candidates = [0.0] + [p for p in S.points if p <= cutoff]
    for lo, hi in S.intervals:
        if lo > cutoff:
            continue
        hi = min(hi, cutoff)
        candidates += [lo, hi]
        for a, b in zip(vals, vals[1:]):
            mid = 0.5 * (a + b)
            if lo < mid < hi:
                candidates.append(mid)
    cover = max(_nearest_gap(vals, x) for x in candidates)

    below = [v for v in vals if v <= cutoff]
    spurious = max((S.distance(v) for v in below), default=0.0)
    return cover, spurious
