"""Eigenvalues of the first ``N`` cells of a schedule, Neumann at both ends.

The operator is ``-u''`` on a chain of free segments; at every cell
midpoint ``y_k`` and every junction ``x_k`` the derivative is continuous
and ``u+ - u- = beta u'`` with ``beta = q_k`` or ``beta = p_k``.  A junction
with ``beta = inf`` cuts the chain into independent pieces, each solved on
its own.

Eigenvalues are computed by shooting.  For ``lam > 0`` and ``k = sqrt(lam)``
the scaled state ``(k u, u')`` rotates by the angle ``k t`` across a free
segment and is sheared by a jump, and neither map lets the angle cross
``pi/2 (mod pi)``.  Tracking the continuous angle gives an exact counting
function: the ``n``-th positive eigenvalue of a piece is where its angle at
the right end reaches ``pi/2 + n pi``.  That isolates every root; a
bisection on the shooting function ``u'(right end)`` then pins it down.  The
finite-difference Sturm count is used as an independent check.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import fd_oracle
from .cell_spectrum import INF
from .errors import BracketFailure, CountMismatch
from .operator_assembly import Schedule, ordered_map

HALF_PI = 0.5 * math.pi
_RESCALE = 1e150


def transfer_state(lam: float, t: float) -> np.ndarray:
    """Propagator of ``(u, u')`` for ``-u'' = lam u`` across length ``t``."""
    if t < 0 or lam < 0:
        raise ValueError("need t >= 0 and lam >= 0")
    k = math.sqrt(lam)
    if k * t < 1e-8:
        # series keeps the lam -> 0 limit [[1, t], [0, 1]] exact
        kt2 = lam * t * t
        return np.array([[1.0 - 0.5 * kt2, t * (1.0 - kt2 / 6.0)],
                         [-lam * t * (1.0 - kt2 / 6.0), 1.0 - 0.5 * kt2]])
    c, s = math.cos(k * t), math.sin(k * t)
    return np.array([[c, s / k], [-k * s, c]])


def jump_matrix(beta: float) -> np.ndarray:
    """``u+ = u- + beta u'``, ``u'`` continuous."""
    if not (0 <= beta < INF):
        raise ValueError("jump coefficient must be finite and >= 0")
    return np.array([[1.0, beta], [0.0, 1.0]])


@dataclass(frozen=True)
class Piece:
    """Chain without infinite junctions: segments and the jumps between them."""

    lengths: tuple[float, ...]
    betas: tuple[float, ...]

    @property
    def length(self) -> float:
        return math.fsum(self.lengths)


def split_chain(lengths: Sequence[float], betas: Sequence[float]) -> list[Piece]:
    pieces = []
    cur_l, cur_b = [lengths[0]], []
    for L, beta in zip(lengths[1:], betas):
        if math.isinf(beta):
            pieces.append(Piece(tuple(cur_l), tuple(cur_b)))
            cur_l, cur_b = [L], []
        else:
            cur_l.append(L)
            cur_b.append(beta)
    pieces.append(Piece(tuple(cur_l), tuple(cur_b)))
    return pieces


@dataclass
class TruncatedOperator:
    """First ``N`` cells of ``schedule``; ``decouple`` forces every ``p_k = inf``."""

    schedule: Schedule
    N: int | None = None
    decouple: bool = False

    def __post_init__(self):
        if self.N is None:
            self.N = len(self.schedule.cells)
        if not 1 <= self.N <= len(self.schedule.cells):
            raise ValueError(f"N = {self.N} exceeds the {len(self.schedule.cells)} scheduled cells")

    def chain(self) -> tuple[list[float], list[float]]:
        lengths: list[float] = []
        betas: list[float] = []
        cells = self.schedule.cells[: self.N]
        for k, cell in enumerate(cells):
            if k > 0:
                betas.append(INF if self.decouple else self.schedule.couplings[k - 1].p)
            lengths += [0.5 * cell.d, 0.5 * cell.d]
            betas.append(cell.q)
        return lengths, betas

    def pieces(self) -> list[Piece]:
        return split_chain(*self.chain())


def _shoot_piece(piece: Piece, lam: float) -> tuple[float, float, float]:
    """Propagate ``(1, 0)``; returns ``(u, u', log_scale)`` at the right end."""
    u, up, log_scale = 1.0, 0.0, 0.0
    k = math.sqrt(lam)
    for i, t in enumerate(piece.lengths):
        if i > 0:
            u = u + piece.betas[i - 1] * up
        if k * t < 1e-8:
            kt2 = lam * t * t
            c, s_over_k, ks = 1.0 - 0.5 * kt2, t * (1.0 - kt2 / 6.0), lam * t * (1.0 - kt2 / 6.0)
        else:
            c, sn = math.cos(k * t), math.sin(k * t)
            s_over_k, ks = sn / k, k * sn
        u, up = c * u + s_over_k * up, -ks * u + c * up
        norm = abs(u) + abs(up)
        if norm > _RESCALE:
            u, up = u / norm, up / norm
            log_scale += math.log(norm)
    return u, up, log_scale


def shooting_function(op: TruncatedOperator, lam: float, with_scale: bool = False):
    """``u'`` at the right end of the Neumann-seeded solution.

    With infinite junctions the product over independent pieces is
    returned, so the zeros are the union of the pieces' eigenvalues.  The
    state is rescaled by positive factors whenever it grows past 1e150;
    ``with_scale=True`` also returns the accumulated log of those factors.
    """
    if lam < 0:
        raise ValueError("lam must be >= 0")
    value, log_scale = 1.0, 0.0
    for piece in op.pieces():
        _, up, ls = _shoot_piece(piece, lam)
        value *= up
        log_scale += ls
    return (value, log_scale) if with_scale else value


def _unwrap_shear(phi: float, shift: float) -> float:
    """Angle after ``tan(phi) -> tan(phi) + shift`` on the same branch."""
    n = math.floor(phi / math.pi + 0.5)
    rel = phi - n * math.pi                # in [-pi/2, pi/2)
    c = math.cos(rel)
    if c <= 0.0:
        return phi
    return n * math.pi + math.atan(math.sin(rel) / c + shift)


def prufer_phase(piece: Piece, lam: float) -> float:
    """Continuous angle of ``(k u, u')`` at the right end, starting at ``pi/2``."""
    if lam <= 0:
        return HALF_PI
    k = math.sqrt(lam)
    phi = HALF_PI
    for i, t in enumerate(piece.lengths):
        if i > 0 and piece.betas[i - 1] != 0.0:
            phi = _unwrap_shear(phi, k * piece.betas[i - 1])
        phi += k * t
    return phi


def _piece_count(piece: Piece, lam: float) -> int:
    """Eigenvalues of one piece strictly below ``lam`` (including 0)."""
    if lam <= 0:
        return 0
    m = (prufer_phase(piece, lam) - HALF_PI) / math.pi
    return 1 + max(0, math.ceil(m) - 1)


def counting_function(op: TruncatedOperator, lam: float) -> int:
    return sum(_piece_count(p, lam) for p in op.pieces())


@dataclass
class Spectrum:
    eigenvalues: list[float]
    brackets: list[tuple[float, float]]
    method: str
    count: int
    cutoff: float
    fd_count: int | None = None
    piece_index: list[int] = field(default_factory=list)

    def __len__(self):
        return len(self.eigenvalues)

    def to_csv(self, extra: dict[str, Sequence] | None = None) -> str:
        buf = io.StringIO()
        cols = ["index", "lambda", "bracket_lo", "bracket_hi", "method"]
        extra = extra or {}
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols + list(extra))
        for i, (lam, (lo, hi)) in enumerate(zip(self.eigenvalues, self.brackets)):
            row = [i + 1, _fmt(lam), _fmt(lo), _fmt(hi), self.method]
            row += [_fmt(v[i]) if isinstance(v[i], float) else v[i] for v in extra.values()]
            w.writerow(row)
        return buf.getvalue()


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def read_spectrum_csv(text: str) -> list[float]:
    """``lambda`` column of a spectrum CSV; ``#`` summary lines are skipped."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = csv.DictReader(lines)
    return [float(r["lambda"]) for r in rows]


def _piece_eigenvalue(piece: Piece, n: int, cutoff: float, rtol: float) -> tuple[float, float, float]:
    """``n``-th positive eigenvalue of ``piece`` (known to lie below ``cutoff``)."""
    target = HALF_PI + n * math.pi
    lo, hi = 0.0, cutoff
    phi_lo, phi_hi = HALF_PI, prufer_phase(piece, cutoff)
    # isolate with the phase until the bracket holds this crossing only;
    # phi_lo > target - pi also forces lo > 0, away from the zero eigenvalue
    while not (phi_lo > target - math.pi and phi_hi < target + math.pi
               and hi - lo < 1e-3 * max(1.0, hi)):
        if hi - lo <= 4 * np.finfo(float).eps * hi:
            break
        mid = 0.5 * (lo + hi)
        phi = prufer_phase(piece, mid)
        if phi < target:
            lo, phi_lo = mid, phi
        else:
            hi, phi_hi = mid, phi
    flo = _shoot_piece(piece, lo)[1]
    fhi = _shoot_piece(piece, hi)[1]
    tol = rtol * max(1.0, hi)
    if flo * fhi > 0:
        # the root sits within rounding of a bracket end, where the sign of
        # u' is unreliable; the phase is monotone, so finish on it instead
        if not prufer_phase(piece, lo) <= target <= prufer_phase(piece, hi):
            raise BracketFailure(f"no sign change of the shooting function in [{lo}, {hi}]")
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if not lo < mid < hi:
                break
            if prufer_phase(piece, mid) < target:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi), lo, hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        fm = _shoot_piece(piece, mid)[1]
        if fm == 0.0:
            return mid, np.nextafter(mid, -INF), np.nextafter(mid, INF)
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi), lo, hi


def _fd_feasible(op: TruncatedOperator, cutoff: float, h: float, max_nodes: int) -> bool:
    lengths, _ = op.chain()
    return min(lengths) >= h and sum(lengths) / h <= max_nodes


def fd_count(op: TruncatedOperator, cutoff: float, h: float | None = None) -> int:
    """Sturm count of the finite-difference matrix below ``cutoff`` (grid ``h/2``)."""
    if h is None:
        h = 0.01 / math.sqrt(max(cutoff, 1.0))
    lengths, betas = op.chain()
    counts = fd_oracle.segment_counts(lengths, h)
    T = fd_oracle.assemble(lengths, betas, [2 * n for n in counts])
    return fd_oracle.sturm_count(T, cutoff)


def eigenvalues_below(op: TruncatedOperator, cutoff: float, rtol: float = 1e-11,
                      check: bool | None = None, max_nodes: int = 400_000) -> Spectrum:
    """All eigenvalues ``< cutoff`` by shooting.

    ``check=True`` compares the count with the finite-difference Sturm count
    (refining the grid once before raising :class:`CountMismatch`);
    ``check=None`` does so only when the grid resolves every segment.
    """
    if cutoff <= 0:
        return Spectrum([], [], "shooting", 0, cutoff)
    pieces = op.pieces()
    jobs = []
    for i, piece in enumerate(pieces):
        npos = _piece_count(piece, cutoff) - 1
        jobs.append((i, piece, 0))
        jobs += [(i, piece, n) for n in range(1, npos + 1)]

    def solve(job):
        i, piece, n = job
        if n == 0:
            return 0.0, (-1e-300, 1e-300), i
        lam, lo, hi = _piece_eigenvalue(piece, n, cutoff, rtol)
        return lam, (lo, hi), i

    results = sorted(ordered_map(solve, jobs), key=lambda r: (r[0], r[2]))
    spec = Spectrum([r[0] for r in results], [r[1] for r in results], "shooting",
                    counting_function(op, cutoff), cutoff, piece_index=[r[2] for r in results])

    h = 0.01 / math.sqrt(max(cutoff, 1.0))
    if check is None:
        check = _fd_feasible(op, cutoff, h, max_nodes)
    if check:
        count = fd_count(op, cutoff, h)
        if count != spec.count:
            count = fd_count(op, cutoff, h / 4)
            if count != spec.count:
                raise CountMismatch(f"shooting finds {spec.count} eigenvalues below "
                                    f"{cutoff}, finite differences {count}")
        spec.fd_count = count
    if len(spec) != spec.count:
        raise CountMismatch("listed eigenvalues disagree with the counting function")
    return spec


def fd_spectrum(op: TruncatedOperator, cutoff: float, h: float | None = None) -> Spectrum:
    """Extrapolated finite-difference eigenvalues below ``cutoff``."""
    lengths, betas = op.chain()
    res = fd_oracle.chain_eigenvalues(lengths, betas, cutoff, h)
    vals = [float(v) for v in res.values if v < cutoff]
    brackets = [(float(c), float(f)) for c, f in zip(res.coarse, res.fine)][: len(vals)]
    return Spectrum(vals, brackets, "fd_oracle", res.count, cutoff, fd_count=res.count)


@dataclass
class PerturbationScan:
    rows: list[dict]
    kappa: list[float]
    tail_constant: float | None
    fitted_constant: float

    def max_shift(self) -> float:
        return max((r["shift"] for r in self.rows), default=0.0)


def coupling_perturbation_scan(schedule: Schedule, N: int, cutoff: float) -> PerturbationScan:
    """Shift of each eigenvalue below ``cutoff`` caused by the finite couplings.

    Eigenvalues are paired by index with the decoupled (``p = inf``)
    truncation; coupling only raises them, by the min-max principle.  The
    tail constant ``4 kappa_{N+1} (b - a)^2 + 8 kappa_{N+1}`` is reported
    when the schedule extends past ``N`` cells.
    """
    coupled = eigenvalues_below(TruncatedOperator(schedule, N), cutoff, check=False)
    free = eigenvalues_below(TruncatedOperator(schedule, N, decouple=True), cutoff, check=False)
    rows = []
    for i, (lp, lf) in enumerate(zip(coupled.eigenvalues, free.eigenvalues)):
        rows.append({"index": i + 1, "coupled": lp, "decoupled": lf, "shift": abs(lp - lf)})
    kappa = [schedule.kappa(n) for n in range(1, N)]
    tail = None
    if len(schedule.couplings) >= N + 1:
        k_next = schedule.kappa(N + 1)
        tail = 4.0 * k_next * (schedule.b - schedule.a) ** 2 + 8.0 * k_next
    k1 = schedule.kappa(1) if schedule.couplings else 0.0
    shift = max((r["shift"] for r in rows), default=0.0)
    fitted = shift / k1 if k1 > 0 else 0.0
    return PerturbationScan(rows, kappa, tail, fitted)


def nth_eigenvalue(op: TruncatedOperator, j: int, rtol: float = 1e-13) -> float:
    """``j``-th eigenvalue (1-based, with multiplicity) of an operator
    without infinite junctions."""
    pieces = op.pieces()
    if len(pieces) != 1:
        raise ValueError("nth_eigenvalue needs a connected chain (no infinite junctions)")
    if j < 1:
        raise ValueError("j must be >= 1")
    if j == 1:
        return 0.0
    piece = pieces[0]
    upper = 1.0
    while _piece_count(piece, upper) < j:
        upper *= 4.0
    return _piece_eigenvalue(piece, j - 1, upper, rtol)[0]
