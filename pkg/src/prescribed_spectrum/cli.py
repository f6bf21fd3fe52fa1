"""``specforge`` command line: design -> spectrum -> verify, plus the lab commands.

Exit codes: 0 ok, 2 target set without 0, 3 malformed target set, 4 usage
error, 5 eigenvalue count mismatch, 6 verification failed.  Anything else
that escapes is a crash (exit 1).  Errors are reported as one JSON object
on standard error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import extension_lab, rooms_passages
from .errors import (CountMismatch, MalformedSet, SpectralDesignError, ZeroNotIncluded)
from .mivt import ChainTuneSpec, tune_chain
from .operator_assembly import Schedule, design
from .target_set import validate
from .truncated_spectrum import TruncatedOperator, eigenvalues_below, fd_spectrum
from .verify import verify

EXIT_OK, EXIT_NO_ZERO, EXIT_MALFORMED, EXIT_USAGE, EXIT_COUNT, EXIT_VERIFY = 0, 2, 3, 4, 5, 6


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _jsonable(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else ("inf" if obj > 0 else "-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer)):
        return _jsonable(obj.item())
    return obj


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to a temporary file next to ``path`` and rename it into place."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, allow_nan=False) + "\n"


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


def _read_target(path: str):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedSet(f"target file is not JSON: {exc}") from exc
    return validate(raw)


def _read_schedule(path: str) -> Schedule:
    with open(path) as fh:
        return Schedule.loads(fh.read())


def cmd_design(args) -> int:
    if args.cells < 1:
        raise UsageError("--cells must be >= 1")
    target = _read_target(args.target)
    sched, report = design(target, args.cells)
    sched.meta["report"] = report.to_dict()
    write_atomic(args.out, sched.dumps())
    return EXIT_OK


def cmd_spectrum(args) -> int:
    if args.truncate < 1:
        raise UsageError("--truncate must be >= 1")
    sched = _read_schedule(args.schedule)
    op = TruncatedOperator(sched, args.truncate)
    spec = eigenvalues_below(op, args.lambda_max)
    extra = None
    summary = None
    if args.oracle and len(spec):
        fd = fd_spectrum(op, args.lambda_max)
        if len(fd.eigenvalues) != len(spec):
            raise CountMismatch(f"shooting finds {len(spec)} eigenvalues, "
                                f"finite differences {len(fd.eigenvalues)}")
        dev = [abs(a - b) for a, b in zip(spec.eigenvalues, fd.eigenvalues)]
        extra = {"fd_lambda": list(fd.eigenvalues), "deviation": dev}
        summary = max(dev)
    elif args.oracle:
        extra = {"fd_lambda": [], "deviation": []}
        summary = 0.0
    text = spec.to_csv(extra)
    if summary is not None:
        text += f"# max_deviation={_fmt(summary)}\n"
        print(json.dumps({"max_deviation": summary}))
    write_atomic(args.out, text)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.truncate < 1:
        raise UsageError("--truncate must be >= 1")
    sched = _read_schedule(args.schedule)
    target = _read_target(args.target)
    report = verify(sched, target, args.truncate, args.lambda_max, args.threshold,
                    skip_head=args.skip_head, decouple=args.decouple)
    write_atomic(args.out, _dump_json(report.to_dict()))
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_tune_chain(args) -> int:
    spec = ChainTuneSpec(tuple(_floats(args.targets)), args.coupling)
    try:
        spec.resolved()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    result = tune_chain(spec, tol=args.tol)
    sched = result.schedule
    sched.meta["eigenvalues"] = list(result.eigenvalues)
    sched.meta["sweeps"] = result.solution.sweeps
    write_atomic(args.out, sched.dumps())
    return EXIT_OK


def cmd_extension(args) -> int:
    n, m = args.n, args.m
    if not 1 <= m <= n:
        raise UsageError("need 1 <= m <= n")
    clusters = _floats(args.xi_clusters)
    steps = 4
    sizes = sorted({(max(1, n * j // steps), max(1, m * j // steps)) for j in range(1, steps + 1)})
    table = extension_lab.clustering_experiment(clusters, sizes, mu=args.mu, seed=args.seed)
    rng = np.random.default_rng(args.seed)
    small = extension_lab.random_model(min(n, 40), min(m, 40), rng, mu=0.0)
    built = extension_lab.build_extension(small)
    bc = extension_lab.boundary_condition_check(small, built, trials=100, rng=rng)
    report = {"n": n, "m": m, "clusters": clusters, "mu": args.mu, "seed": args.seed,
              "defects": {"weyl": built.diagnostics["weyl_defect"],
                          "symmetry": built.diagnostics["symmetry_defect"],
                          "boundary_condition": bc["bc"], "range": bc["range"]},
              "clustering": table.to_dict()}
    write_atomic(args.out, _dump_json(report))
    return EXIT_OK


def cmd_rp_norms(args) -> int:
    if args.k_max < 3:
        raise UsageError("--k-max must be >= 3")
    seq = rooms_passages.default_sequences(args.k_max + 1, alpha=args.alpha)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "l2_sq", "grad_sq", "ratio"])
    for row in rooms_passages.norms_table(seq, args.k_max):
        w.writerow([row.k, _fmt(row.l2_sq), _fmt(row.grad_sq), _fmt(row.ratio)])
    write_atomic(args.out, buf.getvalue())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="specforge", description="Design and check delta-prime chains "
                "with a prescribed spectral accumulation set.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("design", help="build a schedule for a target set")
    d.add_argument("--target", required=True)
    d.add_argument("--cells", type=int, required=True)
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_design)

    s = sub.add_parser("spectrum", help="eigenvalues of a truncated schedule")
    s.add_argument("--schedule", required=True)
    s.add_argument("--truncate", type=int, required=True)
    s.add_argument("--lambda-max", type=float, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--oracle", action="store_true", help="add finite-difference columns")
    s.set_defaults(func=cmd_spectrum)

    v = sub.add_parser("verify", help="check clustering of the truncated spectrum on S")
    v.add_argument("--schedule", required=True)
    v.add_argument("--target", required=True)
    v.add_argument("--truncate", type=int, required=True)
    v.add_argument("--lambda-max", type=float, required=True)
    v.add_argument("--threshold", type=float, required=True)
    v.add_argument("--skip-head", type=int, default=0)
    v.add_argument("--decouple", action="store_true", help="force every coupling to infinity")
    v.add_argument("--out", required=True)
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("tune-chain", help="place eigenvalues m+1..2m of a coupled chain")
    t.add_argument("--targets", required=True)
    t.add_argument("--coupling", type=float, required=True)
    t.add_argument("--tol", type=float, default=1e-8)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_tune_chain)

    e = sub.add_parser("extension", help="matrix model of the resolvent-glued extension")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--m", type=int, required=True)
    e.add_argument("--xi-clusters", required=True)
    e.add_argument("--mu", type=float, default=0.5)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_extension)

    r = sub.add_parser("rp-norms", help="rooms-and-passages test-function norms")
    r.add_argument("--k-max", type=int, required=True)
    r.add_argument("--alpha", type=int, default=4)
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_rp_norms)
    return p


def _fail(code: int, exc: BaseException) -> int:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}),
          file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        return _fail(EXIT_USAGE, exc)
    except ZeroNotIncluded as exc:
        return _fail(EXIT_NO_ZERO, exc)
    except MalformedSet as exc:
        return _fail(EXIT_MALFORMED, exc)
    except CountMismatch as exc:
        return _fail(EXIT_COUNT, exc)
    except (SpectralDesignError, OSError) as exc:
        return _fail(1, exc)


if __name__ == "__main__":
    sys.exit(main())
