"""Command line entry point: ``majorreach <command> ...``.

Exit codes: 0 success, 1 domain rejection, 2 I/O or parse error,
3 internal-consistency defect.
"""
import argparse
import contextlib
import csv
import logging
import os
import sys
import time

from . import io
from .controllability import system_lie_report
from .crange import (
    BRUTEFORCE_MAX_DIM,
    ando_majorization_test,
    c_spectrum,
    convex_hausdorff,
    k_c,
    k_c_bruteforce,
    sample_c_numerical_range,
)
from .errors import MajorReachError
from .linalg import hausdorff_distance
from .lindblad import trotter_noise
from .majorization import state_majorizes
from .synthesis import execute, synthesize, verify

logger = logging.getLogger("majorreach")

EXIT_OK, EXIT_DOMAIN, EXIT_IO, EXIT_DEFECT = 0, 1, 2, 3


class InputError(Exception):
    pass


def _setup_logging():
    level = os.environ.get("MAJORREACH_LOG", "error").upper()
    if level not in ("ERROR", "INFO", "DEBUG"):
        level = "ERROR"
    logging.basicConfig(level=getattr(logging, level), format="%(levelname)s %(name)s: %(message)s")


def _read_problem(path):
    try:
        return io.problem_from_dict(io.load(path))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InputError(f"cannot read problem {path}: {exc}") from exc


def _read_schedule(path):
    try:
        return io.schedule_from_dict(io.load(path))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InputError(f"cannot read schedule {path}: {exc}") from exc


def _write(obj, path):
    try:
        if path in (None, "-"):
            sys.stdout.write(io.dumps(obj))
        else:
            io.dump(obj, path)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from exc


def cmd_check(args):
    system, rho0, rho_target, eps, mode, seed = _read_problem(args.problem)
    partial = state_majorizes(rho_target, rho0, args.tol)
    ando = ando_majorization_test(rho_target, rho0, args.tol)
    print(f"partial-sum test: {'majorized' if partial else 'not majorized'}")
    print(f"K_C projector test: {'majorized' if ando else 'not majorized'}")
    if partial != ando:
        print("verdicts disagree", file=sys.stderr)
        return EXIT_DEFECT
    return EXIT_OK if partial else EXIT_DOMAIN


def cmd_synthesize(args):
    system, rho0, rho_target, eps, mode, seed = _read_problem(args.problem)
    eps = args.epsilon if args.epsilon is not None else eps
    mode = args.mode or mode
    t0 = time.perf_counter()
    schedule = synthesize(rho0, rho_target, system, eps, mode=mode)
    t1 = time.perf_counter()
    report = verify(schedule, rho0, rho_target, system)
    t2 = time.perf_counter()
    _write(io.schedule_to_dict(schedule), args.out)
    report_path = args.report or _default_report_path(args.out)
    if report_path:
        _write(io.report_to_dict(report, schedule, {"synthesize": t1 - t0, "verify": t2 - t1}),
               report_path)
    print(f"steps={len(schedule.steps)} N={schedule.block_size} M={schedule.relax_pair[1]} "
          f"alpha={schedule.alpha} padded={schedule.padded} "
          f"error={report.achieved_error:.3e} epsilon={eps:.3e}", file=sys.stderr)
    return EXIT_OK if report.achieved_error < eps else EXIT_DOMAIN


def _default_report_path(out):
    if out in (None, "-"):
        return None
    root, ext = os.path.splitext(out)
    return f"{root}.report{ext or '.json'}"


def cmd_execute(args):
    system, rho0, rho_target, eps, mode, seed = _read_problem(args.problem)
    schedule = _read_schedule(args.schedule)
    rho = execute(schedule, rho0, system)
    _write(io.state_to_dict(rho), args.out)
    return EXIT_OK


def cmd_verify(args):
    system, rho0, rho_target, eps, mode, seed = _read_problem(args.problem)
    schedule = _read_schedule(args.schedule)
    t0 = time.perf_counter()
    report = verify(schedule, rho0, rho_target, system)
    _write(io.report_to_dict(report, schedule, {"verify": time.perf_counter() - t0}), args.out)
    return EXIT_OK if report.budget_satisfied else EXIT_DOMAIN


def cmd_trotter_study(args):
    system, rho0, rho_target, eps, mode, seed = _read_problem(args.problem)
    try:
        slices = [int(s) for s in args.slices.split(",") if s.strip()]
    except ValueError as exc:
        raise InputError(f"bad slice list {args.slices!r}") from exc
    rows = []
    for s in slices:
        _, dev = trotter_noise(rho0, system, args.time, s)
        rows.append((s, dev))
    try:
        if args.out in (None, "-"):
            target = contextlib.nullcontext(sys.stdout)
        else:
            target = open(args.out, "w", newline="")
        with target as out:
            w = csv.writer(out)
            w.writerow(["slices", "deviation"])
            for s, dev in rows:
                w.writerow([s, format(dev, ".17g")])
    except OSError as exc:
        raise InputError(f"cannot write {args.out}: {exc}") from exc
    return EXIT_OK


def _read_crange_input(path):
    try:
        d = io.load(path)
        if "C" in d:
            C, T = io.decode_matrix(d["C"]), io.decode_matrix(d["T"])
        else:
            C, T = io.decode_matrix(d["rho0"]), io.decode_matrix(d["rho_target"])
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InputError(f"cannot read matrices from {path}: {exc}") from exc
    return C, T


def cmd_crange(args):
    C, T = _read_crange_input(args.input)
    K = k_c(C, T)
    brute = k_c_bruteforce(C, T) if C.shape[0] <= BRUTEFORCE_MAX_DIM else None
    W = sample_c_numerical_range(C, T, args.samples, args.seed).values
    P = c_spectrum(C, T, seed=args.seed).values
    out = {
        "version": io.FORMAT_VERSION,
        "K": K,
        "K_bruteforce": brute,
        "W_points": [[float(z.real), float(z.imag)] for z in W],
        "P_points": [[float(z.real), float(z.imag)] for z in P],
        "hausdorff_points": hausdorff_distance(W, P),
        "hausdorff_hulls": convex_hausdorff(W, P),
        "samples": int(args.samples),
        "seed": int(args.seed),
    }
    _write(out, args.out)
    print(f"K_C = {K:.17g}" + ("" if brute is None else f", brute force = {brute:.17g}"),
          file=sys.stderr)
    if brute is not None and abs(K - brute) > 1e-9:
        return EXIT_DEFECT
    return EXIT_OK


def cmd_lie_rank(args):
    system, *_ = _read_problem(args.problem)
    rep = system_lie_report(system, tol=args.tol)
    out = {
        "version": io.FORMAT_VERSION,
        "dimension": rep.dimension,
        "target_dimension": rep.target_dimension,
        "iterations": rep.iterations,
        "controllable": rep.controllable,
    }
    _write(out, args.out)
    return EXIT_OK if rep.controllable else EXIT_DOMAIN


def build_parser():
    p = argparse.ArgumentParser(prog="majorreach", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="decide whether rho_target is majorized by rho0")
    c.add_argument("problem")
    c.add_argument("--tol", type=float, default=1e-9)
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("synthesize", help="build a schedule and its verification report")
    s.add_argument("problem")
    s.add_argument("--out", required=True)
    s.add_argument("--report")
    s.add_argument("--epsilon", type=float)
    s.add_argument("--mode", choices=["exact", "trotter"])
    s.add_argument("--seed", type=int, help="accepted for symmetry; synthesis is deterministic")
    s.set_defaults(func=cmd_synthesize)

    e = sub.add_parser("execute", help="run a schedule on rho0")
    e.add_argument("problem")
    e.add_argument("schedule")
    e.add_argument("--out", default="-")
    e.set_defaults(func=cmd_execute)

    v = sub.add_parser("verify", help="execute a schedule and report its error")
    v.add_argument("problem")
    v.add_argument("schedule")
    v.add_argument("--out", default="-")
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("trotter-study", help="Trotter deviation against the closed form")
    t.add_argument("problem")
    t.add_argument("--slices", default="1,2,4,8,16,32,64,128,256,512")
    t.add_argument("--time", type=float, default=1.0)
    t.add_argument("--out", default="-")
    t.set_defaults(func=cmd_trotter_study)

    r = sub.add_parser("crange", help="K_C value, sampled C-numerical range and C-spectrum")
    r.add_argument("input")
    r.add_argument("--samples", type=int, default=1000)
    r.add_argument("--seed", type=int, required=True)
    r.add_argument("--out", default="-")
    r.set_defaults(func=cmd_crange)

    lr = sub.add_parser("lie-rank", help="Lie closure dimension of the drift and controls")
    lr.add_argument("problem")
    lr.add_argument("--tol", type=float, default=1e-8)
    lr.add_argument("--out", default="-")
    lr.set_defaults(func=cmd_lie_rank)
    return p


def main(argv=None):
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_IO if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except MajorReachError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
