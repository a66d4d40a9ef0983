"""JSON problem, schedule and report files.

Complex numbers are ``[re, im]`` pairs, matrices row-major nested lists.
Floats are written with 17 significant digits and keys in a fixed order, so a
load/dump cycle reproduces a file byte for byte.
"""
import json
import math

import numpy as np

from .lindblad import ControlSystem
from .synthesis import NoiseRelaxStep, PermutationStep, Schedule, UnitaryStep

FORMAT_VERSION = 1


def _fmt_float(x):
    x = float(x)
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def _has_dict(obj):
    if isinstance(obj, dict):
        return True
    if isinstance(obj, (list, tuple)):
        return any(_has_dict(v) for v in obj)
    return False


def _emit(obj, level, out):
    pad = "  " * level
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = list(obj.items())
        for i, (k, v) in enumerate(items):
            out.append(f"{pad}  {json.dumps(str(k))}: ")
            _emit(v, level + 1, out)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        if not _has_dict(obj):
            out.append(_inline(obj))
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad + "  ")
            _emit(v, level + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(pad + "]")
    else:
        out.append(_scalar(obj))


def _inline(obj):
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_inline(v) for v in obj) + "]"
    return _scalar(obj)


def _scalar(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _fmt_float(v)
    if isinstance(v, str):
        return json.dumps(v)
    raise TypeError(f"cannot serialize {type(v).__name__}")


def dumps(obj):
    out = []
    _emit(obj, 0, out)
    out.append("\n")
    return "".join(out)


def dump(obj, path):
    with open(path, "w") as fh:
        fh.write(dumps(obj))


def load(path):
    with open(path) as fh:
        return json.load(fh)


def encode_matrix(M):
    M = np.asarray(M, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def decode_matrix(data, n=None):
    A = np.asarray(data, dtype=float)
    if A.ndim != 3 or A.shape[-1] != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be a square nested list of [re, im] pairs")
    M = A[..., 0] + 1j * A[..., 1]
    if n is not None and M.shape != (n, n):
        raise ValueError(f"matrix has shape {M.shape}, expected {(n, n)}")
    return M


def problem_to_dict(system, rho0, rho_target, epsilon, mode="exact", seed=0):
    return {
        "version": FORMAT_VERSION,
        "dimension": int(system.dim),
        "H0": encode_matrix(system.H0),
        "controls": [encode_matrix(H) for H in system.controls],
        "V": encode_matrix(system.V),
        "rho0": encode_matrix(rho0),
        "rho_target": encode_matrix(rho_target),
        "epsilon": float(epsilon),
        "mode": mode,
        "seed": int(seed),
    }


def problem_from_dict(d):
    """Returns ``(system, rho0, rho_target, epsilon, mode, seed)``."""
    if d.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported problem version {d.get('version')!r}")
    n = int(d["dimension"])
    system = ControlSystem(
        decode_matrix(d["H0"], n),
        [decode_matrix(H, n) for H in d.get("controls", [])],
        decode_matrix(d["V"], n),
    )
    mode = d.get("mode", "exact")
    if mode not in ("exact", "trotter"):
        raise ValueError(f"unknown mode {mode!r}")
    return (system, decode_matrix(d["rho0"], n), decode_matrix(d["rho_target"], n),
            float(d["epsilon"]), mode, int(d.get("seed", 0)))


def _step_to_dict(step):
    base = {"kind": step.kind, "label": step.label, "budget_share": float(step.budget_share)}
    if step.kind == "unitary":
        base["U"] = encode_matrix(step.U)
    elif step.kind == "permutation":
        base["sigma"] = [int(s) for s in step.sigma]
    else:
        base.update({
            "duration": float(step.duration),
            "mode": step.mode,
            "slices": None if step.slices is None else int(step.slices),
            "trotter_budget": float(step.trotter_budget),
        })
    return base


def _step_from_dict(d):
    kind = d["kind"]
    common = {"label": d.get("label", ""), "budget_share": float(d.get("budget_share", 0.0))}
    if kind == "unitary":
        return UnitaryStep(decode_matrix(d["U"]), **common)
    if kind == "permutation":
        sigma = tuple(int(s) for s in d["sigma"])
        if sorted(sigma) != list(range(len(sigma))):
            raise ValueError("sigma is not a permutation")
        return PermutationStep(sigma, **common)
    if kind == "noise":
        slices = d.get("slices")
        return NoiseRelaxStep(
            duration=float(d["duration"]),
            mode=d.get("mode", "exact"),
            slices=None if slices is None else int(slices),
            trotter_budget=float(d.get("trotter_budget", 0.0)),
            **common,
        )
    raise ValueError(f"unknown step kind {kind!r}")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def schedule_to_dict(schedule):
    return {
        "version": FORMAT_VERSION,
        "epsilon": float(schedule.epsilon),
        "mode": schedule.mode,
        "block_size": int(schedule.block_size),
        "relax_pair": [int(i) for i in schedule.relax_pair],
        "alpha": int(schedule.alpha),
        "padded": bool(schedule.padded),
        "steps": [_step_to_dict(s) for s in schedule.steps],
        "provenance": _jsonable(schedule.provenance),
    }


def schedule_from_dict(d):
    if d.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported schedule version {d.get('version')!r}")
    return Schedule(
        steps=tuple(_step_from_dict(s) for s in d["steps"]),
        epsilon=float(d["epsilon"]),
        block_size=int(d["block_size"]),
        relax_pair=tuple(int(i) for i in d["relax_pair"]),
        alpha=int(d["alpha"]),
        padded=bool(d["padded"]),
        mode=d.get("mode", "exact"),
        provenance=d.get("provenance", {}),
    )


def schedule_constants(schedule):
    prov = schedule.provenance
    pad = prov.get("padding", {})
    return {
        "N": int(schedule.block_size),
        "M": int(schedule.relax_pair[1]),
        "alpha": int(schedule.alpha),
        "s_l": [float(s) for s in prov.get("relaxation_times", [])],
        "phi": float(pad.get("phi", 0.0)),
        "m": int(pad.get("m", 0)),
        "scale": float(pad.get("scale", 1.0)),
    }


def report_to_dict(report, schedule, wall_times=None):
    return {
        "version": FORMAT_VERSION,
        "verification": {
            "achieved_error": float(report.achieved_error),
            "epsilon": float(schedule.epsilon),
            "budget_total": float(report.budget_total),
            "budget_satisfied": bool(report.budget_satisfied),
            "majorization_chain_ok": bool(report.majorization_chain_ok),
            "off_diagonal_max": float(report.off_diagonal_max),
            "off_diagonal_bound": float(report.off_diagonal_bound),
            "per_step_errors": [float(e) for e in report.per_step_errors],
            "target_distances": [float(e) for e in report.target_distances],
        },
        "constants": schedule_constants(schedule),
        "provenance": _jsonable(schedule.provenance),
        "wall_times": {k: float(v) for k, v in (wall_times or {}).items()},
    }


def state_to_dict(rho):
    rho = np.asarray(rho)
    return {"version": FORMAT_VERSION, "dimension": int(rho.shape[0]), "rho": encode_matrix(rho)}
