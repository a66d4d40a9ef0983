"""Explicit channel schedules steering ``rho0`` to any state it majorizes.

A schedule has three stages, all expressed through the eigenbasis ``f`` of the
noise operator ``V``:

1. a unitary taking ``rho0`` to ``U diag(y) U^dag`` whose diagonal is the
   target spectrum ``x`` (Schur-Horn);
2. pure-noise relaxations that damp every off-diagonal entry of the leading
   ``N x N`` block; entries sitting on degenerate eigenvalue pairs of ``V``
   are first permuted into the spot ``(1, M)`` where ``v_1 != v_M``;
3. a unitary rotating ``diag(x)`` onto the target.

If the zero patterns of the two spectra differ, both spectra are truncated
and refilled (:func:`majorization.pad_and_match`) and the scheme above runs on
the padded pair between two extra rotations.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional, Union

import numpy as np

from .controllability import system_lie_report
from .errors import (
    BudgetExceeded,
    DegeneratePair,
    DimensionMismatch,
    NoDistinctPair,
    NoiseNotUnital,
    NotControllable,
    NotMajorized,
    ZeroNoise,
)
from .linalg import dag, hermitian_eig, is_identity_up_to_phase, minimal_block, trace_norm
from .lindblad import apply_noise, trotter_noise, verify_unitality
from .majorization import check_density, majorizes, pad_and_match, schur_horn_unitary

logger = logging.getLogger(__name__)

DEGENERACY_RTOL = 1e-9
ZERO_TOL = 1e-12
MAX_SLICES = 2 ** 16
CHAIN_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class UnitaryStep:
    U: np.ndarray
    label: str = ""
    budget_share: float = 0.0
    kind = "unitary"


@dataclass(frozen=True, eq=False)
class PermutationStep:
    sigma: tuple  # index i of the noise eigenbasis moves to sigma[i] (0-based)
    label: str = ""
    budget_share: float = 0.0
    kind = "permutation"


@dataclass(frozen=True, eq=False)
class NoiseRelaxStep:
    duration: float
    mode: str = "exact"
    slices: Optional[int] = None
    label: str = ""
    budget_share: float = 0.0
    trotter_budget: float = 0.0
    kind = "noise"


Step = Union[UnitaryStep, PermutationStep, NoiseRelaxStep]


@dataclass(frozen=True, eq=False)
class Schedule:
    steps: tuple
    epsilon: float
    block_size: int
    relax_pair: tuple
    alpha: int
    padded: bool = False
    mode: str = "exact"
    provenance: dict = field(default_factory=dict)

    @property
    def total_budget(self):
        return float(sum(s.budget_share for s in self.steps))

    @property
    def noise_duration(self):
        return float(sum(s.duration for s in self.steps if s.kind == "noise"))


@dataclass(frozen=True)
class VerificationReport:
    achieved_error: float
    per_step_errors: np.ndarray
    budget_satisfied: bool
    majorization_chain_ok: bool
    budget_total: float
    off_diagonal_max: float
    off_diagonal_bound: float
    target_distances: np.ndarray


class BlockChoice(NamedTuple):
    N: int
    M: int  # 1-based
    N1: int


@dataclass(frozen=True)
class PermutationPlan:
    rounds: list          # (sigma, duration) pairs
    in_place: float       # one relaxation covering all non-degenerate pairs
    transported: list     # degenerate pairs (j, k), 0-based
    damped_in_place: list


def degeneracy_threshold(noise):
    return DEGENERACY_RTOL * float(np.max(np.abs(noise.v)))


def relaxation_time(v_a, v_b, N, epsilon, threshold=None):
    """Shortest ``s`` with ``exp(-s |v_a - v_b|^2 / 2) <= epsilon / (12 N^2)``."""
    if threshold is None:
        threshold = DEGENERACY_RTOL * max(abs(v_a), abs(v_b))
    gap = abs(v_a - v_b)
    if gap <= threshold or gap == 0.0:
        raise DegeneratePair(f"noise eigenvalues {v_a} and {v_b} coincide")
    return max(0.0, 2.0 * math.log(12.0 * N * N / epsilon) / gap ** 2)


def relax_spot(noise):
    """Least 1-based ``M`` with ``v_M != v_1``."""
    thr = degeneracy_threshold(noise)
    far = np.nonzero(np.abs(noise.v - noise.v[0]) > thr)[0]
    if far.size == 0:
        raise NoDistinctPair("noise operator is a multiple of the identity")
    return int(far[0]) + 1


def choose_block(rho0, noise, epsilon, state=None):
    """Block size ``N = max(N1, M)`` and relaxation spot ``M``.

    ``N1`` is the least block size whose truncation tail of ``state`` (default
    ``rho0``) in the noise eigenbasis stays below ``epsilon / 24``.
    """
    M = relax_spot(noise)
    X = rho0 if state is None else state
    N1 = minimal_block(X, epsilon / 24.0, basis=noise.f)
    return BlockChoice(max(N1, M), M, N1)


def transport_permutation(j, k, m, n):
    """Permutation of ``0..n-1`` sending ``j -> 0`` and ``k -> m``; fixes what it can."""
    sigma = np.full(n, -1, dtype=int)
    sigma[j], sigma[k] = 0, m
    free_targets = sorted({j, k} - {0, m})
    leftovers = sorted({0, m} - {j, k})
    for i in range(n):
        if sigma[i] >= 0:
            continue
        if i in leftovers:
            sigma[i] = free_targets[leftovers.index(i)]
        else:
            sigma[i] = i
    return tuple(int(s) for s in sigma)


def compose(after, before):
    """Permutation ``i -> after[before[i]]``."""
    return tuple(int(after[b]) for b in before)


def invert(sigma):
    return tuple(int(i) for i in np.argsort(sigma))


def permutation_plan(noise, N, M, epsilon, state=None):
    """Relaxation rounds for the leading ``N x N`` block in the noise eigenbasis.

    Non-degenerate pairs ``v_j != v_k`` damp in place; each degenerate pair is
    moved to the spot ``(1, M)`` for one round. Pairs whose entries in
    ``state`` (noise-basis coordinates) are already below the target are skipped.
    """
    thr = degeneracy_threshold(noise)
    bound = epsilon / (12.0 * N * N)
    v = noise.v
    n = noise.dim
    s_spot = relaxation_time(v[0], v[M - 1], N, epsilon, thr)
    rounds, transported, damped = [], [], []
    in_place = 0.0
    for j in range(N):
        for k in range(j + 1, N):
            if state is not None and max(abs(state[j, k]), abs(state[k, j])) <= bound:
                continue
            if abs(v[j] - v[k]) > thr:
                in_place = max(in_place, relaxation_time(v[j], v[k], N, epsilon, thr))
                damped.append((j, k))
            else:
                rounds.append((transport_permutation(j, k, M - 1, n), s_spot))
                transported.append((j, k))
    return PermutationPlan(rounds, in_place, transported, damped)


def _step2(S, noise, epsilon, mode):
    """Stage-2 steps for the noise-basis state ``S`` with their budgets."""
    F = noise.f
    block = choose_block(None, noise, epsilon, state=F @ S @ dag(F))
    N, M = block.N, block.M
    plan = permutation_plan(noise, N, M, epsilon, state=S)

    relax = []
    if plan.in_place > 0:
        relax.append(("in place", plan.in_place, None))
    prev = None
    perm_steps = []
    for l, (sigma, s) in enumerate(plan.rounds, start=1):
        pi = sigma if prev is None else compose(sigma, invert(prev))
        relax.append((f"round {l}", s, pi))
        prev = sigma
    if prev is not None:
        perm_steps.append(invert(prev))

    n_relax = len(relax)
    n_perm = len(plan.rounds) + (1 if plan.rounds else 0)
    relax_share = epsilon / 6.0 / n_relax if n_relax else 0.0
    trotter_share = epsilon / 12.0 / n_relax if (n_relax and mode == "trotter") else 0.0
    perm_share = epsilon / 12.0 / n_perm if n_perm else 0.0

    steps = []
    for label, s, pi in relax:
        if pi is not None:
            steps.append(PermutationStep(pi, f"transport {label}", perm_share))
        steps.append(NoiseRelaxStep(
            duration=float(s), mode=mode, label=f"relax {label}",
            budget_share=relax_share + trotter_share, trotter_budget=trotter_share,
        ))
    for pi in perm_steps:
        steps.append(PermutationStep(pi, "restore", perm_share))

    info = {
        "N": N,
        "M": M,
        "N1": block.N1,
        "alpha": len(plan.rounds),
        "relaxation_times": [float(s) for _, s in plan.rounds],
        "in_place_duration": float(plan.in_place),
        "transported_pairs": [[j + 1, k + 1] for j, k in plan.transported],
        "off_diagonal_bound": epsilon / (12.0 * N * N),
    }
    return steps, info


def _direct(y, Q0, x, Qt, noise, epsilon, mode):
    """Steps taking ``Q0 diag(y) Q0^dag`` close to ``Qt diag(x) Qt^dag`` (sorted spectra)."""
    F = noise.f
    Ush = schur_horn_unitary(x, y)
    S = Ush @ np.diag(y) @ dag(Ush)
    G1 = F @ Ush @ dag(Q0)
    G3 = Qt @ dag(F)
    stage2, info = _step2(S, noise, epsilon, mode)
    steps = []
    if not stage2:
        # nothing happens between the rotations, so they fuse into one
        G = G3 @ G1
        if not is_identity_up_to_phase(G):
            steps.append(UnitaryStep(G, "steps 1 and 3: fused rotation", 2 * epsilon / 3.0))
        info["certificate_step"] = None
        info["certificate_value"] = _block_off_diagonal(S, info["N"])
        return steps, info
    if not is_identity_up_to_phase(G1):
        steps.append(UnitaryStep(G1, "step 1: Schur-Horn rotation", epsilon / 3.0))
    steps += stage2
    info["certificate_step"] = len(steps) - 1
    if not is_identity_up_to_phase(G3):
        steps.append(UnitaryStep(G3, "step 3: rotate onto target", epsilon / 3.0))
    return steps, info


def _tail_block(x, y, bound):
    """Least ``N`` with both tails ``sum_{j > N}`` strictly below ``bound``."""
    n = x.size
    tx = np.concatenate([np.cumsum(x[::-1])[::-1][1:], [0.0]])
    ty = np.concatenate([np.cumsum(y[::-1])[::-1][1:], [0.0]])
    ok = np.nonzero((tx < bound) & (ty < bound))[0]
    return int(ok[0]) + 1 if ok.size else n


def _clean_spectrum(rho):
    w, Q = hermitian_eig(rho)
    w = np.where(w <= ZERO_TOL, 0.0, w)
    return w, Q


def synthesize(rho0, rho_target, system, epsilon, mode="exact", check_controllability=True):
    """Build a schedule with ``||rho_target - execute(schedule, rho0)||_1 < epsilon``."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if mode not in ("exact", "trotter"):
        raise ValueError("mode must be 'exact' or 'trotter'")
    rho0 = check_density(rho0)
    rho_target = check_density(rho_target)
    n = system.dim
    if rho0.shape != (n, n) or rho_target.shape != (n, n):
        raise DimensionMismatch("states do not match the system dimension")

    y, Q0 = _clean_spectrum(rho0)
    x, Qt = _clean_spectrum(rho_target)
    if not majorizes(x, y, 1e-9):
        raise NotMajorized("target is not majorized by the initial state")
    unital, resid = verify_unitality(system.V)
    if not unital:
        raise NoiseNotUnital(f"Gamma_V(1) has trace norm {resid:.3e}; V is not normal")
    if check_controllability:
        lie = system_lie_report(system)
        if not lie.controllable:
            raise NotControllable(
                f"Lie closure has dimension {lie.dimension} < {lie.target_dimension}")
    try:
        noise = system.noise
    except ZeroNoise as exc:
        raise NoDistinctPair("noise operator vanishes") from exc
    relax_spot(noise)

    padded = int(np.sum(x == 0.0)) != int(np.sum(y == 0.0))
    provenance = {"branch": "padded" if padded else "direct"}
    if not padded:
        steps, info = _direct(y, Q0, x, Qt, noise, epsilon, mode)
        provenance.update(info)
    else:
        # the refilled sequence must fit in dimension n; at N = n nothing is refilled
        for N_pad in range(_tail_block(x, y, epsilon / 12.0), n + 1):
            pair = pad_and_match(x, y, N_pad)
            if pair.x_hat.size <= n:
                break
        x_hat = np.zeros(n)
        x_hat[: pair.x_hat.size] = pair.x_hat
        y_hat = np.zeros(n)
        y_hat[: pair.y_hat.size] = pair.y_hat
        F = noise.f
        inner_eps = epsilon / 6.0
        inner, info = _direct(y_hat / pair.scale, F, x_hat / pair.scale, F, noise, inner_eps, mode)
        Y = F @ dag(Q0)
        Xd = Qt @ dag(F)
        # identity rotations are dropped only if no truncation error rides on them
        tail_y = float(np.sum(y[pair.N:]))
        tail_x = float(np.sum(np.abs(x_hat - x)))
        steps = []
        offset = 0
        if tail_y > 0 or not is_identity_up_to_phase(Y):
            steps.append(UnitaryStep(Y, "pad: rotate rho0 onto noise basis", epsilon / 4 + epsilon / 12))
            offset = 1
        steps += inner
        if tail_x > 0 or not is_identity_up_to_phase(Xd):
            steps.append(UnitaryStep(Xd, "pad: rotate onto target", epsilon / 4 + epsilon / 6))
        if info["certificate_step"] is not None:
            info["certificate_step"] += offset
        provenance.update(info)
        provenance.update({
            "inner_epsilon": inner_eps,
            "padding": {
                "N": pair.N,
                "phi": pair.phi,
                "m": pair.fill_count,
                "fill_value": pair.fill_value,
                "k": pair.k,
                "scale": pair.scale,
                "x_hat": [float(t) for t in pair.x_hat],
                "y_hat": [float(t) for t in pair.y_hat],
                "tail_y": tail_y,
                "tail_x": tail_x,
            },
        })

    schedule = Schedule(
        steps=tuple(steps),
        epsilon=float(epsilon),
        block_size=int(provenance["N"]),
        relax_pair=(1, int(provenance["M"])),
        alpha=int(provenance["alpha"]),
        padded=padded,
        mode=mode,
        provenance=provenance,
    )
    if mode == "trotter":
        schedule = _fix_slices(schedule, rho0, system)
    logger.info("synthesized %d steps (branch=%s, N=%d, M=%d, alpha=%d)",
                len(schedule.steps), provenance["branch"], schedule.block_size,
                provenance["M"], schedule.alpha)
    return schedule


def permutation_unitary(sigma, noise):
    n = len(sigma)
    P = np.zeros((n, n), dtype=complex)
    P[list(sigma), np.arange(n)] = 1.0
    return noise.f @ P @ dag(noise.f)


def _trotter_slices(rho, system, duration, budget):
    slices = 1
    while slices <= MAX_SLICES:
        out, dev = trotter_noise(rho, system, duration, slices)
        if dev <= budget:
            return slices, out, dev
        slices *= 2
    raise BudgetExceeded(
        f"Trotter deviation {dev:.3e} above budget {budget:.3e} at {MAX_SLICES} slices")


def _apply(step, rho, system):
    """Execute one step; returns ``(state, realization error)``."""
    if step.kind == "unitary":
        return step.U @ rho @ dag(step.U), 0.0
    if step.kind == "permutation":
        P = permutation_unitary(step.sigma, system.noise)
        return P @ rho @ dag(P), 0.0
    if step.mode == "exact" or step.duration == 0.0:
        return apply_noise(rho, system.noise, step.duration), 0.0
    if step.slices is None:
        _, out, dev = _trotter_slices(rho, system, step.duration, step.trotter_budget)
        return out, dev
    return trotter_noise(rho, system, step.duration, step.slices)


def _fix_slices(schedule, rho0, system):
    rho = np.asarray(rho0, dtype=complex)
    steps = []
    for step in schedule.steps:
        if step.kind == "noise" and step.mode == "trotter" and step.slices is None:
            slices, rho, _ = _trotter_slices(rho, system, step.duration, step.trotter_budget)
            step = replace(step, slices=slices)
        else:
            rho, _ = _apply(step, rho, system)
        steps.append(step)
    return replace(schedule, steps=tuple(steps))


def run(schedule, rho0, system):
    """Execute and return all intermediate states and per-step realization errors."""
    rho = np.asarray(rho0, dtype=complex)
    if rho.shape != (system.dim, system.dim):
        raise DimensionMismatch("state does not match the system dimension")
    states = [rho]
    errors = []
    for step in schedule.steps:
        rho, err = _apply(step, rho, system)
        states.append(rho)
        errors.append(err)
    return states, np.array(errors)


def execute(schedule, rho0, system):
    return run(schedule, rho0, system)[0][-1]


def _block_off_diagonal(Y, N):
    Y = Y[:N, :N]
    return float(np.max(np.abs(Y - np.diag(np.diag(Y))))) if N > 1 else 0.0


def off_diagonal_max(rho, noise, N):
    return _block_off_diagonal(noise.to_basis(rho), N)


def verify(schedule, rho0, rho_target, system):
    """Execute ``schedule`` and measure it against ``rho_target``; never raises on quality."""
    states, errors = run(schedule, rho0, system)
    final = states[-1]
    achieved = trace_norm(rho_target - final)
    chain_ok = all(
        majorizes(hermitian_eig(b).values.clip(0), hermitian_eig(a).values.clip(0), CHAIN_TOL)
        for a, b in zip(states[:-1], states[1:])
    )
    idx = schedule.provenance.get("certificate_step")
    N = schedule.block_size
    if idx is None:
        # no relaxation was needed; the value was taken from the rotated state
        off = float(schedule.provenance.get("certificate_value", float("nan")))
    else:
        off = off_diagonal_max(states[idx + 1], system.noise, N)
    bound = schedule.provenance.get("off_diagonal_bound", float("nan"))
    return VerificationReport(
        achieved_error=float(achieved),
        per_step_errors=errors,
        budget_satisfied=bool(achieved < schedule.epsilon),
        majorization_chain_ok=bool(chain_ok),
        budget_total=schedule.total_budget,
        off_diagonal_max=off,
        off_diagonal_bound=float(bound),
        target_distances=np.array([trace_norm(rho_target - s) for s in states]),
    )
