import math

import numpy as np
import pytest

from majorreach.errors import (
    DegeneratePair,
    NoDistinctPair,
    NoiseNotUnital,
    NotControllable,
    NotMajorized,
)
from majorreach.linalg import dag, haar_unitary, random_density_matrix, trace_norm
from majorreach.lindblad import ControlSystem, apply_noise, make_noise
from majorreach.majorization import random_majorized_state, state_majorizes
from majorreach.synthesis import (
    NoiseRelaxStep,
    Schedule,
    UnitaryStep,
    choose_block,
    compose,
    execute,
    invert,
    permutation_plan,
    permutation_unitary,
    relaxation_time,
    synthesize,
    transport_permutation,
    verify,
)

from _instances import padded_instance, random_system, reachability_instance

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)


def two_level():
    return ControlSystem(SZ, [SX], np.diag([1.0, -1.0]))


def test_relaxation_time_examples():
    s = relaxation_time(0.0, np.sqrt(2), 2, 0.012)
    assert s == pytest.approx(math.log(4000))
    assert s == pytest.approx(8.294, abs=1e-3)
    s = relaxation_time(0.0, 1.0, 4, 0.01)
    assert s == pytest.approx(2 * math.log(19200))
    assert s == pytest.approx(19.72, abs=1e-2)
    assert relaxation_time(0.0, 1.0, 1, 13.0) == 0.0
    with pytest.raises(DegeneratePair):
        relaxation_time(1.0, 1.0, 2, 0.1)
    # the defining inequality holds at s
    assert math.exp(-s * 1.0 / 2) <= 0.01 / (12 * 16) * (1 + 1e-12)


def test_choose_block_examples():
    rng = np.random.default_rng(0)
    Q = haar_unitary(4, rng)
    noise = make_noise(Q @ np.diag([1.0, 1.0, 0.0, 0.0]) @ dag(Q))
    rho0 = random_density_matrix(4, rng)
    N, M, N1 = choose_block(rho0, noise, 1e-6)
    assert M == 3 and N == max(N1, 3)
    noise = make_noise(np.diag([3.0, 2.0, 1.0]))
    assert choose_block(np.eye(3) / 3, noise, 1e-3).M == 2
    with pytest.raises(NoDistinctPair):
        choose_block(np.eye(3) / 3, make_noise(np.eye(3)), 1e-3)


def test_permutation_plan_examples():
    noise = make_noise(np.diag([3.0, 2.0, 1.0]))
    plan = permutation_plan(noise, 3, 2, 1e-3)
    assert plan.rounds == [] and plan.in_place > 0
    expected = max(relaxation_time(noise.v[j], noise.v[k], 3, 1e-3)
                   for j in range(3) for k in range(j + 1, 3))
    assert plan.in_place == pytest.approx(expected)

    noise = make_noise(np.diag([2.0, 2.0, 1.0]))
    plan = permutation_plan(noise, 3, 3, 1e-3)
    assert len(plan.rounds) == 1 and plan.transported == [(0, 1)]
    sigma, s = plan.rounds[0]
    assert sigma[0] == 0 and sigma[1] == 2
    assert s == pytest.approx(relaxation_time(2.0, 1.0, 3, 1e-3))

    plan = permutation_plan(noise, 1, 3, 1e-3)
    assert plan.rounds == [] and plan.in_place == 0.0


def test_transport_permutation_properties():
    for n in range(2, 7):
        for m in range(1, n):
            for j in range(n):
                for k in range(j + 1, n):
                    sigma = transport_permutation(j, k, m, n)
                    assert sorted(sigma) == list(range(n))
                    assert sigma[j] == 0 and sigma[k] == m
                    assert compose(invert(sigma), sigma) == tuple(range(n))


def test_transport_rounds_act_diagonally():
    # conjugating by a permutation, relaxing, and undoing it keeps matrix units as eigenvectors
    rng = np.random.default_rng(1)
    Q = haar_unitary(4, rng)
    noise = make_noise(Q @ np.diag([2.0, 2.0, 1.0, 1.0]) @ dag(Q))
    plan = permutation_plan(noise, 4, 3, 1e-3)
    assert plan.rounds
    for sigma, s in plan.rounds:
        P = permutation_unitary(sigma, noise)
        for j in range(4):
            for k in range(4):
                E = np.outer(noise.f[:, j], noise.f[:, k].conj())
                out = dag(P) @ apply_noise(P @ E @ dag(P), noise, s) @ P
                c = np.vdot(E.ravel(), out.ravel())
                assert np.linalg.norm(out - c * E) <= 1e-10
                assert abs(c) <= 1 + 1e-12


def test_synthesize_two_level_example():
    system = two_level()
    rho0 = np.diag([1.0, 0.0])
    target = np.eye(2) / 2
    sched = synthesize(rho0, target, system, 1e-3)
    kinds = [s.kind for s in sched.steps]
    assert kinds == ["unitary", "noise"]
    U = sched.steps[0].U
    # Hadamard-type: equal-weight superposition in the noise basis
    np.testing.assert_allclose(np.abs(U @ np.array([1, 0])), [2 ** -0.5] * 2, atol=1e-12)
    rep = verify(sched, rho0, target, system)
    assert rep.achieved_error < 1e-3 and rep.majorization_chain_ok
    # off-diagonal 0.5 exp(-2 s) against the closed form
    s = sched.steps[1].duration
    assert rep.achieved_error == pytest.approx(2 * 0.5 * math.exp(-2 * s), rel=1e-6)


def test_synthesize_identity_and_unitary_targets():
    rng = np.random.default_rng(2)
    system = random_system(4, rng)
    rho0 = random_density_matrix(4, rng)
    sched = synthesize(rho0, rho0, system, 1e-3)
    assert all(s.kind == "unitary" for s in sched.steps) and len(sched.steps) <= 1
    assert verify(sched, rho0, rho0, system).achieved_error <= 1e-9

    W = haar_unitary(4, rng)
    target = W @ rho0 @ dag(W)
    sched = synthesize(rho0, target, system, 1e-3)
    assert sched.noise_duration == 0.0
    rep = verify(sched, rho0, target, system)
    assert rep.achieved_error <= 1e-3
    assert rep.off_diagonal_max <= rep.off_diagonal_bound + 1e-10


def test_synthesize_errors():
    system = two_level()
    with pytest.raises(NotMajorized):
        synthesize(np.eye(2) / 2, np.diag([1.0, 0.0]), system, 1e-3)
    with pytest.raises(NoDistinctPair):
        synthesize(np.diag([1.0, 0.0]), np.eye(2) / 2, ControlSystem(SZ, [SX], np.eye(2)), 1e-3)
    with pytest.raises(NoDistinctPair):
        synthesize(np.diag([1.0, 0.0]), np.eye(2) / 2, ControlSystem(SZ, [SX], None), 1e-3)
    with pytest.raises(NoiseNotUnital):
        synthesize(np.diag([1.0, 0.0]), np.eye(2) / 2,
                   ControlSystem(SZ, [SX], np.array([[0, 1], [0, 0]])), 1e-3)
    with pytest.raises(NotControllable):
        synthesize(np.diag([1.0, 0.0]), np.eye(2) / 2,
                   ControlSystem(SZ, [np.diag([0.5, 0.0])], np.diag([1.0, -1.0])), 1e-3)
    with pytest.raises(ValueError):
        synthesize(np.diag([1.0, 0.0]), np.eye(2) / 2, system, 0.0)


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("eps", [1e-2, 1e-3])
def test_synthesize_random_instances(seed, eps):
    system, rho0, target = reachability_instance(100 + seed)
    sched = synthesize(rho0, target, system, eps)
    rep = verify(sched, rho0, target, system)
    assert rep.achieved_error < eps
    assert rep.achieved_error <= sched.total_budget
    assert sched.total_budget <= eps + 1e-15
    assert rep.majorization_chain_ok
    N = sched.block_size
    assert sched.alpha <= N * (N - 1) // 2
    assert rep.off_diagonal_max <= eps / (12 * N * N) + 1e-10
    assert state_majorizes(execute(sched, rho0, system), rho0, 1e-8)


def test_verify_examples():
    rng = np.random.default_rng(3)
    system = random_system(3, rng)
    rho0 = random_density_matrix(3, rng)
    W = haar_unitary(3, rng)
    sched = Schedule((UnitaryStep(W),), 1e-3, 1, (1, 2), 0)
    rep = verify(sched, rho0, W @ rho0 @ dag(W), system)
    assert rep.achieved_error <= 1e-12 and rep.budget_satisfied

    target = random_majorized_state(rho0, 2, 5)
    full = synthesize(rho0, target, system, 1e-3)
    cut = Schedule(tuple(s for s in full.steps if s.kind == "unitary"), 1e-3,
                   full.block_size, full.relax_pair, full.alpha)
    rep = verify(cut, rho0, target, system)
    assert rep.achieved_error > 1e-3 and not rep.budget_satisfied


def test_execute_examples():
    rng = np.random.default_rng(4)
    system = random_system(3, rng)
    rho0 = random_density_matrix(3, rng)
    np.testing.assert_array_equal(execute(Schedule((), 1e-3, 1, (1, 2), 0), rho0, system), rho0)
    sched = Schedule((NoiseRelaxStep(0.7),), 1e-3, 1, (1, 2), 0)
    np.testing.assert_allclose(execute(sched, rho0, system), apply_noise(rho0, system.noise, 0.7))


def test_trotter_mode_within_budget():
    rng = np.random.default_rng(5)
    H0 = 0.3 * np.diag([1.0, -0.5, -0.5]) + 0.1 * np.array(
        [[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex)
    H1 = np.array([[0, 0, 1], [0, 0, 0], [1, 0, 0]], dtype=complex)
    system = ControlSystem(H0, [H1], np.diag([3.0, -3.0, 0.0]))
    rho0 = random_density_matrix(3, rng)
    target = random_majorized_state(rho0, 1, 9)
    eps = 1e-2
    exact = synthesize(rho0, target, system, eps, mode="exact")
    trot = synthesize(rho0, target, system, eps, mode="trotter")
    noise_steps = [s for s in trot.steps if s.kind == "noise"]
    assert noise_steps and all(s.slices is not None and s.slices >= 1 for s in noise_steps)
    rep = verify(trot, rho0, target, system)
    assert rep.achieved_error < eps and rep.achieved_error <= trot.total_budget
    assert np.all(rep.per_step_errors[[i for i, s in enumerate(trot.steps) if s.kind == "noise"]]
                  <= [s.trotter_budget for s in noise_steps])
    diff = trace_norm(execute(trot, rho0, system) - execute(exact, rho0, system))
    assert diff <= sum(s.trotter_budget for s in noise_steps)


def test_padded_branch_example():
    system = two_level()
    sched = synthesize(np.diag([1.0, 0.0]), np.diag([0.7, 0.3]), system, 1e-3)
    assert sched.padded
    pad = sched.provenance["padding"]
    assert abs(pad["fill_value"] * pad["m"] - pad["phi"]) <= 1e-12
    rep = verify(sched, np.diag([1.0, 0.0]), np.diag([0.7, 0.3]), system)
    assert rep.achieved_error < 1e-3


def test_padded_branch_invariants():
    refills = 0
    for seed in range(12):
        system, rho0, target = padded_instance(500 + seed)
        sched = synthesize(rho0, target, system, 1e-3)
        assert sched.padded
        pad = sched.provenance["padding"]
        x_hat = np.array(pad["x_hat"]) / pad["scale"]
        y_hat = np.array(pad["y_hat"]) / pad["scale"]
        # the scaled spectra describe valid states in dimension n
        for w in (x_hat, y_hat):
            assert w.size <= system.dim and np.all(w >= 0) and abs(w.sum() - 1) <= 1e-12
        assert abs(pad["fill_value"] * pad["m"] - pad["phi"]) <= 1e-12
        refills += pad["m"] > 0
        rep = verify(sched, rho0, target, system)
        assert rep.achieved_error < 1e-3 and rep.majorization_chain_ok
    assert refills > 0
