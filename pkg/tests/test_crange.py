import itertools

import numpy as np
import pytest

from majorreach.crange import (
    ando_majorization_test,
    c_spectrum,
    collinear_hull_check,
    diagonal_projector,
    k_c,
    k_c_bruteforce,
    k_c_parts,
    sample_c_numerical_range,
    sampled_range_distance,
)
from majorreach.errors import NotCollinear, NotHermitian, NotNormal, TooLarge
from majorreach.linalg import (
    block_truncate,
    dag,
    haar_unitary,
    operator_norm,
    random_density_matrix,
    random_hermitian,
    trace_norm,
)
from majorreach.majorization import state_majorizes


def pairing_oracle(c, t):
    """Max of sum c_j t_sigma(j) by explicit enumeration with python ints/floats."""
    return max(sum(a * t[s] for a, s in zip(c, p)) for p in itertools.permutations(range(len(c))))


def as_set(z):
    return {(round(p.real, 9), round(p.imag, 9)) for p in np.atleast_1d(z)}


def test_c_spectrum_examples():
    P = c_spectrum(np.diag([1, 0]), np.diag([2.0, 7.0]))
    assert P.exhaustive and as_set(P.values) == {(2.0, 0.0), (7.0, 0.0)}
    rng = np.random.default_rng(0)
    T = random_hermitian(3, rng)
    P = c_spectrum(np.eye(3) / 3, T)
    assert as_set(P.values) == as_set(np.trace(T) / 3)
    P = c_spectrum(np.diag([1, -1]), np.diag([2, -3]))
    assert as_set(P.values) == {(5.0, 0.0), (-5.0, 0.0)}


def test_c_spectrum_errors_and_sampling_branch():
    with pytest.raises(NotNormal):
        c_spectrum(np.array([[0, 1], [0, 0]]), np.eye(2))
    rng = np.random.default_rng(1)
    C, T = random_hermitian(9, rng), random_hermitian(9, rng)
    P = c_spectrum(C, T, max_permutations=50, seed=3)
    assert not P.exhaustive
    assert np.max(P.values.real) == pytest.approx(k_c(C, T), abs=1e-9)
    P6 = c_spectrum(C[:6, :6], T[:6, :6])
    assert P6.exhaustive and P6.values.size <= 720


def test_sample_c_numerical_range_examples():
    rng = np.random.default_rng(2)
    T = random_hermitian(3, rng)
    W = sample_c_numerical_range(np.eye(3) / 3, T, 200, seed=1)
    np.testing.assert_allclose(W.values, np.trace(T) / 3, atol=1e-12)
    assert W.sample_count == 200 + 6

    C, T = np.diag([0.5, 0.3, 0.2]), np.diag([1.0, -2.0, 0.4])
    W = sample_c_numerical_range(C, T, 10, seed=2)
    assert as_set(c_spectrum(C, T).values) <= as_set(W.values)

    C, T = random_hermitian(4, rng), random_hermitian(4, rng)
    W = sample_c_numerical_range(C, T, 2000, seed=3)
    assert np.all(np.abs(W.values) <= trace_norm(C) * operator_norm(T) + 1e-9)
    W2 = sample_c_numerical_range(C, T, 2000, seed=3)
    np.testing.assert_array_equal(W.values, W2.values)


def test_k_c_examples():
    assert k_c(np.diag([0.5, 0.3, 0.2]), np.diag([1, 1, 0])) == pytest.approx(0.8)
    assert pairing_oracle([0.5, 0.3, 0.2], [1, 1, 0]) == pytest.approx(0.8)
    assert k_c(np.diag([1, -1]), np.diag([2, -3])) == pytest.approx(5.0)
    assert pairing_oracle([1, -1], [2, -3]) == 5
    assert k_c(random_hermitian(4, np.random.default_rng(3)), np.zeros((4, 4))) == 0.0
    with pytest.raises(NotHermitian):
        k_c(np.array([[0, 1], [0, 0]]), np.eye(2))


def test_k_c_bruteforce_examples():
    assert k_c_bruteforce(np.diag([1, 0]), np.diag([0, 1])) == pytest.approx(1.0)
    assert k_c_bruteforce(np.array([[2.0]]), np.array([[-1.5]])) == pytest.approx(-3.0)
    assert k_c(np.array([[2.0]]), np.array([[-1.5]])) == pytest.approx(-3.0)
    with pytest.raises(TooLarge):
        k_c_bruteforce(np.eye(9), np.eye(9))


def test_k_c_matches_bruteforce_and_samples():
    rng = np.random.default_rng(4)
    for _ in range(60):
        n = int(rng.integers(1, 8))
        C, T = random_hermitian(n, rng), random_hermitian(n, rng)
        K = k_c(C, T)
        assert abs(K - k_c_bruteforce(C, T)) <= 1e-9
        if n <= 5:
            c, t = np.linalg.eigvalsh(C), np.linalg.eigvalsh(T)
            assert abs(K - pairing_oracle(list(c), list(t))) <= 1e-9
        W = sample_c_numerical_range(C, T, 300, seed=int(rng.integers(1 << 30)))
        assert np.all(W.values.real <= K + 1e-9)


def test_parts_formula_agrees_when_kernel_suffices():
    rng = np.random.default_rng(11)
    for _ in range(40):
        n = int(rng.integers(1, 8))
        rho = random_density_matrix(n, rng)
        P = random_density_matrix(n, rng, rank=int(rng.integers(1, n + 1)))
        assert abs(k_c_parts(rho, P) - k_c(rho, P)) <= 1e-9
        T = random_hermitian(n, rng)
        # pad both with n zeros so every entry can meet a zero
        Z = np.zeros((n, n))
        C2 = np.block([[random_hermitian(n, rng), Z], [Z, Z]])
        T2 = np.block([[T, Z], [Z, Z]])
        assert abs(k_c_parts(C2, T2) - k_c(C2, T2)) <= 1e-9
    # without spare kernel the parts formula overshoots the supremum
    assert k_c_parts(np.array([[2.0]]), np.array([[-1.5]])) == 0.0


def test_k_c_unitary_invariance():
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = int(rng.integers(2, 7))
        C, T = random_hermitian(n, rng), random_hermitian(n, rng)
        U = haar_unitary(n, rng)
        assert abs(k_c(C, dag(U) @ T @ U) - k_c(C, T)) <= 1e-9


def test_k_c_of_projector_is_partial_sum():
    rng = np.random.default_rng(6)
    for _ in range(20):
        n = int(rng.integers(1, 9))
        rho = random_density_matrix(n, rng)
        lam = np.sort(np.linalg.eigvalsh(rho))[::-1]
        for k in range(1, n + 1):
            assert k_c(rho, diagonal_projector(k, n)) == pytest.approx(lam[:k].sum(), abs=1e-12)


def test_ando_examples():
    assert ando_majorization_test(np.diag([0.5, 0.5]), np.diag([1.0, 0.0]))
    rho = random_density_matrix(3, np.random.default_rng(7))
    assert ando_majorization_test(rho, rho)
    assert not ando_majorization_test(np.diag([1.0, 0.0]), np.diag([0.5, 0.5]))


def test_ando_agrees_with_partial_sums():
    rng = np.random.default_rng(8)
    for _ in range(200):
        n = int(rng.integers(1, 9))
        rho = random_density_matrix(n, rng, rank=int(rng.integers(1, n + 1)))
        omega = random_density_matrix(n, rng, rank=int(rng.integers(1, n + 1)))
        assert ando_majorization_test(rho, omega) == state_majorizes(rho, omega)


def test_collinear_hull_check_examples():
    rng = np.random.default_rng(9)
    C, T = random_hermitian(3, rng), random_hermitian(3, rng)
    rep = collinear_hull_check(C, T, 2000, seed=1)
    assert rep.inside and rep.max_outside_distance <= 1e-8 * trace_norm(C) * operator_norm(T)
    assert rep.hausdorff >= 0.0

    rep = collinear_hull_check(np.eye(3) / 3, T, 100, seed=1)
    assert rep.max_outside_distance <= 1e-12 and rep.hausdorff <= 1e-12

    with pytest.raises(NotCollinear):
        collinear_hull_check(np.diag([0, 1, 1j]), T, 10)


def test_sampled_range_converges_under_truncation():
    rng = np.random.default_rng(10)
    n = 5
    C = random_density_matrix(n, rng)
    # compact-like T with rapidly decaying spectrum
    Q = haar_unitary(n, rng)
    T = Q @ np.diag(10.0 ** -np.arange(n)) @ dag(Q)
    dists = [sampled_range_distance(C, block_truncate(T, k, Q), T, 500, seed=4)
             for k in range(1, n + 1)]
    assert dists[-1] <= 1e-12
    assert all(b <= a + 1e-12 for a, b in zip(dists, dists[1:]))
