"""GKSL generator with one switchable normal noise term.

Generator: ``L_gamma(rho) = -i[H, rho] - gamma * Gamma_V(rho)`` with
``Gamma_V(X) = (V^dag V X + X V^dag V)/2 - V X V^dag`` and ``gamma in {0, 1}``.

Superoperators act on column-stacked matrices, ``vec(A X B) = (B.T kron A) vec(X)``.
"""
import logging
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NotHermitian, NotNormal, ZeroNoise
from .linalg import as_matrix, dag, is_hermitian, operator_norm, trace_norm, unvec, vec

logger = logging.getLogger(__name__)

NORMAL_RTOL = 1e-10
PSD_FLOOR = -1e-8


class StateDiagnosticWarning(UserWarning):
    """A propagated state left the density-matrix tolerances."""


@dataclass(frozen=True, eq=False)
class NoiseOperator:
    V: np.ndarray
    f: np.ndarray    # unitary, columns are eigenvectors of V
    v: np.ndarray    # eigenvalues, non-increasing modulus
    mu: np.ndarray   # mu[j, k] = |v_j - v_k|^2 / 2 - i Im(v_j conj(v_k))

    @property
    def dim(self):
        return self.V.shape[0]

    def to_basis(self, X):
        return dag(self.f) @ X @ self.f

    def from_basis(self, Y):
        return self.f @ Y @ dag(self.f)


def noise_rates(v):
    v = np.asarray(v, dtype=complex)
    diff = v[:, None] - v[None, :]
    return 0.5 * np.abs(diff) ** 2 - 1j * np.imag(v[:, None] * np.conj(v)[None, :])


def is_normal_noise(V):
    nv = operator_norm(V)
    return operator_norm(dag(V) @ V - V @ dag(V)) <= NORMAL_RTOL * nv ** 2


def make_noise(V):
    """Diagonalize a normal noise operator and tabulate its generator eigenvalues.

    Eigenvalues are ordered by non-increasing modulus; ties keep Schur order.
    """
    V = as_matrix(V)
    if operator_norm(V) == 0.0:
        raise ZeroNoise("noise operator vanishes")
    if not is_normal_noise(V):
        raise NotNormal("noise operator is not normal")
    T, Z = scipy.linalg.schur(V, output="complex")
    v = np.diag(T).copy()
    order = np.argsort(-np.abs(v), kind="stable")
    v, f = v[order], Z[:, order]
    mu = noise_rates(v)
    np.fill_diagonal(mu, 0.0)
    return NoiseOperator(V=V, f=f, v=v, mu=mu)


def apply_noise(X, noise, t):
    """Closed-form ``exp(-t Gamma_V)(X)``: entry ``(j, k)`` in the eigenbasis gets ``exp(-t mu_jk)``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return np.array(X, dtype=complex)
    Y = noise.to_basis(np.asarray(X, dtype=complex))
    return noise.from_basis(Y * np.exp(-t * noise.mu))


def gamma_of(V, X):
    """``Gamma_V(X)``."""
    VdV = dag(V) @ V
    return 0.5 * (VdV @ X + X @ VdV) - V @ X @ dag(V)


def verify_unitality(V):
    """``(is_unital, ||Gamma_V(1)||_1)``; ``Gamma_V(1) = V^dag V - V V^dag``."""
    V = np.asarray(V, dtype=complex)
    resid = trace_norm(dag(V) @ V - V @ dag(V))
    return resid <= 1e-10 * trace_norm(V) ** 2, resid


@dataclass(eq=False)
class ControlSystem:
    """Drift ``H0``, control Hamiltonians and the switchable noise operator ``V``."""

    H0: np.ndarray
    controls: list = field(default_factory=list)
    V: np.ndarray = None

    def __post_init__(self):
        self.H0 = as_matrix(self.H0)
        n = self.H0.shape[0]
        self.controls = [as_matrix(H) for H in self.controls]
        self.V = np.zeros((n, n), dtype=complex) if self.V is None else as_matrix(self.V)
        for H in [self.H0, *self.controls]:
            if H.shape != (n, n):
                raise DimensionMismatch("all operators must share one dimension")
            if not is_hermitian(H):
                raise NotHermitian("drift and control Hamiltonians must be Hermitian")
        if self.V.shape != (n, n):
            raise DimensionMismatch("noise operator has the wrong dimension")

    @property
    def dim(self):
        return self.H0.shape[0]

    @cached_property
    def noise(self):
        return make_noise(self.V)

    def hamiltonian(self, u=()):
        u = np.asarray(u, dtype=float).ravel()
        if u.size not in (0, len(self.controls)):
            raise DimensionMismatch(f"expected {len(self.controls)} control values, got {u.size}")
        H = self.H0.copy()
        for uj, Hj in zip(u, self.controls):
            H = H + uj * Hj
        return H


def commutator_superop(H):
    n = H.shape[0]
    I = np.eye(n)
    return np.kron(I, H) - np.kron(H.T, I)


def noise_superop(V):
    """Matrix of ``-Gamma_V``."""
    V = np.asarray(V, dtype=complex)
    n = V.shape[0]
    I = np.eye(n)
    VdV = dag(V) @ V
    return np.kron(V.conj(), V) - 0.5 * (np.kron(I, VdV) + np.kron(VdV.T, I))


def gksl_superop(system, u=(), gamma=1):
    """Matrix of ``rho -> -i[H(u), rho] - gamma Gamma_V(rho)``."""
    if gamma not in (0, 1):
        raise ValueError("gamma must be 0 or 1")
    L = -1j * commutator_superop(system.hamiltonian(u))
    if gamma:
        L = L + noise_superop(system.V)
    return L


def unitary_superop(U):
    return np.kron(U.conj(), U)


def _diagnose(rho, where):
    tr = np.trace(rho).real
    wmin = np.linalg.eigvalsh(0.5 * (rho + dag(rho)))[0]
    if abs(tr - 1.0) > 1e-8 or wmin < PSD_FLOOR:
        warnings.warn(
            f"{where}: trace {tr:.12g}, min eigenvalue {wmin:.3e}",
            StateDiagnosticWarning,
            stacklevel=3,
        )


def propagate(rho, system, u=(), gamma=1, t=1.0):
    """``exp(t L)(rho)`` through the dense superoperator exponential."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    rho = as_matrix(rho)
    n = system.dim
    if rho.shape != (n, n):
        raise DimensionMismatch("state dimension does not match the system")
    if t == 0:
        return rho.copy()
    out = unvec(scipy.linalg.expm(t * gksl_superop(system, u, gamma)) @ vec(rho), n)
    _diagnose(out, "propagate")
    return out


def trotter_superop(system, t, slices):
    """``(Ad_{exp(i t H0/s)} o exp(t L_1 / s))^s`` with ``L_1`` the noisy drift generator."""
    if slices < 1:
        raise ValueError("slices must be >= 1")
    n = system.dim
    if t == 0:
        return np.eye(n * n, dtype=complex)
    back = unitary_superop(scipy.linalg.expm(1j * t * system.H0 / slices))
    drift = scipy.linalg.expm((t / slices) * gksl_superop(system, gamma=1))
    return np.linalg.matrix_power(back @ drift, slices)


def trotter_noise(rho, system, t, slices):
    """Pure noise for time ``t`` built from backward free evolution and noisy drift.

    Returns the approximate state and its trace-norm deviation from the closed form.
    """
    rho = as_matrix(rho)
    n = system.dim
    out = unvec(trotter_superop(system, t, slices) @ vec(rho), n)
    dev = trace_norm(out - apply_noise(rho, system.noise, t))
    return out, dev


def generator_spectrum_check(noise):
    """Max residual of ``-Gamma_V vec(E_jk) = -mu_jk vec(E_jk)`` over matrix units in the eigenbasis."""
    L = noise_superop(noise.V)
    n = noise.dim
    worst = 0.0
    for j in range(n):
        for k in range(n):
            E = np.outer(noise.f[:, j], noise.f[:, k].conj())
            r = L @ vec(E) + noise.mu[j, k] * vec(E)
            worst = max(worst, float(np.linalg.norm(r)))
    return worst
