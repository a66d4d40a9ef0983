"""Majorization of eigenvalue sequences and density matrices.

Sequences are 1-D float arrays; sequences of different length are compared
after zero-padding the shorter one.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateBlock, LengthMismatch, NotDensityMatrix, NotMajorized
from .linalg import as_matrix, dag, haar_unitaries, hermitian_eig, is_hermitian

DEFAULT_TOL = 1e-9


def _seq(x):
    x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("eigenvalue sequences must be finite and nonnegative")
    return x


def _pad(x, n):
    return np.concatenate([x, np.zeros(n - x.size)]) if x.size < n else x


def decreasing_rearrangement(x):
    x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    return x[np.argsort(-x, kind="stable")]


def check_density(rho, tol=1e-10):
    """Validate ``rho`` as a density matrix and return it as a complex array."""
    rho = as_matrix(rho)
    if not is_hermitian(rho, tol):
        raise NotDensityMatrix("state is not Hermitian")
    w = np.linalg.eigvalsh(0.5 * (rho + dag(rho)))
    if w[0] < -tol:
        raise NotDensityMatrix(f"state has negative eigenvalue {w[0]:.3e}")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise NotDensityMatrix(f"state has trace {np.trace(rho).real!r}")
    return rho


def spectrum(rho):
    """Non-increasing eigenvalues of a state, with tiny negative round-off clipped."""
    return np.clip(hermitian_eig(rho).values, 0.0, None)


def partial_sum_gaps(x, y):
    """``cumsum(y_sorted) - cumsum(x_sorted)`` on the common zero-padded length."""
    x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    y = np.atleast_1d(np.asarray(y, dtype=float)).ravel()
    n = max(x.size, y.size)
    xs = decreasing_rearrangement(_pad(x, n))
    ys = decreasing_rearrangement(_pad(y, n))
    return np.cumsum(ys) - np.cumsum(xs)


def majorizes(x, y, tol=DEFAULT_TOL):
    """True iff ``x`` is majorized by ``y`` (``x < y``), partial sums within ``tol``."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    gaps = partial_sum_gaps(x, y)
    return bool(np.all(gaps >= -tol) and abs(gaps[-1]) <= tol)


def weakly_majorizes(x, y, tol=DEFAULT_TOL):
    """Weak sub-majorization: partial-sum inequalities only, no trace condition."""
    return bool(np.all(partial_sum_gaps(x, y) >= -tol))


def state_majorizes(rho, omega, tol=DEFAULT_TOL):
    """True iff ``rho`` is majorized by ``omega`` (spectra compared)."""
    return majorizes(hermitian_eig(rho).values, hermitian_eig(omega).values, tol)


def submajorization_functional(c, x):
    """``sum_j c_j x_j`` with ``x`` sorted non-increasing; ``c`` must be sorted too."""
    c = np.atleast_1d(np.asarray(c, dtype=float)).ravel()
    if np.any(c < 0) or np.any(np.diff(c) > 0):
        raise ValueError("weights must be nonnegative and non-increasing")
    x = decreasing_rearrangement(np.asarray(x, dtype=float))
    n = max(c.size, x.size)
    return float(np.dot(_pad(c, n), _pad(x, n)))


def _plane_rotation(A, j, k, target):
    """Unitary acting on coordinates ``j, k`` that sets ``(G A G^dag)_jj = target``.

    ``target`` must lie between ``A_kk`` and ``A_jj``. The phase of the rotation
    is chosen so the off-diagonal entry ``A_jk`` does not feed the new diagonal.
    """
    a, c, b = A[j, j].real, A[k, k].real, A[j, k]
    cos2 = 1.0 if a == c else min(1.0, max(0.0, (target - c) / (a - c)))
    cs, sn = math.sqrt(cos2), math.sqrt(1.0 - cos2)
    w = 1j * b / abs(b) if abs(b) > 0 else 1.0
    G = np.eye(A.shape[0], dtype=complex)
    G[j, j], G[j, k] = cs, sn * w
    G[k, j], G[k, k] = -sn * np.conj(w), cs
    return G


def schur_horn_unitary(x, y, tol=DEFAULT_TOL):
    """Unitary ``U`` such that ``U diag(y) U^dag`` has diagonal ``x``.

    Requires ``x < y``. Built from at most ``n - 1`` plane rotations, each
    realizing one T-transform that matches one more diagonal entry to ``x``.
    """
    x, y = _seq(x), _seq(y)
    if x.size != y.size:
        raise LengthMismatch(f"lengths differ: {x.size} vs {y.size}")
    if not majorizes(x, y, tol):
        raise NotMajorized("x is not majorized by y")
    n = x.size
    px = np.argsort(-x, kind="stable")
    py = np.argsort(-y, kind="stable")
    xs, ys = x[px], y[py]

    A = np.diag(ys).astype(complex)
    U = np.eye(n, dtype=complex)
    d = ys.copy()
    eps = 1e-15 * max(1.0, float(ys[0]) if n else 1.0)
    for _ in range(n):
        diff = d - xs
        above = np.nonzero(diff > eps)[0]
        if above.size == 0:
            break
        j = int(above[-1])
        below = np.nonzero(diff[j + 1:] < -eps)[0]
        if below.size == 0:
            break
        k = j + 1 + int(below[0])
        up, down = d[j] - xs[j], xs[k] - d[k]
        delta = min(up, down)
        G = _plane_rotation(A, j, k, d[j] - delta)
        A = G @ A @ dag(G)
        U = G @ U
        if up <= down:
            d[k] += delta
            d[j] = xs[j]
        else:
            d[j] -= delta
            d[k] = xs[k]

    Sx = np.zeros((n, n))
    Sx[np.arange(n), px] = 1.0
    Sy = np.zeros((n, n))
    Sy[np.arange(n), py] = 1.0
    return Sx.T @ U @ Sy


@dataclass(frozen=True)
class PaddedPair:
    x_hat: np.ndarray
    y_hat: np.ndarray
    scale: float
    fill_value: float
    fill_count: int
    k: int  # 1-based position of the smallest nonzero entry among the first N of x
    phi: float
    N: int


def pad_and_match(x, y, N, tol=DEFAULT_TOL):
    """Truncate ``x, y`` to ``N`` entries and refill ``x`` so the sums match again.

    The mass ``phi`` that ``x`` loses relative to ``y`` on the first ``N``
    entries is spread as ``m`` equal entries ``phi/m`` right after the smallest
    nonzero entry ``x_k``, with ``m = ceil(phi / x_k)``.
    """
    x, y = _seq(x), _seq(y)
    if not majorizes(x, y, tol):
        raise NotMajorized("x is not majorized by y")
    n = max(x.size, y.size, N)
    xs = decreasing_rearrangement(_pad(x, n))
    ys = decreasing_rearrangement(_pad(y, n))
    head_x, head_y = xs[:N], ys[:N]
    nonzero = np.nonzero(head_x > 0)[0]
    if nonzero.size == 0:
        raise DegenerateBlock("all leading entries of x vanish")
    k = int(nonzero[-1]) + 1
    phi = float(np.sum(head_y) - np.sum(head_x))
    if phi < -tol:
        raise NotMajorized("leading block of x carries more mass than y")
    if phi <= 1e-14 * max(1.0, float(np.sum(head_y))):
        phi = 0.0  # round-off, not mass to refill
    m = 0 if phi == 0.0 else max(1, math.ceil(phi / head_x[k - 1] - 1e-12))
    fill = phi / m if m else 0.0
    x_hat = np.concatenate([head_x[:k], np.full(m, fill)])
    return PaddedPair(
        x_hat=x_hat,
        y_hat=head_y.copy(),
        scale=float(np.sum(head_y)),
        fill_value=fill,
        fill_count=m,
        k=k,
        phi=phi,
        N=int(N),
    )


def random_bistochastic_step(rho, rng):
    """One mixture of two Haar-random unitary conjugations."""
    U = haar_unitaries(rho.shape[0], 2, rng)
    p = rng.dirichlet([1.0, 1.0])
    return p[0] * U[0] @ rho @ dag(U[0]) + p[1] * U[1] @ rho @ dag(U[1])


def random_majorized_state(omega, steps, seed):
    """A state majorized by ``omega``: ``steps`` random mixed-unitary channels applied to it."""
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    rho = as_matrix(omega).copy()
    rng = np.random.default_rng(seed)
    for _ in range(steps):
        rho = random_bistochastic_step(rho, rng)
    return 0.5 * (rho + dag(rho))
