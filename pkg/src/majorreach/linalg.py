"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays of complex dtype. Vectorization follows the
column-stacking convention ``vec(A X B) = (B.T kron A) vec(X)``.
"""
from typing import NamedTuple

import numpy as np

from .errors import BadRank, EmptySet, NotHermitian, NotUnitary

HERMITIAN_RTOL = 1e-10
UNITARY_TOL = 1e-10


class HermitianEig(NamedTuple):
    values: np.ndarray   # real, non-increasing
    vectors: np.ndarray  # unitary, columns are eigenvectors


def dag(M):
    return np.conj(np.swapaxes(M, -1, -2))


def as_matrix(M):
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def vec(X):
    return np.asarray(X).reshape(-1, order="F")


def unvec(x, n):
    return np.asarray(x).reshape((n, n), order="F")


def singular_values(M):
    return np.linalg.svd(np.asarray(M, dtype=complex), compute_uv=False)


def trace_norm(M):
    """Sum of singular values, ``tr sqrt(M^dag M)``."""
    return float(np.sum(singular_values(M)))


def operator_norm(M):
    s = singular_values(M)
    return float(s[0]) if s.size else 0.0


def is_hermitian(M, rtol=HERMITIAN_RTOL):
    M = np.asarray(M, dtype=complex)
    scale = max(1.0, operator_norm(M))
    return operator_norm(M - dag(M)) <= rtol * scale


def is_unitary(U, tol=UNITARY_TOL):
    U = np.asarray(U, dtype=complex)
    return operator_norm(dag(U) @ U - np.eye(U.shape[0])) <= tol


def hermitian_eig(M):
    """Eigendecomposition of a Hermitian matrix, eigenvalues non-increasing.

    All ``n`` eigenvalues are returned, zeros included. Ties keep the order in
    which the solver emitted them.
    """
    M = as_matrix(M)
    if not is_hermitian(M):
        raise NotHermitian("matrix is not Hermitian within tolerance")
    H = 0.5 * (M + dag(M))
    w, Q = np.linalg.eigh(H)
    order = np.argsort(-w, kind="stable")
    return HermitianEig(w[order], Q[:, order])


def positive_parts(M):
    """Split Hermitian ``M`` into PSD parts with ``M = P - N`` and ``P N = 0``."""
    w, Q = hermitian_eig(M)
    pos = Q @ np.diag(np.clip(w, 0.0, None)) @ dag(Q)
    neg = Q @ np.diag(np.clip(-w, 0.0, None)) @ dag(Q)
    return pos, neg


def block_projector(k, basis):
    P = np.asarray(basis, dtype=complex)[:, :k]
    return P @ dag(P)


def block_truncate(C, k, basis=None):
    """Compress ``C`` to the span of the first ``k`` columns of ``basis``."""
    C = as_matrix(C)
    n = C.shape[0]
    if basis is None:
        basis = np.eye(n, dtype=complex)
    basis = np.asarray(basis, dtype=complex)
    if basis.shape != (n, n):
        raise ValueError("basis must match the matrix dimension")
    if not 1 <= k <= n:
        raise BadRank(f"k={k} outside 1..{n}")
    if not is_unitary(basis):
        raise NotUnitary("basis is not unitary")
    Pi = block_projector(k, basis)
    return Pi @ C @ Pi


def block_tail_errors(C, basis=None):
    """``errors[k-1] = ||C - Pi_k C Pi_k||_1`` for ``k = 1..n``."""
    C = as_matrix(C)
    n = C.shape[0]
    if basis is None:
        basis = np.eye(n, dtype=complex)
    # work in the basis so that Pi_k is a leading principal block
    X = dag(basis) @ C @ basis
    errs = np.empty(n)
    for k in range(1, n + 1):
        R = X.copy()
        R[:k, :k] = 0.0
        errs[k - 1] = trace_norm(R)
    errs[-1] = 0.0
    return errs


def minimal_block(C, tol, basis=None):
    """Smallest ``N`` with ``||C - Pi_k C Pi_k||_1 < tol`` for every ``k >= N``."""
    errs = block_tail_errors(C, basis)
    bad = np.nonzero(errs >= tol)[0]
    return int(bad[-1]) + 2 if bad.size else 1


def _points(A):
    return np.atleast_1d(np.asarray(A, dtype=complex)).ravel()


def directed_hausdorff(A, B):
    A, B = _points(A), _points(B)
    if A.size == 0 or B.size == 0:
        raise EmptySet("Hausdorff distance needs non-empty point sets")
    d = np.abs(A[:, None] - B[None, :])
    return float(d.min(axis=1).max())


def hausdorff_distance(A, B):
    """Hausdorff distance between two finite point sets in the complex plane."""
    return max(directed_hausdorff(A, B), directed_hausdorff(B, A))


def haar_unitaries(n, size, rng):
    """``size`` Haar-distributed ``n x n`` unitaries (QR of complex Ginibre)."""
    Z = (rng.standard_normal((size, n, n)) + 1j * rng.standard_normal((size, n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R, axis1=-2, axis2=-1)
    ph = d / np.abs(d)
    return Q * ph[:, None, :]


def haar_unitary(n, rng):
    return haar_unitaries(n, 1, rng)[0]


def random_hermitian(n, rng, scale=1.0):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * 0.5 * (A + dag(A))


def random_density_matrix(n, rng, rank=None):
    """Trace-one PSD matrix from a complex Ginibre ``n x rank`` factor."""
    rank = n if rank is None else rank
    G = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    rho = G @ dag(G)
    return rho / np.trace(rho).real


def is_identity_up_to_phase(U, tol=1e-12):
    U = np.asarray(U, dtype=complex)
    ph = np.trace(U) / U.shape[0]
    if abs(ph) < 0.5:
        return False
    ph /= abs(ph)
    return operator_norm(U - ph * np.eye(U.shape[0])) <= tol
