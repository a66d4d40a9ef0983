"""C-spectrum, sampled C-numerical range and the trace supremum K_C(T)."""
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg
from shapely.geometry import MultiPoint, Point

from .errors import NotCollinear, NotHermitian, NotNormal, TooLarge
from .linalg import (
    as_matrix,
    dag,
    haar_unitaries,
    hausdorff_distance,
    hermitian_eig,
    is_hermitian,
    operator_norm,
    positive_parts,
    trace_norm,
)

DEFAULT_MAX_PERMUTATIONS = 5040
BRUTEFORCE_MAX_DIM = 8


@dataclass(frozen=True)
class CSpectrum:
    values: np.ndarray  # complex points
    exhaustive: bool


@dataclass(frozen=True)
class CRangeSample:
    values: np.ndarray  # complex points tr(C U^dag T U)
    sample_count: int
    seed: int


@dataclass(frozen=True)
class HullReport:
    max_outside_distance: float
    bound: float
    inside: bool
    hausdorff: float
    sample_count: int


def is_normal(M, rtol=1e-10):
    M = np.asarray(M, dtype=complex)
    scale = max(1.0, operator_norm(M) ** 2)
    return operator_norm(M @ dag(M) - dag(M) @ M) <= rtol * scale


def normal_eigvals(M):
    """Eigenvalues of a normal matrix via the complex Schur form."""
    M = as_matrix(M)
    if not is_normal(M):
        raise NotNormal("matrix is not normal")
    T, _ = scipy.linalg.schur(M, output="complex")
    return np.diag(T).copy()


@lru_cache(maxsize=16)
def _all_permutations(n):
    return np.array(list(itertools.permutations(range(n))), dtype=np.intp)


def _unique_points(z, decimals=12):
    z = np.asarray(z, dtype=complex)
    keys = np.round(z.real, decimals) + 1j * np.round(z.imag, decimals)
    _, idx = np.unique(keys, return_index=True)
    return z[np.sort(idx)]


def _pairing_permutations(n, max_permutations, seed, order_c, order_t):
    if math.factorial(n) <= max_permutations:
        return _all_permutations(n), True
    rng = np.random.default_rng(seed)
    perms = [np.arange(n)]
    # sorted and antisorted pairings
    sorted_pairing = np.empty(n, dtype=np.intp)
    sorted_pairing[order_c] = order_t
    anti_pairing = np.empty(n, dtype=np.intp)
    anti_pairing[order_c] = order_t[::-1]
    perms += [sorted_pairing, anti_pairing]
    perms += [rng.permutation(n) for _ in range(max_permutations)]
    return np.array(perms), False


def c_spectrum(C, T, max_permutations=DEFAULT_MAX_PERMUTATIONS, seed=0):
    """Points ``sum_j c_j t_sigma(j)`` over eigenvalue pairings ``sigma``."""
    c = normal_eigvals(C)
    t = normal_eigvals(T)
    if c.size != t.size:
        raise ValueError("C and T must have the same dimension")
    n = c.size
    order_c = np.lexsort((-c.imag, -c.real))
    order_t = np.lexsort((-t.imag, -t.real))
    perms, exhaustive = _pairing_permutations(n, max_permutations, seed, order_c, order_t)
    values = t[perms] @ c
    return CSpectrum(_unique_points(values), exhaustive)


def c_numerical_values(C, T, unitaries):
    """``tr(C U^dag T U)`` for a stack of unitaries."""
    C = np.asarray(C, dtype=complex)
    T = np.asarray(T, dtype=complex)
    UTU = dag(unitaries) @ T @ unitaries
    return np.einsum("ij,kji->k", C, UTU)


def sample_c_numerical_range(C, T, samples, seed, max_permutations=DEFAULT_MAX_PERMUTATIONS):
    """Haar samples of ``tr(C U^dag T U)``, plus all permutation matrices up to the cap."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    C, T = as_matrix(C), as_matrix(T)
    n = C.shape[0]
    rng = np.random.default_rng(seed)
    chunks = []
    for start in range(0, samples, 4096):
        U = haar_unitaries(n, min(4096, samples - start), rng)
        chunks.append(c_numerical_values(C, T, U))
    count = min(math.factorial(n), max_permutations)
    perms = itertools.islice(itertools.permutations(range(n)), count)
    P = np.zeros((count, n, n), dtype=complex)
    for i, p in enumerate(perms):
        P[i, list(p), np.arange(n)] = 1.0
    chunks.append(c_numerical_values(C, T, P))
    return CRangeSample(np.concatenate(chunks), samples + count, seed)


def _require_hermitian(*mats):
    out = []
    for M in mats:
        M = as_matrix(M)
        if not is_hermitian(M):
            raise NotHermitian("input is not Hermitian")
        out.append(M)
    return out


def k_c(C, T):
    """``sup_U tr(C U^dag T U)`` for Hermitian ``C, T`` in closed form.

    In dimension n the supremum pairs the full decreasing spectra. When both
    operators have enough kernel this equals pairing the decreasing spectra of
    the positive parts plus those of the negative parts.
    """
    C, T = _require_hermitian(C, T)
    return float(hermitian_eig(C).values @ hermitian_eig(T).values)


def k_c_parts(C, T):
    """Positive parts paired with positive parts, negative with negative.

    Equals :func:`k_c` whenever zero eigenvalues are available to absorb the
    unpaired entries, e.g. when both are positive semi-definite.
    """
    C, T = _require_hermitian(C, T)
    Cp, Cm = positive_parts(C)
    Tp, Tm = positive_parts(T)

    def ev(M):
        return np.clip(hermitian_eig(M).values, 0.0, None)

    return float(ev(Cp) @ ev(Tp) + ev(Cm) @ ev(Tm))


def k_c_bruteforce(C, T):
    """Max over all ``n!`` eigenvalue pairings; the oracle for :func:`k_c`."""
    C, T = _require_hermitian(C, T)
    n = C.shape[0]
    if n > BRUTEFORCE_MAX_DIM:
        raise TooLarge(f"brute force limited to n <= {BRUTEFORCE_MAX_DIM}")
    c = hermitian_eig(C).values
    t = hermitian_eig(T).values
    return float(np.max(t[_all_permutations(n)] @ c))


def diagonal_projector(k, n):
    P = np.zeros((n, n), dtype=complex)
    P[np.arange(k), np.arange(k)] = 1.0
    return P


def ando_majorization_test(rho, omega, tol=1e-9):
    """Majorization via ``K_rho(Pi_k) <= K_omega(Pi_k)`` for all ranks ``k``."""
    rho, omega = _require_hermitian(rho, omega)
    n = rho.shape[0]
    if abs(np.trace(rho).real - np.trace(omega).real) > tol:
        return False
    for k in range(1, n + 1):
        P = diagonal_projector(k, n)
        if k_c(rho, P) > k_c(omega, P) + tol:
            return False
    return True


def collinearity_residual(z):
    """Distance spread of points ``z`` off their best-fit affine line."""
    pts = np.column_stack([np.real(z), np.imag(z)])
    pts = pts - pts.mean(axis=0)
    if pts.shape[0] < 3:
        return 0.0
    s = np.linalg.svd(pts, compute_uv=False)
    return float(s[-1])


def _hull(z):
    return MultiPoint([(p.real, p.imag) for p in np.asarray(z)]).convex_hull


def _hull_vertices(geom):
    if geom.geom_type == "Polygon":
        xy = np.asarray(geom.exterior.coords)
    else:
        xy = np.asarray(geom.coords)
    return xy[:, 0] + 1j * xy[:, 1]


def convex_hausdorff(A, B):
    """Hausdorff distance between the convex hulls of two finite point sets."""
    HA, HB = _hull(A), _hull(B)
    d1 = max(HB.distance(Point(p.real, p.imag)) for p in _hull_vertices(HA))
    d2 = max(HA.distance(Point(p.real, p.imag)) for p in _hull_vertices(HB))
    return float(max(d1, d2))


def collinear_hull_check(C, T, samples, tol=1e-8, seed=0):
    """Check sampled ``W_C(T)`` against ``conv(P_C(T))`` for ``C`` with collinear spectrum."""
    C, T = as_matrix(C), as_matrix(T)
    c = normal_eigvals(C)
    normal_eigvals(T)
    if collinearity_residual(c) > 1e-9 * max(trace_norm(C), 1e-300):
        raise NotCollinear("eigenvalues of C are not collinear")
    P = c_spectrum(C, T, seed=seed).values
    W = sample_c_numerical_range(C, T, samples, seed).values
    hull = _hull(P)
    outside = max(hull.distance(Point(w.real, w.imag)) for w in _hull_vertices(_hull(W)))
    bound = tol * trace_norm(C) * operator_norm(T)
    return HullReport(
        max_outside_distance=float(outside),
        bound=float(bound),
        inside=bool(outside <= bound),
        hausdorff=convex_hausdorff(W, P),
        sample_count=int(W.size),
    )


def sampled_range_distance(C, T, S, samples, seed):
    """Hausdorff distance between sampled ranges of ``T`` and ``S`` (shared seed)."""
    a = sample_c_numerical_range(C, T, samples, seed).values
    b = sample_c_numerical_range(C, S, samples, seed).values
    return hausdorff_distance(a, b)
