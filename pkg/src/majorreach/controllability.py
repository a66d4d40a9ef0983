"""Finite-dimensional controllability certificates for the closed system."""
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import BudgetExceeded, NotAntiHermitian
from .linalg import as_matrix, dag, hermitian_eig, operator_norm

LIE_TOL = 1e-8


class DegenerateSpectrumWarning(UserWarning):
    pass


@dataclass(frozen=True)
class LieClosureReport:
    dimension: int
    target_dimension: int
    basis_residuals: np.ndarray
    iterations: int
    controllable: bool


@dataclass(frozen=True)
class TransitionGraph:
    nodes: list
    edges: list
    connected: bool
    degenerate: bool


def _realvec(X):
    return np.concatenate([X.real.ravel(), X.imag.ravel()])


def lie_closure_dim(generators, tol=LIE_TOL, max_elements=None):
    """Dimension of the real Lie algebra generated by anti-Hermitian matrices.

    Commutators are generated breadth-first and orthonormalized against the
    working basis in the Hilbert-Schmidt inner product ``Re tr(A^dag B)``.
    """
    gens = [as_matrix(G) for G in generators]
    if not gens:
        raise ValueError("need at least one generator")
    n = gens[0].shape[0]
    for G in gens:
        if G.shape != (n, n):
            raise ValueError("generators must share one dimension")
        if operator_norm(G + dag(G)) > 1e-10 * max(1.0, operator_norm(G)):
            raise NotAntiHermitian("generator is not anti-Hermitian")
    if max_elements is None:
        max_elements = n * n
    if max_elements < n * n:
        raise ValueError("max_elements must be at least n^2")
    traceless = all(abs(np.trace(G)) <= 1e-10 * max(1.0, operator_norm(G)) for G in gens)
    target = n * n - 1 if traceless else n * n

    basis = []       # orthonormal elements as matrices
    rows = []        # same elements as real vectors
    residuals = []

    def add(X):
        x = _realvec(X)
        if rows:
            B = np.array(rows)
            x = x - B.T @ (B @ x)
            x = x - B.T @ (B @ x)
        r = float(np.linalg.norm(x))
        if r <= tol:
            return False
        if len(rows) >= max_elements:
            raise BudgetExceeded("Lie basis still growing at max_elements")
        x = x / r
        rows.append(x)
        m = x.size // 2
        basis.append((x[:m] + 1j * x[m:]).reshape(n, n))
        residuals.append(r)
        return True

    for G in gens:
        nG = np.linalg.norm(G)
        if nG > 0:
            add(G / nG)

    iterations = 0
    i = 0
    while i < len(basis) and len(basis) < target:
        A = basis[i]
        for j in range(i):
            iterations += 1
            B = basis[j]
            add(A @ B - B @ A)
            if len(basis) >= target:
                break
        i += 1

    dim = len(basis)
    return LieClosureReport(
        dimension=dim,
        target_dimension=target,
        basis_residuals=np.array(residuals),
        iterations=iterations,
        controllable=dim == target,
    )


def system_lie_report(system, **kwargs):
    gens = [-1j * system.H0] + [-1j * H for H in system.controls]
    return lie_closure_dim(gens, **kwargs)


def gap_nondegenerate(H0, threshold=1e-8):
    """Pairwise eigenvalue gaps of ``H0`` all exceed ``threshold``.

    Rational independence of the spectrum cannot be decided in floating point;
    only this weaker condition is checked.
    """
    w = hermitian_eig(H0).values
    return bool(w.size < 2 or np.min(np.abs(np.diff(w))) > threshold)


def connectivity_graph(H0, controls, threshold=1e-8):
    """Graph on the eigenbasis of ``H0``: ``(k, l)`` is an edge if some control couples them."""
    w, Phi = hermitian_eig(H0)
    n = w.size
    degenerate = not gap_nondegenerate(H0, threshold)
    if degenerate:
        warnings.warn("drift spectrum is degenerate; graph depends on the eigenbasis choice",
                      DegenerateSpectrumWarning, stacklevel=2)
    adj = np.zeros((n, n), dtype=bool)
    for H in controls:
        M = dag(Phi) @ as_matrix(H) @ Phi
        adj |= np.abs(M) > threshold
    np.fill_diagonal(adj, False)
    adj |= adj.T
    edges = [(k, l) for k in range(n) for l in range(k + 1, n) if adj[k, l]]
    ncomp, _ = connected_components(adj, directed=False)
    return TransitionGraph(nodes=list(range(n)), edges=edges, connected=ncomp == 1,
                           degenerate=degenerate)
