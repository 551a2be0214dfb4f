"""Dense linear-algebra helpers: null spaces, real eigenspaces, definiteness."""

from __future__ import annotations

import numpy as np
import scipy.linalg


def null_space(A: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (columns) of the null space of ``A``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.size == 0:
        return np.eye(A.shape[1])
    return scipy.linalg.null_space(A, rcond=rtol)


def real_eigenvalues(M: np.ndarray, imag_tol: float = 1e-9) -> list:
    """Distinct real eigenvalues of ``M`` (clustered within ``imag_tol`` scale)."""
    vals = np.linalg.eigvals(M)
    radius = max(np.max(np.abs(vals)), 1.0) if vals.size else 1.0
    real = sorted(v.real for v in vals if abs(v.imag) <= imag_tol * radius)
    out = []
    for v in real:
        if not out or abs(v - out[-1]) > 1e-7 * radius:
            out.append(v)
    return out


def eigenspace(M: np.ndarray, mu: float, tol: float) -> np.ndarray:
    """Orthonormal basis of vectors ``z`` with ``|M z - mu z| <= tol``-ish."""
    k = M.shape[0]
    A = M - mu * np.eye(k)
    if k == 0:
        return np.zeros((0, 0))
    U, s, Vt = np.linalg.svd(A)
    keep = s <= tol
    return Vt[keep].T if keep.any() else np.zeros((k, 0))


def definiteness(H: np.ndarray, rtol: float = 1e-10) -> str:
    """Classify a symmetric matrix as PosDef, NegDef, Indefinite or Semi."""
    Hs = 0.5 * (H + H.T)
    ev = np.linalg.eigvalsh(Hs)
    scale = max(np.max(np.abs(ev)), 0.0)
    thr = rtol * scale
    pos = np.sum(ev > thr)
    neg = np.sum(ev < -thr)
    if pos and neg:
        return "Indefinite"
    if pos == len(ev) and pos > 0:
        return "PosDef"
    if neg == len(ev) and neg > 0:
        return "NegDef"
    return "Semi"


def lstsq_pivoted(A: np.ndarray, b: np.ndarray, rtol: float = 1e-12):
    """Basic least-squares solution by column-pivoted QR.

    Returns ``(x, rank)``. Columns beyond the numerical rank get zero weight.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    ncol = A.shape[1]
    if A.shape[0] == 0 or ncol == 0:
        return np.zeros(ncol), 0
    Q, R, piv = scipy.linalg.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > rtol * max(diag[0], 1e-300))) if diag.size else 0
    x = np.zeros(ncol)
    if rank:
        qb = Q[:, :rank].T @ b
        z = scipy.linalg.solve_triangular(R[:rank, :rank], qb)
        x[piv[:rank]] = z
    return x, rank
