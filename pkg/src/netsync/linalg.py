"""Dense matrix kernel: row normalization, skew projection, norms.

Everything operates on plain numpy float arrays.  A "stochastic matrix"
is an ndarray validated by is_stochastic (nonnegative, unit row sums
within 1e-12); a projection basis is a small frozen dataclass pairing P
with a precomputed right inverse.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    DimensionTooSmallError,
    InvalidParamsError,
    NegativeEntryError,
    NotRowSumConstantError,
    UnknownParameterError,
    ZeroRowError,
)

ROW_SUM_TOL = 1e-12
PROJECT_ROW_SUM_TOL = 1e-9


def _as_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise InvalidParamsError(f"expected a 2-d array, got ndim={A.ndim}")
    if not np.all(np.isfinite(A)):
        raise InvalidParamsError("matrix has non-finite entries")
    return A


def is_stochastic(G, tol: float = ROW_SUM_TOL) -> bool:
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        return False
    if not np.all(np.isfinite(G)) or np.min(G) < -tol:
        return False
    return bool(np.max(np.abs(G.sum(axis=1) - 1.0)) <= tol)


def make_stochastic(raw) -> np.ndarray:
    """Row-normalize a nonnegative square matrix.

    Returns the input (copied) untouched when it already satisfies the
    stochastic invariants, which makes the operation exactly idempotent.
    """
    A = _as_matrix(raw)
    if A.shape[0] != A.shape[1]:
        raise InvalidParamsError(f"matrix must be square, got shape {A.shape}")
    neg = np.argwhere(A < 0)
    if neg.size:
        i, j = map(int, neg[0])
        raise NegativeEntryError(i, j, float(A[i, j]))
    if is_stochastic(A):
        return A.copy()
    sums = A.sum(axis=1)
    zero = np.flatnonzero(sums == 0)
    if zero.size:
        raise ZeroRowError(int(zero[0]))
    return A / sums[:, None]


@dataclass(frozen=True)
class ProjectionBasis:
    """A rank m-1 matrix P annihilating the all-ones direction, plus a
    right inverse Pplus with P @ Pplus = I."""

    m: int
    kind: str
    P: np.ndarray
    Pplus: np.ndarray


def projection_basis(m: int, kind: str = "difference") -> ProjectionBasis:
    if m < 2:
        raise DimensionTooSmallError(f"need m >= 2, got {m}")
    D = np.zeros((m - 1, m))
    idx = np.arange(m - 1)
    D[idx, idx] = 1.0
    D[idx, idx + 1] = -1.0
    if kind == "difference":
        # right inverse in closed form: column k is the cumulative
        # indicator (1,...,1,0,...,0) with k+1 leading ones
        Pplus = np.triu(np.ones((m, m - 1)))
        return ProjectionBasis(m, kind, D, Pplus)
    if kind == "orthonormal":
        Q, R = np.linalg.qr(D.T)
        Q = Q * np.sign(np.diag(R))
        P = Q.T
        return ProjectionBasis(m, kind, P, P.T.copy())
    raise UnknownParameterError(f"unknown basis kind {kind!r}")


def project(L, basis: ProjectionBasis) -> np.ndarray:
    """Compress L to the (m-1)-dimensional complement of the all-ones
    direction: the unique Lhat with P L = Lhat P, valid whenever L has
    constant row sums."""
    L = _as_matrix(L)
    m = basis.m
    if L.shape != (m, m):
        raise DimensionMismatchError(f"expected shape ({m},{m}), got {L.shape}")
    sums = L.sum(axis=1)
    spread = float(sums.max() - sums.min())
    scale = max(1.0, float(np.max(np.abs(L).sum(axis=1))))
    if spread > PROJECT_ROW_SUM_TOL * scale:
        raise NotRowSumConstantError(
            f"row sums vary by {spread:.3e} (tol {PROJECT_ROW_SUM_TOL:.0e} x {scale:.3e})"
        )
    return basis.P @ L @ basis.Pplus


def matrix_norm(M, kind: str = "inf") -> float:
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    if kind == "inf":
        return float(np.max(np.abs(M).sum(axis=1))) if M.size else 0.0
    if kind == "one":
        return float(np.max(np.abs(M).sum(axis=0))) if M.size else 0.0
    if kind == "two":
        return _two_norm_power(M)
    raise UnknownParameterError(f"unknown norm kind {kind!r}")


def _two_norm_power(M: np.ndarray, rel_tol: float = 1e-10, max_iter: int = 50_000) -> float:
    """Largest singular value by power iteration on M^T M."""
    if M.size == 0:
        return 0.0
    B = M.T @ M
    n = B.shape[0]
    # deterministic start with a small tilt so we are not orthogonal
    # to the dominant eigenvector by symmetry
    v = np.ones(n) + 1e-3 * np.arange(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = B @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        new = float(v @ (B @ v))
        if abs(new - lam) <= rel_tol * max(abs(new), 1e-30):
            lam = new
            break
        lam = new
    return float(np.sqrt(max(lam, 0.0)))


def spectral_radius(M) -> float:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidParamsError(f"spectral radius needs a square matrix, got {M.shape}")
    if M.shape[0] == 0:
        return 0.0
    if M.shape[0] == 1:
        return float(abs(M[0, 0]))
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def matrix_to_json(M) -> dict:
    M = _as_matrix(np.asarray(M, dtype=float))
    return {
        "rows": int(M.shape[0]),
        "cols": int(M.shape[1]),
        "data": [float(x) for x in M.ravel()],
    }


def matrix_from_json(d: dict) -> np.ndarray:
    try:
        rows, cols, data = int(d["rows"]), int(d["cols"]), d["data"]
    except (KeyError, TypeError) as exc:
        raise InvalidParamsError(f"malformed matrix json: {exc}") from exc
    if rows <= 0 or cols <= 0:
        raise InvalidParamsError(f"bad matrix shape ({rows},{cols})")
    if len(data) != rows * cols:
        raise InvalidParamsError(
            f"data length {len(data)} does not match {rows}x{cols}"
        )
    return np.asarray(data, dtype=float).reshape(rows, cols)
