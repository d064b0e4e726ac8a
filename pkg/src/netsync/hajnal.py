"""Hajnal diameter, scramblingness eta, and the contraction inequality."""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.spatial.distance import pdist

from .errors import DimensionMismatchError, InvalidParamsError

# entries at or below this count as zero when testing scramblingness,
# matching the row-normalization tolerance
POSITIVITY_THRESHOLD = 1e-12

BOUND_SLACK = 1e-10


@dataclass(frozen=True)
class DiamValue:
    value: float
    norm_kind: str


def _rows(L) -> np.ndarray:
    L = np.asarray(L, dtype=float)
    if L.ndim == 1:
        L = L[:, None]
    if L.ndim != 2 or L.shape[0] < 1:
        raise InvalidParamsError(f"need a matrix with at least one row, got {L.shape}")
    return L


def diam(L, kind: str = "inf") -> float:
    """Max over row pairs of the norm of the row difference.

    For a column vector this is the spread max_i x_i - min_i x_i, the
    state diameter.
    """
    L = _rows(L)
    if L.shape[0] < 2:
        return 0.0
    if kind == "inf":
        # max_{i,j} max_k |L_ik - L_jk| decomposes columnwise
        return float(np.max(L.max(axis=0) - L.min(axis=0)))
    if kind == "one":
        return float(pdist(L, metric="cityblock").max())
    if kind == "two":
        return float(pdist(L, metric="euclidean").max())
    raise InvalidParamsError(f"unknown norm kind {kind!r}")


def diam_matrix(L, kind: str = "inf") -> DiamValue:
    return DiamValue(diam(L, kind), kind)


def eta(G) -> float:
    """Scramblingness: min over row pairs i,j of sum_k min(G_ik, G_jk).

    Entries at or below POSITIVITY_THRESHOLD are treated as zero so that
    eta > 0 coincides exactly with the combinatorial scrambling test.
    """
    G = np.asarray(G, dtype=float)
    if G.ndim != 2:
        raise InvalidParamsError(f"expected a 2-d array, got ndim={G.ndim}")
    m = G.shape[0]
    if m < 2:
        return 1.0
    X = np.where(G > POSITIVITY_THRESHOLD, G, 0.0)
    best = np.inf
    for i in range(m - 1):
        pair_sums = np.minimum(X[i], X[i + 1 :]).sum(axis=1)
        best = min(best, float(pair_sums.min()))
    return min(max(best, 0.0), 1.0)


def is_scrambling(G) -> bool:
    """True iff every row pair shares a positively supported column."""
    return eta(G) > 0.0


class HajnalBound(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def hajnal_bound_check(G, H, kind: str = "inf") -> HajnalBound:
    """Evaluate both sides of diam(G H) <= (1 - eta(G)) * diam(H)."""
    G = np.asarray(G, dtype=float)
    H = np.asarray(H, dtype=float)
    if G.shape != H.shape or G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise DimensionMismatchError(
            f"need square matrices of equal shape, got {G.shape} and {H.shape}"
        )
    lhs = diam(G @ H, kind)
    rhs = (1.0 - eta(G)) * diam(H, kind)
    return HajnalBound(lhs, rhs, lhs <= rhs + BOUND_SLACK)
