"""Seeded producers of stochastic matrix sequences {G(t)}.

Static, periodic, and iid-over-a-finite-set variants are random access;
the driven variant wraps a stateful topology process and caches what it
emits so repeated queries are consistent.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .errors import (
    EmptySetError,
    InvalidParamsError,
    ProcessExhaustedError,
)
from .linalg import is_stochastic

RENORM_EVERY = 64


def _validated(G, what: str = "matrix") -> np.ndarray:
    G = np.array(G, dtype=float)
    if not is_stochastic(G):
        raise InvalidParamsError(f"{what} is not row stochastic")
    G.flags.writeable = False
    return G


def _check_time(t: int) -> int:
    t = int(t)
    if t < 0:
        raise InvalidParamsError(f"time must be >= 0, got {t}")
    return t


class MatrixSource:
    """Base: a deterministic map t -> stochastic matrix of fixed size m."""

    m: int

    def at(self, t: int) -> np.ndarray:
        raise NotImplementedError


class StaticSource(MatrixSource):
    def __init__(self, G):
        self.G = _validated(G)
        self.m = self.G.shape[0]

    def at(self, t: int) -> np.ndarray:
        _check_time(t)
        return self.G


class PeriodicSource(MatrixSource):
    def __init__(self, matrices: Sequence):
        mats = [_validated(G, f"matrix {k}") for k, G in enumerate(matrices)]
        if not mats:
            raise InvalidParamsError("periodic source needs at least one matrix")
        self.m = mats[0].shape[0]
        for k, G in enumerate(mats):
            if G.shape[0] != self.m:
                raise InvalidParamsError(
                    f"matrix {k} has dimension {G.shape[0]}, expected {self.m}"
                )
        self.matrices = mats

    def at(self, t: int) -> np.ndarray:
        t = _check_time(t)
        return self.matrices[t % len(self.matrices)]


class FiniteSetIIDSource(MatrixSource):
    """Independent draws from a finite matrix set, one per time step.

    Uses a counter-based generator keyed on (seed, t) so at(t) is O(1)
    and random access never replays history.
    """

    def __init__(self, matrices: Sequence, weights: Optional[Sequence[float]] = None, seed: int = 0):
        mats = [_validated(G, f"matrix {k}") for k, G in enumerate(matrices)]
        if not mats:
            raise EmptySetError("finite iid source needs a nonempty matrix set")
        self.m = mats[0].shape[0]
        for k, G in enumerate(mats):
            if G.shape[0] != self.m:
                raise InvalidParamsError(
                    f"matrix {k} has dimension {G.shape[0]}, expected {self.m}"
                )
        self.matrices = mats
        if weights is None:
            w = np.full(len(mats), 1.0 / len(mats))
        else:
            w = np.asarray(weights, dtype=float)
            if w.shape != (len(mats),):
                raise InvalidParamsError(
                    f"got {w.size} weights for {len(mats)} matrices"
                )
            if np.any(w < 0) or not np.all(np.isfinite(w)) or w.sum() <= 0:
                raise InvalidParamsError("weights must be nonnegative with positive sum")
            w = w / w.sum()
        self.weights = w
        self._cum = np.cumsum(w)
        self.seed = int(seed)
        if not 0 <= self.seed < 2**63:
            raise InvalidParamsError("seed must fit in a nonnegative 63-bit integer")

    def index_at(self, t: int) -> int:
        t = _check_time(t)
        bg = np.random.Philox(key=[self.seed, t])
        u = np.random.Generator(bg).random()
        return int(min(np.searchsorted(self._cum, u, side="right"), len(self.matrices) - 1))

    def at(self, t: int) -> np.ndarray:
        return self.matrices[self.index_at(t)]


class DrivenSource(MatrixSource):
    """Wraps a stateful process exposing .m and .step() -> matrix.

    Emitted matrices are cached so at(t) is consistent across calls;
    queries advance the process only as far as the largest t seen.
    """

    def __init__(self, process):
        self.process = process
        self.m = int(process.m)
        self._cache: List[np.ndarray] = []

    def at(self, t: int) -> np.ndarray:
        t = _check_time(t)
        while len(self._cache) <= t:
            try:
                G = self.process.step()
            except StopIteration as exc:
                raise ProcessExhaustedError(
                    f"driven process ended before t={t}"
                ) from exc
            self._cache.append(_validated(G, f"process output at t={len(self._cache)}"))
        return self._cache[t]


@dataclass(frozen=True)
class WindowProduct:
    t0: int
    length: int
    product: np.ndarray


def window_product(
    source: MatrixSource, t0: int, t: int, renorm_every: int = RENORM_EVERY
) -> WindowProduct:
    """Left product over the window [t0, t0+t): G(t0+t-1)...G(t0+1)G(t0).

    Later times multiply on the left; the empty window gives identity.
    Rows are renormalized every renorm_every factors to arrest the slow
    drift of row sums in long products (relative effect below 1e-12 per
    step).
    """
    t0 = _check_time(t0)
    if t < 0:
        raise InvalidParamsError(f"window length must be >= 0, got {t}")
    P = np.eye(source.m)
    for k in range(t):
        P = source.at(t0 + k) @ P
        if renorm_every and (k + 1) % renorm_every == 0:
            P /= P.sum(axis=1, keepdims=True)
    return WindowProduct(t0=t0, length=t, product=P)
