"""Finite-horizon estimators for sequence diameters, projection spectral
radii, and Lyapunov exponents.

The sup over window starts is sampled on a fixed grid; the limsup in t
is reported as the final-horizon value together with a convergence flag
derived from the tail of the curve.  All long products are carried with
periodic rescaling and log accumulators so rates stay resolvable far
below the floating-point floor.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from .errors import InvalidParamsError, OrbitDivergedError, SingularMatrixError
from .hajnal import diam
from .linalg import ProjectionBasis, matrix_norm, projection_basis

# sentinel for "every probe direction was annihilated"; never used in
# arithmetic, always tested via is_neg_inf
NEG_INF = -1.0e9

DEFAULT_RENORM_EVERY = 8
DEFAULT_N_VECTORS = 8
DEFAULT_T0_COUNT = 16
CURVE_TAIL_RTOL = 0.10
_PROJ_CACHE_CAP = 64


def is_neg_inf(x: float) -> bool:
    return x == NEG_INF


def default_t0_samples(horizon: int, n: int = DEFAULT_T0_COUNT) -> List[int]:
    """Window starts {0, s, 2s, ...} with stride s = horizon/8."""
    s = max(1, horizon // 8)
    return [k * s for k in range(n)]


@dataclass(frozen=True)
class DiamEstimate:
    value: float
    horizon: int
    t0_samples: List[int]
    curve: List[float]
    norm_kind: str
    converged: bool

    def to_json_dict(self) -> dict:
        return {
            "value": self.value,
            "horizon": self.horizon,
            "t0_samples": list(self.t0_samples),
            "curve": list(self.curve),
            "norm_kind": self.norm_kind,
            "converged": self.converged,
        }


@dataclass(frozen=True)
class LyapunovEstimate:
    value: float
    horizon: int
    renorm_every: int
    trace: List[float]
    collapsed: bool
    converged: bool

    def to_json_dict(self) -> dict:
        return {
            "value": self.value,
            "horizon": self.horizon,
            "renorm_every": self.renorm_every,
            "curve": list(self.trace),
            "collapsed": self.collapsed,
            "converged": self.converged,
        }


def _tail_converged_multiplicative(curve: Sequence[float]) -> bool:
    """Last quartile of a rate curve varies by < 10 percent."""
    if not curve:
        return False
    tail = np.asarray(curve[3 * len(curve) // 4 :])
    hi = float(tail.max())
    lo = float(tail.min())
    if hi <= 0.0:
        return True
    return (hi - lo) / hi < CURVE_TAIL_RTOL


def _tail_converged_log(trace: Sequence[float]) -> bool:
    if not trace:
        return False
    tail = np.asarray(trace[3 * len(trace) // 4 :])
    return float(tail.max() - tail.min()) <= math.log(1.0 + CURVE_TAIL_RTOL)


class _ProjectionCache:
    """Caches G -> P G Pplus keyed on array identity, capped so driven
    sources that never repeat a matrix cannot grow it without bound."""

    def __init__(self, basis: ProjectionBasis):
        self.basis = basis
        self._store = {}

    def get(self, G: np.ndarray) -> np.ndarray:
        key = id(G)
        hit = self._store.get(key)
        if hit is not None:
            return hit
        Ghat = self.basis.P @ G @ self.basis.Pplus
        if len(self._store) < _PROJ_CACHE_CAP:
            self._store[key] = Ghat
        return Ghat


def _check_horizon_and_samples(horizon: int, t0_samples) -> List[int]:
    if horizon < 1:
        raise InvalidParamsError(f"horizon must be >= 1, got {horizon}")
    if t0_samples is None:
        t0_samples = default_t0_samples(horizon)
    t0_samples = [int(t) for t in t0_samples]
    if not t0_samples:
        raise InvalidParamsError("need at least one window start")
    if any(t < 0 for t in t0_samples):
        raise InvalidParamsError("window starts must be >= 0")
    return t0_samples


def estimate_hajnal_diameter(
    source,
    horizon: int,
    t0_samples: Optional[Sequence[int]] = None,
    kind: str = "inf",
    renorm_every: int = DEFAULT_RENORM_EVERY,
) -> DiamEstimate:
    """Estimate diam of the sequence: sup over sampled window starts of
    diam(window product)^(1/t), reported for every t up to the horizon.

    Rather than forming the raw window product B(t), whose rows coalesce
    and cancel catastrophically once diam falls below the float floor,
    we propagate the row-difference block D(t) = P B(t) via
    D(t) = Ghat(t) D(t-1) and reconstruct all pairwise row differences
    of B from prefix sums of D.  Rescaling D keeps rates resolvable at
    any horizon.
    """
    t0_samples = _check_horizon_and_samples(horizon, t0_samples)
    m = source.m
    basis = projection_basis(m, "difference")
    cache = _ProjectionCache(basis)
    best = np.zeros(horizon)
    for t0 in t0_samples:
        D = basis.P.copy()
        logscale = 0.0
        dead = False
        for t in range(1, horizon + 1):
            if not dead:
                Ghat = cache.get(source.at(t0 + t - 1))
                D = Ghat @ D
                if renorm_every and t % renorm_every == 0:
                    s = float(np.max(np.abs(D)))
                    if s == 0.0:
                        dead = True
                    else:
                        D /= s
                        logscale += math.log(s)
            if dead:
                break
            # rows of B relative to row 0 are prefix sums of D rows
            prefix = np.vstack([np.zeros(m), np.cumsum(D, axis=0)])
            d_raw = diam(prefix, kind)
            if d_raw > 0.0:
                val = math.exp((math.log(d_raw) + logscale) / t)
                if val > best[t - 1]:
                    best[t - 1] = val
    curve = best.tolist()
    return DiamEstimate(
        value=curve[-1],
        horizon=horizon,
        t0_samples=t0_samples,
        curve=curve,
        norm_kind=kind,
        converged=_tail_converged_multiplicative(curve),
    )


def estimate_projection_jsr(
    source,
    basis: Optional[ProjectionBasis] = None,
    horizon: int = 500,
    t0_samples: Optional[Sequence[int]] = None,
    kind: str = "inf",
    renorm_every: int = DEFAULT_RENORM_EVERY,
) -> DiamEstimate:
    """Estimate the projection joint spectral radius:
    sup over sampled window starts of ||prod Ghat||^(1/t).

    The product is propagated in the caller's basis, but the norm is
    evaluated after similarity back to the canonical difference frame.
    The limit is basis independent; evaluating finite products in one
    common frame makes the finite-horizon values basis independent too,
    instead of differing by a conditioning transient.
    """
    t0_samples = _check_horizon_and_samples(horizon, t0_samples)
    m = source.m
    if basis is None:
        basis = projection_basis(m, "difference")
    canon = projection_basis(m, "difference")
    S = basis.P @ canon.Pplus
    Sinv = canon.P @ basis.Pplus
    cache = _ProjectionCache(basis)
    best = np.zeros(horizon)
    for t0 in t0_samples:
        M = np.eye(m - 1)
        logscale = 0.0
        dead = False
        for t in range(1, horizon + 1):
            Ghat = cache.get(source.at(t0 + t - 1))
            M = Ghat @ M
            if renorm_every and t % renorm_every == 0:
                s = float(np.max(np.abs(M)))
                if s == 0.0:
                    dead = True
                else:
                    M /= s
                    logscale += math.log(s)
            if dead:
                break
            norm_val = matrix_norm(Sinv @ M @ S, kind)
            if norm_val > 0.0:
                val = math.exp((math.log(norm_val) + logscale) / t)
                if val > best[t - 1]:
                    best[t - 1] = val
    curve = best.tolist()
    return DiamEstimate(
        value=curve[-1],
        horizon=horizon,
        t0_samples=t0_samples,
        curve=curve,
        norm_kind=kind,
        converged=_tail_converged_multiplicative(curve),
    )


def estimate_sigma1(
    source,
    basis: Optional[ProjectionBasis] = None,
    horizon: int = 10_000,
    renorm_every: int = DEFAULT_RENORM_EVERY,
    n_vectors: int = DEFAULT_N_VECTORS,
    seed: int = 0,
) -> LyapunovEstimate:
    """Top projection Lyapunov exponent: propagate random unit probes
    through the projected sequence, accumulate log growth, take the max
    over probes.  Probes that are annihilated drop out; if all die the
    value is the NEG_INF sentinel with collapsed=True."""
    if horizon < 1 or renorm_every < 1 or horizon < renorm_every:
        raise InvalidParamsError(
            f"need horizon >= renorm_every >= 1, got {horizon}, {renorm_every}"
        )
    if n_vectors < 1:
        raise InvalidParamsError("need at least one probe vector")
    m = source.m
    if basis is None:
        basis = projection_basis(m, "difference")
    cache = _ProjectionCache(basis)
    rng = np.random.default_rng(seed)
    # draw probe-by-probe so a larger n_vectors extends, not reshuffles
    V = rng.standard_normal((n_vectors, m - 1)).T.copy()
    V /= np.linalg.norm(V, axis=0, keepdims=True)
    logs = np.zeros(n_vectors)
    alive = np.ones(n_vectors, dtype=bool)
    trace: List[float] = []
    last_renorm = 0
    for t in range(1, horizon + 1):
        Ghat = cache.get(source.at(t - 1))
        V = Ghat @ V
        if t % renorm_every == 0:
            norms = np.linalg.norm(V, axis=0)
            dying = alive & (norms <= 1e-300)
            alive &= ~dying
            V[:, ~alive] = 0.0
            live = np.flatnonzero(alive)
            if live.size:
                logs[live] += np.log(norms[live])
                V[:, live] /= norms[live]
                trace.append(float(np.max(logs[live])) / t)
            else:
                trace.append(NEG_INF)
            last_renorm = t
    live = np.flatnonzero(alive)
    if live.size == 0:
        return LyapunovEstimate(
            value=NEG_INF,
            horizon=horizon,
            renorm_every=renorm_every,
            trace=trace,
            collapsed=True,
            converged=True,
        )
    if last_renorm < horizon:
        norms = np.linalg.norm(V[:, live], axis=0)
        ok = norms > 1e-300
        final = logs[live][ok] + np.log(norms[ok]) if ok.any() else np.array([])
        value = float(final.max() / horizon) if final.size else NEG_INF
    else:
        value = float(np.max(logs[live]) / horizon)
    if is_neg_inf(value):
        return LyapunovEstimate(value, horizon, renorm_every, trace, True, True)
    finite_trace = [x for x in trace if not is_neg_inf(x)]
    return LyapunovEstimate(
        value=value,
        horizon=horizon,
        renorm_every=renorm_every,
        trace=trace,
        collapsed=False,
        converged=_tail_converged_log(finite_trace),
    )


def _matrix_fn(source) -> Callable[[int], np.ndarray]:
    if callable(source) and not hasattr(source, "at"):
        return source
    return source.at


def lyapunov_spectrum_qr(source, horizon: int) -> List[float]:
    """All Lyapunov exponents of a square-matrix sequence, descending,
    via QR reorthonormalization of a full frame."""
    if horizon < 1:
        raise InvalidParamsError(f"horizon must be >= 1, got {horizon}")
    fn = _matrix_fn(source)
    A0 = np.asarray(fn(0), dtype=float)
    m = A0.shape[0]
    Q = np.eye(m)
    logs = np.zeros(m)
    for t in range(horizon):
        A = A0 if t == 0 else np.asarray(fn(t), dtype=float)
        Q, R = np.linalg.qr(A @ Q)
        d = np.abs(np.diag(R))
        if np.any(d < 1e-300):
            raise SingularMatrixError(t)
        logs += np.log(d)
    return sorted((logs / horizon).tolist(), reverse=True)


def estimate_scalar_lyapunov(
    f: Callable[[float], float],
    df: Callable[[float], float],
    s0: float,
    burn_in: int,
    horizon: int,
) -> float:
    """Lyapunov exponent of a scalar map: average of log|df| along the
    orbit after a transient.  |df| is floored at 1e-300 before the log;
    orbits leaving |s| <= 1e12 raise."""
    if horizon < 1:
        raise InvalidParamsError(f"horizon must be >= 1, got {horizon}")
    if burn_in < 0:
        raise InvalidParamsError(f"burn_in must be >= 0, got {burn_in}")
    s = float(s0)
    for t in range(burn_in):
        s = f(s)
        if not abs(s) <= 1e12:
            raise OrbitDivergedError(t, s)
    orbit = np.empty(horizon)
    for k in range(horizon):
        orbit[k] = s
        s = f(s)
        if not abs(s) <= 1e12:
            raise OrbitDivergedError(burn_in + k, s)
    derivs = np.abs(np.asarray(df(orbit), dtype=float))
    return float(np.mean(np.log(np.maximum(derivs, 1e-300))))
