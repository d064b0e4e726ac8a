"""Branch-and-bound bounds on the joint spectral radius of a finite
matrix set.

Exploration is best-first over product words.  Every evaluated word
updates the certified lower bound through its spectral radius; a word
whose normalized norm rate falls to the current lower bound plus the
tolerance is never worth extending and becomes a terminal block.  Every
long product factors into terminal blocks, each cut at the ancestor
with the smallest norm rate, so the joint spectral radius is at most
the largest terminal prefix-min rate, which is the reported upper
bound.  The bound stays sound when the search is cut off by the depth
or node budget: the surviving frontier is absorbed into the terminal
set.

When the first pass leaves a gap above the tolerance, further passes
rerun the search under norms adapted to the words that are holding the
upper bound up: the whole set is conjugated so the targeted product
becomes real block diagonal, where its 2-norm equals its spectral
radius, so that branch's rate estimate collapses to its true rate and
stops propping up the bound.  A fixed similarity changes no spectral
radius and no gauge-invariant limit, so every pass yields a certified
bracket and the tightest ends win.
"""

import heapq
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import cdf2rdf, matrix_balance
from scipy.optimize import minimize

from .errors import (
    BudgetExceededError,
    DimensionMismatchError,
    EmptySetError,
    InvalidParamsError,
)
from .linalg import matrix_norm, spectral_radius

DEFAULT_TOL = 1e-4
DEFAULT_MAX_LEN = 24
DEFAULT_MAX_NODES = 200_000
BRUTE_FORCE_BUDGET = 10**7

# skip an adapted pass when the target eigenbasis is this ill-conditioned
ADAPT_COND_LIMIT = 1e10
MAX_ADAPT_ROUNDS = 4


@dataclass(frozen=True)
class JsrBounds:
    lower: float
    upper: float
    depth_reached: int
    node_count: int
    witness: Tuple[int, ...]
    converged: bool
    tol: float

    def to_json_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "depth_reached": self.depth_reached,
            "node_count": self.node_count,
            "witness": list(self.witness),
            "converged": self.converged,
            "tol": self.tol,
        }


def _validated_set(matrices: Sequence) -> List[np.ndarray]:
    mats = [np.asarray(A, dtype=float) for A in matrices]
    if not mats:
        raise EmptySetError("matrix set is empty")
    shape = mats[0].shape
    if len(shape) != 2 or shape[0] != shape[1]:
        raise DimensionMismatchError(f"matrices must be square, got {shape}")
    for A in mats[1:]:
        if A.shape != shape:
            raise DimensionMismatchError(
                f"mixed dimensions in set: {shape} vs {A.shape}"
            )
    return mats


def _balanced(mats: List[np.ndarray]) -> List[np.ndarray]:
    """Apply one diagonal similarity, chosen by balancing the entrywise
    sum of absolute values, to the whole set.  Similarities preserve
    every spectral radius and the JSR while often shrinking norms, which
    tightens pruning."""
    n = mats[0].shape[0]
    if n < 2:
        return mats
    X = np.zeros((n, n))
    for A in mats:
        X += np.abs(A)
    try:
        _, T = matrix_balance(X, permute=False)
        d = np.diag(T)
    except Exception:
        return mats
    if not np.all(np.isfinite(d)) or np.any(d <= 0):
        return mats
    return [(A * d[None, :]) / d[:, None] for A in mats]


def _word_product(mats: List[np.ndarray], word: Tuple[int, ...]) -> np.ndarray:
    P = mats[word[0]]
    for a in word[1:]:
        P = mats[a] @ P
    return P


def _block_scales(wr: np.ndarray) -> np.ndarray:
    """Map each coordinate to its eigen-block id in a cdf2rdf output."""
    n = wr.shape[0]
    bidx = np.zeros(n, dtype=int)
    block = 0
    j = 0
    while j < n:
        bidx[j] = block
        if j + 1 < n and wr[j, j + 1] != 0.0:
            bidx[j + 1] = block
            j += 2
        else:
            j += 1
        block += 1
    return bidx


def _adapted_set(
    work: List[np.ndarray], word: Tuple[int, ...]
) -> Optional[List[np.ndarray]]:
    """Conjugate the set so the product of the target word becomes real
    block diagonal.  Returns None when the target eigenbasis is
    defective or too ill-conditioned to be useful.

    The eigenbasis leaves one free scale per eigen-block; scaling blocks
    uniformly commutes with the block diagonal, so the target product
    stays flat while the scales are tuned to shrink the letters' norms,
    which is what prunes the off-cycle branches.
    """
    P = _word_product(work, word)
    try:
        lam, V = np.linalg.eig(P)
        wr, vr = cdf2rdf(lam, V)
    except Exception:
        return None
    if not np.all(np.isfinite(vr)):
        return None

    bidx = _block_scales(wr)
    nblocks = int(bidx[-1]) + 1 if len(bidx) else 0
    if nblocks > 1:
        try:
            base = [np.linalg.solve(vr, A @ vr) for A in work]
        except np.linalg.LinAlgError:
            return None

        def worst_norm(logs: np.ndarray) -> float:
            d = np.exp(logs)[bidx]
            return max(
                float(np.linalg.norm((B / d[:, None]) * d[None, :], 2))
                for B in base
            )

        x0 = np.zeros(nblocks)
        try:
            opt = minimize(
                worst_norm, x0, method="Nelder-Mead",
                options={"maxiter": 120 * nblocks, "xatol": 1e-3, "fatol": 1e-6},
            )
            if np.all(np.isfinite(opt.x)) and opt.fun < worst_norm(x0):
                vr = vr * np.exp(opt.x)[bidx][None, :]
        except Exception:
            pass

    try:
        cond = np.linalg.cond(vr)
        vr_inv = np.linalg.inv(vr)
    except np.linalg.LinAlgError:
        return None
    if not np.isfinite(cond) or cond > ADAPT_COND_LIMIT:
        return None
    return [vr_inv @ A @ vr for A in work]


def _search(
    work: List[np.ndarray],
    tol: float,
    max_len: int,
    max_nodes: int,
    norm_fn: Callable[[np.ndarray], float],
    lower0: float = 0.0,
    witness0: Tuple[int, ...] = (),
) -> Tuple[float, Tuple[int, ...], float, Tuple[int, ...], int, int]:
    """One best-first pass.  Returns (lower, witness, upper,
    binding_word, node_count, depth_reached), where binding_word is the
    terminal block that determines the upper bound.

    Heap entries carry the prefix-min norm rate along the word's
    ancestry; a terminal block only ever costs its best ancestor cut,
    which is what the factorization argument charges.
    """
    k = len(work)
    lower = lower0
    witness = witness0
    terminal_max = 0.0
    binding: Tuple[int, ...] = ()
    node_count = 0
    depth_reached = 0
    heap: list = []

    def consider(word: Tuple[int, ...], P: np.ndarray, prefmin: float):
        nonlocal lower, witness, terminal_max, binding, node_count, depth_reached
        node_count += 1
        length = len(word)
        depth_reached = max(depth_reached, length)
        rho = spectral_radius(P) ** (1.0 / length)
        if rho > lower:
            lower = rho
            witness = word
        beta = norm_fn(P) ** (1.0 / length)
        pm = min(prefmin, beta)
        if length >= max_len or beta <= lower + tol:
            if pm > terminal_max:
                terminal_max = pm
                binding = word
        else:
            heapq.heappush(heap, (-beta, word, P, pm))

    for a in range(k):
        consider((a,), work[a], math.inf)

    while heap:
        neg_beta, word, P, pm = heapq.heappop(heap)
        beta = -neg_beta
        if beta <= lower + tol:
            # best-first order: everything left is at most beta
            if beta > terminal_max:
                terminal_max = beta
                binding = word
            break
        if node_count >= max_nodes:
            if pm > terminal_max:
                terminal_max = pm
                binding = word
            continue
        for a in range(k):
            consider(word + (a,), work[a] @ P, pm)

    return lower, witness, max(lower, terminal_max), binding, node_count, depth_reached


def gripenberg(
    matrices: Sequence,
    tol: float = DEFAULT_TOL,
    max_len: int = DEFAULT_MAX_LEN,
    rescale: bool = True,
    max_nodes: int = DEFAULT_MAX_NODES,
    norm_kind: str = "inf",
) -> JsrBounds:
    mats = _validated_set(matrices)
    if tol <= 0:
        raise InvalidParamsError(f"tol must be > 0, got {tol}")
    if max_len < 1:
        raise InvalidParamsError(f"max_len must be >= 1, got {max_len}")

    if len(mats) == 1:
        # one generator: the JSR is exactly the spectral radius (Gelfand)
        val = spectral_radius(mats[0])
        return JsrBounds(
            lower=val,
            upper=val,
            depth_reached=1,
            node_count=1,
            witness=(0,),
            converged=True,
            tol=tol,
        )

    work = _balanced(mats) if rescale else mats

    lower, witness, upper, binding, node_count, depth_reached = _search(
        work, tol, max_len, max_nodes, lambda P: matrix_norm(P, norm_kind)
    )

    # adaptive rounds: conjugate the set to flatten whichever word is
    # holding up the upper bound, preferring the witness first
    two_norm = lambda P: float(np.linalg.norm(P, 2))
    used: set = set()
    rounds = 0
    while (
        upper - lower > tol
        and lower > 0
        and mats[0].shape[0] >= 2
        and rounds < MAX_ADAPT_ROUNDS
    ):
        target = next(
            (w for w in (witness, binding) if w and w not in used), None
        )
        if target is None:
            break
        used.add(target)
        adapted = _adapted_set(work, target)
        if adapted is None:
            break
        lo2, wit2, up2, bind2, nodes2, depth2 = _search(
            adapted, tol, max_len, max_nodes, two_norm,
            lower0=lower, witness0=witness,
        )
        node_count += nodes2
        depth_reached = max(depth_reached, depth2)
        if up2 < upper:
            upper, binding = up2, bind2
        lower, witness = lo2, wit2
        rounds += 1

    if witness:
        # re-certify the witness against the caller's matrices so the lower
        # bound is reproducible without knowing the internal similarities
        lower = spectral_radius(_word_product(mats, witness)) ** (1.0 / len(witness))
    upper = max(upper, lower)
    converged = upper - lower <= tol * (1.0 + 1e-12)
    return JsrBounds(
        lower=lower,
        upper=upper,
        depth_reached=depth_reached,
        node_count=node_count,
        witness=witness,
        converged=converged,
        tol=tol,
    )


def brute_force_jsr(matrices: Sequence, max_len: int) -> float:
    """Exhaustive max over all words up to max_len of rho^(1/length); a
    certified lower bound on the JSR and the oracle for gripenberg."""
    mats = _validated_set(matrices)
    if max_len < 1:
        raise InvalidParamsError(f"max_len must be >= 1, got {max_len}")
    k = len(mats)
    if k**max_len > BRUTE_FORCE_BUDGET:
        raise BudgetExceededError(
            f"{k}^{max_len} words exceeds the {BRUTE_FORCE_BUDGET:.0e} budget"
        )
    best = 0.0
    stack = [(mats[a], 1) for a in range(k)]
    while stack:
        P, length = stack.pop()
        rate = spectral_radius(P) ** (1.0 / length)
        if rate > best:
            best = rate
        if length < max_len:
            for A in mats:
                stack.append((A @ P, length + 1))
    return best
