"""Stateful generators of time-varying coupling topologies.

Two mechanisms over a scale-free substrate:

* blinking: vertices fail at random and sit out a fixed recovery time,
  taking their rows and columns with them;
* blurring: edge weights diffuse under Gaussian increments, and an edge
  driven negative reverses its orientation with the overflow magnitude.

Both expose .m and .step() -> row stochastic matrix, the interface
DrivenSource wraps.
"""

import numpy as np

from .errors import InvalidParamsError


def scale_free_graph(m, avg_degree, seed):
    """Preferential-attachment graph as a symmetric 0/1 adjacency matrix.

    Starts from a clique on k+1 vertices (k = avg_degree // 2); each
    arrival attaches to k distinct existing vertices drawn from the stub
    list, so attachment probability is proportional to current degree.
    Always connected; realized mean degree approaches avg_degree from
    below as m grows.
    """
    m = int(m)
    avg_degree = int(avg_degree)
    if avg_degree < 2 or avg_degree % 2 != 0:
        raise InvalidParamsError(f"avg_degree must be even and >= 2, got {avg_degree}")
    if m <= avg_degree:
        raise InvalidParamsError(f"need m > avg_degree, got m={m}, avg_degree={avg_degree}")
    k = avg_degree // 2
    m0 = k + 1
    rng = np.random.default_rng(seed)
    adj = np.zeros((m, m))
    stubs = []
    for i in range(m0):
        for j in range(i):
            adj[i, j] = adj[j, i] = 1.0
            stubs.extend((i, j))
    for v in range(m0, m):
        targets = set()
        while len(targets) < k:
            targets.add(stubs[rng.integers(len(stubs))])
        for u in targets:
            adj[v, u] = adj[u, v] = 1.0
            stubs.extend((v, u))
    return adj


def _validated_base(base):
    base = np.array(base, dtype=float)
    if base.ndim != 2 or base.shape[0] != base.shape[1]:
        raise InvalidParamsError("base adjacency must be square")
    if not np.array_equal(base, base.T):
        raise InvalidParamsError("base adjacency must be symmetric")
    if np.any(np.diag(base) != 0):
        raise InvalidParamsError("base adjacency must have a zero diagonal")
    if not np.isin(base, (0.0, 1.0)).all():
        raise InvalidParamsError("base adjacency entries must be 0 or 1")
    return base


class BlinkingProcess:
    """Random vertex failures with a fixed recovery time.

    Per step: positive recovery timers tick down, then every up vertex
    fails independently with probability p (its timer jumps to t_rec).
    The emitted coupling is the base graph with down vertices' rows and
    columns removed, a unit diagonal added, and rows normalized, so a
    down vertex holds its state and nobody listens to it. A vertex that
    fails is already absent from the emission of the same step, and
    stays down for exactly t_rec emissions.
    """

    def __init__(self, base, p, t_rec, seed):
        self.base = _validated_base(base)
        if not 0.0 <= p <= 1.0:
            raise InvalidParamsError(f"failure probability must be in [0, 1], got {p}")
        if int(t_rec) < 1:
            raise InvalidParamsError(f"recovery time must be >= 1, got {t_rec}")
        self.p = float(p)
        self.t_rec = int(t_rec)
        self.m = self.base.shape[0]
        self._timers = np.zeros(self.m, dtype=int)
        self._rng = np.random.default_rng(seed)

    @classmethod
    def from_params(cls, m, avg_degree, p, t_rec, seed):
        """Build the base graph and the failure stream from one seed."""
        graph_seed, fail_seed = np.random.SeedSequence(seed).spawn(2)
        return cls(scale_free_graph(m, avg_degree, graph_seed), p, t_rec, fail_seed)

    @property
    def down_timers(self):
        return self._timers.copy()

    def step(self):
        self._timers = np.maximum(self._timers - 1, 0)
        up = self._timers == 0
        fails = up & (self._rng.random(self.m) < self.p)
        self._timers[fails] = self.t_rec
        down = self._timers > 0
        A = self.base.copy()
        A[down, :] = 0.0
        A[:, down] = 0.0
        np.fill_diagonal(A, 1.0)
        return A / A.sum(axis=1, keepdims=True)


class BlurringProcess:
    """Diffusing edge weights with orientation reversal at zero.

    Every unordered pair starts with one live orientation of weight
    uniform in [1, 2). Per step each live weight receives an independent
    N(0, r^2) increment; a weight driven negative moves its magnitude to
    the reversed edge (the original goes dead), so at most one
    orientation per pair is ever live. Rows with no in-edges fall back
    to a unit self-loop before row normalization.
    """

    def __init__(self, m, r, seed):
        m = int(m)
        if m < 2:
            raise InvalidParamsError(f"need at least two vertices, got {m}")
        if not r >= 0.0:
            raise InvalidParamsError(f"step deviation must be >= 0, got {r}")
        self.m = m
        self.r = float(r)
        self._rng = np.random.default_rng(seed)
        iu = np.triu_indices(m, 1)
        w0 = self._rng.uniform(1.0, 2.0, size=len(iu[0]))
        toward_upper = self._rng.random(len(iu[0])) < 0.5
        W = np.zeros((m, m))
        W[iu] = np.where(toward_upper, w0, 0.0)
        W[iu[1], iu[0]] = np.where(toward_upper, 0.0, w0)
        self._W = W

    @property
    def weights(self):
        return self._W.copy()

    def step(self):
        if self.r > 0.0:
            rows, cols = np.nonzero(self._W)
            vals = self._W[rows, cols] + self._rng.normal(0.0, self.r, size=rows.size)
            neg = vals < 0
            self._W[rows, cols] = np.where(neg, 0.0, vals)
            self._W[cols[neg], rows[neg]] = -vals[neg]
        A = self._W.copy()
        sums = A.sum(axis=1)
        dead = np.flatnonzero(sums == 0)
        if dead.size:
            A[dead, dead] = 1.0
            sums = A.sum(axis=1)
        return A / sums[:, None]
