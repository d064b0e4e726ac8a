"""Directed graphs extracted from coupling matrices.

Orientation convention: the matrix entry G[i, j] > 0 means vertex j
influences vertex i, drawn as the edge j -> i.  Internally adj[i, j]
mirrors the matrix layout, so row i lists the in-neighbors of i.
"""

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
    DimensionMismatchError,
    EmptyListError,
    InvalidParamsError,
    PreconditionError,
)
from .hajnal import is_scrambling
from .linalg import is_stochastic


@dataclass(frozen=True, eq=False)
class Digraph:
    m: int
    adj: np.ndarray  # bool, adj[i, j] <=> edge j -> i

    def __post_init__(self):
        adj = np.asarray(self.adj, dtype=bool)
        if adj.shape != (self.m, self.m):
            raise InvalidParamsError(
                f"adjacency shape {adj.shape} does not match m={self.m}"
            )
        object.__setattr__(self, "adj", adj)

    @classmethod
    def from_edges(cls, m: int, edges: Iterable[Tuple[int, int]]) -> "Digraph":
        adj = np.zeros((m, m), dtype=bool)
        for src, dst in edges:
            if not (0 <= src < m and 0 <= dst < m):
                raise InvalidParamsError(f"edge ({src},{dst}) out of range for m={m}")
            adj[dst, src] = True
        return cls(m, adj)

    def has_edge(self, src: int, dst: int) -> bool:
        return bool(self.adj[dst, src])

    @property
    def edge_count(self) -> int:
        return int(self.adj.sum())

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Digraph)
            and self.m == other.m
            and np.array_equal(self.adj, other.adj)
        )

    def __hash__(self):
        return hash((self.m, self.adj.tobytes()))


def from_matrix(G, threshold: float = 0.0) -> Digraph:
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise InvalidParamsError(f"need a square matrix, got shape {G.shape}")
    if threshold < 0:
        raise InvalidParamsError(f"threshold must be >= 0, got {threshold}")
    return Digraph(G.shape[0], G > threshold)


def union(graphs: Sequence[Digraph]) -> Digraph:
    graphs = list(graphs)
    if not graphs:
        raise EmptyListError("union of an empty graph list is undefined")
    m = graphs[0].m
    for g in graphs[1:]:
        if g.m != m:
            raise DimensionMismatchError(f"vertex counts differ: {m} vs {g.m}")
    return Digraph(m, reduce(np.logical_or, (g.adj for g in graphs)))


def has_spanning_tree(g: Digraph) -> Optional[int]:
    """Smallest vertex from which every vertex is reachable, or None.

    A root exists iff the strongly-connected condensation has exactly
    one source component; the valid roots are exactly that component.
    """
    if g.m == 1:
        return 0
    n_comp, labels = connected_components(
        csr_matrix(g.adj), directed=True, connection="strong"
    )
    if n_comp == 1:
        return 0
    influenced, influencer = np.nonzero(g.adj)
    cross = labels[influenced] != labels[influencer]
    has_incoming = np.zeros(n_comp, dtype=bool)
    has_incoming[labels[influenced[cross]]] = True
    sources = np.flatnonzero(~has_incoming)
    if sources.size != 1:
        return None
    return int(np.flatnonzero(labels == sources[0]).min())


def spanning_tree_root_by_search(g: Digraph) -> Optional[int]:
    """Independent reference: breadth-first reachability from each
    candidate in index order."""
    m = g.m
    for r in range(m):
        seen = np.zeros(m, dtype=bool)
        seen[r] = True
        frontier = [r]
        while frontier:
            nxt = []
            for v in frontier:
                for w in np.flatnonzero(g.adj[:, v]):
                    if not seen[w]:
                        seen[w] = True
                        nxt.append(int(w))
            frontier = nxt
        if seen.all():
            return r
    return None


def is_scrambling_graph(g: Digraph) -> bool:
    """True iff every vertex pair shares an in-neighbor (self-loops count)."""
    if g.m < 2:
        return True
    B = g.adj.astype(np.float64)
    shared = B @ B.T
    offdiag = shared[~np.eye(g.m, dtype=bool)]
    return bool(np.all(offdiag > 0))


def window_has_spanning_tree(
    source,
    t0: int,
    T: int,
    threshold: float = 0.0,
    inclusive_end: bool = False,
) -> bool:
    """Union the graphs over a window starting at t0 and test for a root.

    The window covers T steps [t0, t0+T-1]; pass inclusive_end=True for
    the closed-interval reading [t0, t0+T] with T+1 graphs.
    """
    if T < 1:
        raise InvalidParamsError(f"window length must be >= 1, got {T}")
    count = T + 1 if inclusive_end else T
    graphs = [from_matrix(source.at(t0 + k), threshold) for k in range(count)]
    return has_spanning_tree(union(graphs)) is not None


def scrambling_product_check(matrices: Sequence[np.ndarray]) -> bool:
    """Verifier for the scrambling-product lemma: given exactly m-1
    stochastic matrices, each with positive diagonal and a spanning
    tree, form the left product G(m-2)...G(1)G(0) and report whether it
    is scrambling (it always is when the preconditions hold)."""
    matrices = [np.asarray(G, dtype=float) for G in matrices]
    if not matrices:
        raise EmptyListError("need at least one matrix")
    m = matrices[0].shape[0]
    if len(matrices) != m - 1:
        raise InvalidParamsError(
            f"need exactly m-1 = {m - 1} matrices for m={m}, got {len(matrices)}"
        )
    for i, G in enumerate(matrices):
        if G.shape != (m, m):
            raise PreconditionError(i, f"shape {G.shape} differs from ({m},{m})")
        if not is_stochastic(G, tol=1e-9):
            raise PreconditionError(i, "not row stochastic")
        if np.min(np.diag(G)) <= 0:
            raise PreconditionError(i, "diagonal has a non-positive entry")
        if has_spanning_tree(from_matrix(G)) is None:
            raise PreconditionError(i, "graph has no spanning tree")
    prod = matrices[0]
    for G in matrices[1:]:
        prod = G @ prod
    return is_scrambling(prod)


def digraph_to_text(g: Digraph) -> str:
    """Edge-list format: header "m edge_count", then one "src dst" line
    per edge, sorted."""
    influenced, influencer = np.nonzero(g.adj)
    pairs = sorted(zip(influencer.tolist(), influenced.tolist()))
    lines = [f"{g.m} {len(pairs)}"]
    lines.extend(f"{j} {i}" for j, i in pairs)
    return "\n".join(lines) + "\n"


def digraph_from_text(text: str) -> Digraph:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise InvalidParamsError("empty digraph text")
    header = lines[0].split()
    if len(header) != 2:
        raise InvalidParamsError(f"bad header line {lines[0]!r}")
    m, count = int(header[0]), int(header[1])
    if len(lines) - 1 != count:
        raise InvalidParamsError(
            f"header says {count} edges but found {len(lines) - 1}"
        )
    edges = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise InvalidParamsError(f"bad edge line {ln!r}")
        edges.append((int(parts[0]), int(parts[1])))
    return Digraph.from_edges(m, edges)
