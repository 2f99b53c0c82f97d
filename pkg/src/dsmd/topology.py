"""Communication graphs, mixing matrices, and geometric-decay constants.

Intra-network consensus uses doubly stochastic Metropolis weights on
undirected connected graphs; inter-network estimation uses row-stochastic
bipartite weights.  Products of mixing matrices converge geometrically to
the uniform matrix: with weight floor eta, window B and n agents,

    |[W(t) W(t-1) ... W(s)]_ij - 1/n| <= Gamma * theta^(t-s),
    Gamma = (1 - eta/(4 n^2))^(-2),   theta = (1 - eta/(4 n^2))^(1/B).

The decay pair (Gamma, theta) feeds every consensus/regret/gap envelope
in :mod:`dsmd.metrics`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GraphSpec",
    "Graph",
    "MixingMatrix",
    "BipartiteWeights",
    "DecayConstants",
    "MixingSchedule",
    "build_graph",
    "metropolis_weights",
    "uniform_bipartite",
    "transition_matrix",
    "decay_constants",
]

_GRAPH_KINDS = ("cycle", "random", "complete")

# Largest admissible weight floor: decay_constants needs eta < 1 strictly,
# and a single-agent "network" has mixing matrix [[1.0]].
_ETA_CAP = 1.0 - 1e-9


@dataclass(frozen=True)
class GraphSpec:
    """Recipe for an undirected connected communication graph."""

    kind: str
    node_count: int
    edge_probability: float = 0.7
    seed: int = 0

    def __post_init__(self):
        if self.kind not in _GRAPH_KINDS:
            raise ValueError(f"unknown graph kind {self.kind!r}")
        if self.node_count < 1:
            raise ValueError("node_count must be positive")
        if self.kind == "cycle" and self.node_count < 2:
            raise ValueError("cycle graphs need at least 2 nodes")
        if self.kind == "random" and not 0.0 < self.edge_probability <= 1.0:
            raise ValueError("edge_probability must lie in (0, 1]")


@dataclass(frozen=True)
class Graph:
    """Undirected graph as an edge set plus adjacency lists."""

    node_count: int
    edges: tuple  # tuple of (i, j) pairs with i < j

    @property
    def neighbors(self) -> tuple:
        adj = [[] for _ in range(self.node_count)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return tuple(tuple(sorted(a)) for a in adj)

    @property
    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.node_count, dtype=int)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg


def _is_connected(n: int, edges) -> bool:
    if n == 1:
        return True
    adj = [[] for _ in range(n)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = np.zeros(n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if not seen[w]:
                seen[w] = True
                stack.append(w)
    return bool(seen.all())


def bfs_distances(graph: Graph, source: int) -> np.ndarray:
    """Hop distances from ``source`` to every node (connected graphs)."""
    dist = np.full(graph.node_count, -1, dtype=int)
    dist[source] = 0
    frontier = [source]
    adj = graph.neighbors
    while frontier:
        nxt = []
        for v in frontier:
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    nxt.append(w)
        frontier = nxt
    return dist


def build_graph(spec: GraphSpec) -> Graph:
    """Construct the graph named by ``spec``; deterministic given the seed.

    Random graphs draw each edge independently with ``edge_probability``
    and are resampled (up to 1000 times) until connected.
    """
    n = spec.node_count
    if spec.kind == "complete":
        edges = tuple((i, j) for i in range(n) for j in range(i + 1, n))
        return Graph(n, edges)
    if spec.kind == "cycle":
        if n == 2:
            return Graph(n, ((0, 1),))
        edges = [(i, i + 1) for i in range(n - 1)] + [(0, n - 1)]
        return Graph(n, tuple(sorted(edges)))
    rng = np.random.default_rng(spec.seed)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for _ in range(1000):
        mask = rng.random(len(pairs)) < spec.edge_probability
        edges = tuple(p for p, m in zip(pairs, mask) if m)
        if _is_connected(n, edges):
            return Graph(n, edges)
    raise RuntimeError(
        f"random graph on {n} nodes with p={spec.edge_probability} "
        "failed connectivity after 1000 resamples"
    )


@dataclass(frozen=True)
class MixingMatrix:
    """Doubly stochastic consensus weights with a positive-entry floor."""

    entries: np.ndarray
    eta_floor: float

    def __post_init__(self):
        w = self.entries
        n = w.shape[0]
        if w.shape != (n, n):
            raise ValueError("mixing matrix must be square")
        if np.any(w < 0):
            raise ValueError("mixing weights must be nonnegative")
        if not (np.allclose(w.sum(axis=0), 1.0, atol=1e-12)
                and np.allclose(w.sum(axis=1), 1.0, atol=1e-12)):
            raise ValueError("mixing matrix must be doubly stochastic")
        if np.any(np.diag(w) <= 0):
            raise ValueError("mixing matrix needs positive diagonal entries")
        positive = w[w > 0]
        if positive.size and positive.min() < self.eta_floor - 1e-15:
            raise ValueError("positive entry below the declared eta floor")

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def metropolis_weights(graph: Graph) -> MixingMatrix:
    """Metropolis-Hastings weights: w_ij = 1/(1 + max(deg_i, deg_j)) on
    edges, w_ii = 1 - sum of the off-diagonal row.  Symmetric, hence
    doubly stochastic; eta_floor is the smallest positive entry."""
    n = graph.node_count
    deg = graph.degrees
    w = np.zeros((n, n))
    for i, j in graph.edges:
        w[i, j] = w[j, i] = 1.0 / (1.0 + max(deg[i], deg[j]))
    np.fill_diagonal(w, 1.0 - w.sum(axis=1))
    eta = float(min(w[w > 0].min(), _ETA_CAP))
    return MixingMatrix(w, eta)


@dataclass(frozen=True)
class BipartiteWeights:
    """Row-stochastic weights a receiving network applies to the other
    network's iterates: shape (n_receivers, n_senders)."""

    entries: np.ndarray

    def __post_init__(self):
        if np.any(self.entries < 0):
            raise ValueError("bipartite weights must be nonnegative")
        if not np.allclose(self.entries.sum(axis=1), 1.0, atol=1e-12):
            raise ValueError("bipartite weight rows must sum to 1")


def uniform_bipartite(n_from: int, n_to: int) -> BipartiteWeights:
    """Complete bipartite uniform weights: every one of the ``n_to``
    receivers averages all ``n_from`` senders with weight 1/n_from."""
    if n_from < 1 or n_to < 1:
        raise ValueError("both network sizes must be positive")
    return BipartiteWeights(np.full((n_to, n_from), 1.0 / n_from))


@dataclass(frozen=True)
class DecayConstants:
    """Geometric mixing constants: Gamma > 1 (unless degenerate) and
    theta in (0, 1)."""

    gamma: float
    theta: float


def decay_constants(n: int, eta: float, B: int = 1) -> DecayConstants:
    """Gamma = (1 - eta/(4 n^2))^(-2), theta = (1 - eta/(4 n^2))^(1/B)."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must lie strictly in (0, 1)")
    if B < 1:
        raise ValueError("B must be a positive integer")
    base = 1.0 - eta / (4.0 * n * n)
    return DecayConstants(gamma=base ** -2, theta=base ** (1.0 / B))


@dataclass(frozen=True)
class MixingSchedule:
    """Time-indexed mixing matrices for one network.

    ``matrices`` is cycled round-robin: W(t) = matrices[t mod period].
    A single matrix gives the static (B=1) case; a longer list realizes a
    periodically switching topology whose union graph must be connected
    within one period (B = period).
    """

    matrices: tuple  # of MixingMatrix
    period: int = field(init=False)

    def __post_init__(self):
        if not self.matrices:
            raise ValueError("schedule needs at least one matrix")
        n = self.matrices[0].n
        if any(m.n != n for m in self.matrices):
            raise ValueError("all matrices in a schedule must share a size")
        object.__setattr__(self, "period", len(self.matrices))

    @property
    def n(self) -> int:
        return self.matrices[0].n

    @property
    def eta_floor(self) -> float:
        return min(m.eta_floor for m in self.matrices)

    def at(self, t: int) -> np.ndarray:
        return self.matrices[t % self.period].entries

    def decay(self) -> DecayConstants:
        return decay_constants(self.n, self.eta_floor, B=self.period)


def transition_matrix(schedule, t: int, s: int) -> np.ndarray:
    """Phi(t, s) = W(t) W(t-1) ... W(s); doubly stochastic for t >= s >= 0.

    ``schedule`` may be a MixingSchedule or any sequence indexable by
    time whose items are MixingMatrix or plain arrays.
    """
    if t < s or s < 0:
        raise ValueError("need t >= s >= 0")

    def mat(k):
        w = schedule.at(k) if isinstance(schedule, MixingSchedule) else schedule[k]
        return w.entries if isinstance(w, MixingMatrix) else np.asarray(w)

    phi = mat(s)
    for k in range(s + 1, t + 1):
        phi = mat(k) @ phi
    return phi
