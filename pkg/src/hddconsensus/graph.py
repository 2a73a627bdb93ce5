"""Undirected communication graphs and neighbor views."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._rng import Purpose, substream


@dataclass(frozen=True)
class NeighborView:
    agent: int
    neighbors: tuple[int, ...]

    @property
    def inclusive(self) -> tuple[int, ...]:
        # neighbors first, self last: the layout of the augmented trust vector
        return self.neighbors + (self.agent,)

    @property
    def degree(self) -> int:
        return len(self.neighbors)


@dataclass(frozen=True)
class Graph:
    """Immutable undirected graph over agents ``0 .. n_agents-1``.

    Edges are stored as sorted ``(i, j)`` pairs with ``i < j``. The
    cooperative and non-cooperative sets partition the agents.
    """

    n_agents: int
    edges: frozenset
    cooperative_set: frozenset
    non_cooperative_set: frozenset

    def __post_init__(self):
        canon = set()
        for i, j in self.edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-loop on agent {i}")
            if not (0 <= i < self.n_agents and 0 <= j < self.n_agents):
                raise ValueError(f"edge ({i}, {j}) out of range for {self.n_agents} agents")
            canon.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(canon))
        coop = frozenset(int(i) for i in self.cooperative_set)
        noncoop = frozenset(int(i) for i in self.non_cooperative_set)
        if coop & noncoop:
            raise ValueError("cooperative and non-cooperative sets overlap")
        if coop | noncoop != frozenset(range(self.n_agents)):
            raise ValueError("cooperative and non-cooperative sets must cover all agents")
        object.__setattr__(self, "cooperative_set", coop)
        object.__setattr__(self, "non_cooperative_set", noncoop)
        adj: list[list[int]] = [[] for _ in range(self.n_agents)]
        for i, j in canon:
            adj[i].append(j)
            adj[j].append(i)
        object.__setattr__(self, "_adj", tuple(tuple(sorted(a)) for a in adj))

    @classmethod
    def from_edges(cls, n_agents, edges, non_cooperative=()):
        noncoop = frozenset(non_cooperative)
        coop = frozenset(range(n_agents)) - noncoop
        return cls(n_agents, frozenset(edges), coop, noncoop)

    @classmethod
    def complete(cls, n_agents, non_cooperative=()):
        return cls.from_edges(n_agents, itertools.combinations(range(n_agents), 2), non_cooperative)

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self._adj[i]

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(indptr, indices)`` with each neighbor list ascending."""
        indptr = np.zeros(self.n_agents + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(a) for a in self._adj])
        indices = np.fromiter(itertools.chain.from_iterable(self._adj), dtype=np.int64,
                              count=int(indptr[-1]))
        return indptr, indices


def build_paper_topology(n_coop: int, n_noncoop: int, edge_prob: float, rng_seed: int,
                         adversary_edges: bool = False) -> Graph:
    """Random cooperative core plus adversaries attached to every cooperative node.

    Cooperative agents get ids ``0 .. n_coop-1``; adversaries follow. Each
    cooperative pair is linked independently with probability ``edge_prob``.
    Adversary-adversary links are only added when ``adversary_edges`` is set,
    with the same probability.
    """
    if n_coop < 1:
        raise ValueError("n_coop must be at least 1")
    if n_noncoop < 0:
        raise ValueError("n_noncoop must be non-negative")
    if not 0.0 <= edge_prob <= 1.0:
        raise ValueError("edge_prob must lie in [0, 1]")
    rng = substream(rng_seed, Purpose.GRAPH)
    n = n_coop + n_noncoop
    coop_pairs = list(itertools.combinations(range(n_coop), 2))
    draws = rng.random(len(coop_pairs))
    edges = {pair for pair, u in zip(coop_pairs, draws) if u < edge_prob}
    edges.update((i, j) for j in range(n_coop, n) for i in range(n_coop))
    if adversary_edges:
        adv_pairs = list(itertools.combinations(range(n_coop, n), 2))
        adv_draws = rng.random(len(adv_pairs))
        edges.update(pair for pair, u in zip(adv_pairs, adv_draws) if u < edge_prob)
    return Graph(n, frozenset(edges), frozenset(range(n_coop)), frozenset(range(n_coop, n)))


def is_connected(g: Graph) -> bool:
    if g.n_agents == 0:
        return True
    seen = {0}
    stack = [0]
    while stack:
        for j in g.neighbors(stack.pop()):
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return len(seen) == g.n_agents


def neighbor_view(g: Graph, i: int) -> NeighborView:
    if not 0 <= i < g.n_agents:
        raise IndexError(f"agent {i} out of range for {g.n_agents} agents")
    return NeighborView(int(i), g.neighbors(i))


def write_edge_list(g: Graph, path) -> Path:
    """Write ``i j`` lines in ascending order."""
    path = Path(path)
    lines = [f"{i} {j}\n" for i, j in sorted(g.edges)]
    path.write_text("".join(lines))
    return path
