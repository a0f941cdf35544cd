"""Undirected and directed graph machinery over integer vertex ids.

Graphs are immutable.  Vertices are ``0..n-1``; edges are stored as sorted
pairs.  Everything that needs a tie-break breaks it by smallest vertex id so
downstream results are reproducible.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import CyclicInput, ModelError, NonChordalInput


@dataclass(frozen=True)
class Variable:
    id: int
    name: str
    card: int


class VariableTable:
    """Ordered variables with dense ids ``0..n-1`` and unique names."""

    def __init__(self, variables: Iterable[tuple[str, int]], allow_degenerate: bool = False):
        vs = []
        for i, (name, card) in enumerate(variables):
            card = int(card)
            if card < 1 or (card == 1 and not allow_degenerate):
                raise ModelError(f"variable {name!r} has cardinality {card}")
            vs.append(Variable(i, str(name), card))
        names = [v.name for v in vs]
        if len(set(names)) != len(names):
            raise ModelError("variable names must be unique")
        self.variables: tuple[Variable, ...] = tuple(vs)
        self._index = {v.name: v.id for v in vs}

    def __len__(self) -> int:
        return len(self.variables)

    def __iter__(self):
        return iter(self.variables)

    def __eq__(self, other) -> bool:
        if not isinstance(other, VariableTable):
            return NotImplemented
        return self.variables == other.variables

    def __hash__(self) -> int:
        return hash(self.variables)

    def __repr__(self) -> str:
        body = ", ".join(f"{v.name}:{v.card}" for v in self.variables)
        return f"VariableTable({body})"

    @property
    def cards(self) -> tuple[int, ...]:
        return tuple(v.card for v in self.variables)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def id_of(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ModelError(f"unknown variable {name!r}") from None

    def domain_size(self) -> float:
        """``|X|`` as a double (exact integers overflow for large n)."""
        size = 1.0
        for v in self.variables:
            size *= float(v.card)
        return size


def _norm_edges(n: int, edges: Iterable[tuple[int, int]]) -> frozenset[tuple[int, int]]:
    out = set()
    for u, v in edges:
        u, v = int(u), int(v)
        if u == v:
            raise ValueError(f"self-loop on vertex {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge ({u}, {v}) outside 0..{n - 1}")
        out.add((u, v) if u < v else (v, u))
    return frozenset(out)


@dataclass(frozen=True)
class UndirectedGraph:
    n: int
    edges: frozenset = field(default_factory=frozenset)
    adj: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 0 or self.n >= 2**32:
            raise ValueError("vertex count must fit in 32 bits")
        edges = _norm_edges(self.n, self.edges)
        object.__setattr__(self, "edges", edges)
        nbrs = [set() for _ in range(self.n)]
        for u, v in edges:
            nbrs[u].add(v)
            nbrs[v].add(u)
        object.__setattr__(self, "adj", tuple(frozenset(s) for s in nbrs))

    @classmethod
    def from_cliques(cls, n: int, cliques: Iterable[Sequence[int]]) -> "UndirectedGraph":
        edges = set()
        for c in cliques:
            c = sorted(c)
            for i, u in enumerate(c):
                for v in c[i + 1:]:
                    edges.add((u, v))
        return cls(n, frozenset(edges))

    def union(self, other: "UndirectedGraph") -> "UndirectedGraph":
        if other.n != self.n:
            raise ValueError("graphs have different vertex counts")
        return UndirectedGraph(self.n, self.edges | other.edges)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj[u]

    def is_complete_on(self, vertices: Iterable[int]) -> bool:
        vs = list(vertices)
        return all(self.has_edge(u, v) for i, u in enumerate(vs) for v in vs[i + 1:])


@dataclass(frozen=True)
class DirectedGraph:
    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        edges = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) outside 0..{self.n - 1}")
            edges.add((u, v))
        object.__setattr__(self, "edges", frozenset(edges))

    def parents(self, v: int) -> list[int]:
        return sorted(u for u, w in self.edges if w == v)

    def topological_order(self) -> list[int]:
        indeg = [0] * self.n
        children = [[] for _ in range(self.n)]
        for u, v in self.edges:
            indeg[v] += 1
            children[u].append(v)
        ready = sorted(v for v in range(self.n) if indeg[v] == 0)
        order = []
        while ready:
            u = ready.pop(0)
            order.append(u)
            for v in sorted(children[u]):
                indeg[v] -= 1
                if indeg[v] == 0:
                    ready.append(v)
            ready.sort()
        if len(order) != self.n:
            raise CyclicInput("directed graph has a cycle")
        return order


def maximum_cardinality_search(g: UndirectedGraph) -> list[int]:
    """Visit order of MCS; ties go to the smallest vertex id."""
    weight = [0] * g.n
    done = [False] * g.n
    order = []
    for _ in range(g.n):
        best = -1
        for v in range(g.n):
            if not done[v] and (best < 0 or weight[v] > weight[best]):
                best = v
        done[best] = True
        order.append(best)
        for u in g.adj[best]:
            if not done[u]:
                weight[u] += 1
    return order


def is_chordal(g: UndirectedGraph) -> tuple[bool, list[int] | None]:
    """Return ``(True, peo)`` for chordal graphs, ``(False, None)`` otherwise.

    ``peo`` is a perfect elimination order: each vertex's neighbours that
    come after it in the order form a clique.
    """
    peo = maximum_cardinality_search(g)[::-1]
    pos = {v: i for i, v in enumerate(peo)}
    for v in peo:
        later = [u for u in g.adj[v] if pos[u] > pos[v]]
        if not later:
            continue
        first = min(later, key=pos.__getitem__)
        for u in later:
            if u != first and u not in g.adj[first]:
                return False, None
    return True, peo


def _require_peo(g: UndirectedGraph) -> list[int]:
    ok, peo = is_chordal(g)
    if not ok:
        raise NonChordalInput("graph is not chordal")
    return peo


def triangulate(g: UndirectedGraph) -> UndirectedGraph:
    """Chordal supergraph of ``g`` by min-fill elimination.

    Chordal inputs are returned unchanged.
    """
    if is_chordal(g)[0]:
        return g
    nbrs = [set(a) for a in g.adj]
    alive = set(range(g.n))
    fill_edges = set()

    def fill_of(v):
        ns = sorted(nbrs[v])
        return sum(1 for i, a in enumerate(ns) for b in ns[i + 1:] if b not in nbrs[a])

    fill = {v: fill_of(v) for v in alive}
    while alive:
        v = min(alive, key=lambda u: (fill[u], u))
        ns = sorted(nbrs[v])
        dirty = set(ns)
        for i, a in enumerate(ns):
            for b in ns[i + 1:]:
                if b not in nbrs[a]:
                    nbrs[a].add(b)
                    nbrs[b].add(a)
                    fill_edges.add((a, b))
                    dirty |= nbrs[a] | nbrs[b]
        for u in ns:
            nbrs[u].discard(v)
        nbrs[v] = set()
        alive.discard(v)
        fill.pop(v)
        for u in dirty & alive:
            fill[u] = fill_of(u)
    return UndirectedGraph(g.n, g.edges | frozenset(fill_edges))


def maximal_cliques(g: UndirectedGraph) -> list[tuple[int, ...]]:
    """Maximal cliques of a chordal graph, each sorted, list sorted."""
    peo = _require_peo(g)
    pos = {v: i for i, v in enumerate(peo)}
    cand = {}
    for v in peo:
        cand[v] = frozenset([v, *(u for u in g.adj[v] if pos[u] > pos[v])])
    out = []
    for v in peo:
        k = cand[v]
        # only an earlier-eliminated neighbour's candidate can contain k
        earlier = (u for u in g.adj[v] if pos[u] < pos[v])
        if not any(k <= cand[u] for u in earlier):
            out.append(tuple(sorted(k)))
    return sorted(out)


def connected_components(g: UndirectedGraph) -> list[list[int]]:
    seen = [False] * g.n
    comps = []
    for s in range(g.n):
        if seen[s]:
            continue
        seen[s] = True
        comp, queue = [], deque([s])
        while queue:
            u = queue.popleft()
            comp.append(u)
            for w in g.adj[u]:
                if not seen[w]:
                    seen[w] = True
                    queue.append(w)
        comps.append(sorted(comp))
    return comps


def moralize(dag: DirectedGraph) -> UndirectedGraph:
    dag.topological_order()
    edges = set(dag.edges)
    for v in range(dag.n):
        ps = dag.parents(v)
        for i, a in enumerate(ps):
            for b in ps[i + 1:]:
                edges.add((a, b))
    return UndirectedGraph(dag.n, frozenset(edges))


def treewidth_of_chordal(g: UndirectedGraph) -> int:
    cliques = maximal_cliques(g)
    return max((len(c) for c in cliques), default=1) - 1
