"""Junction forests and two-pass sum-product calibration.

Calibration is division free (Shafer-Shenoy): a message from clique ``i`` to a
neighbour ``j`` is the product of ``i``'s initial potential and every message
``i`` received from its other neighbours, summed down to the separator.  No
normalisation is applied; callers need raw sums such as ``sum P^a Q^b``.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Sequence

from .factor import Factor, marginalize, multiply
from .errors import ScopeNotContained
from .graph import UndirectedGraph, connected_components, maximal_cliques


@dataclass(frozen=True)
class JunctionTree:
    root: int
    order: tuple[int, ...]            # preorder from the root
    parent: dict                      # clique id -> parent clique id (root absent)
    children: dict                    # clique id -> tuple of child ids

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(self.parent[c], c) for c in self.order if c in self.parent]


@dataclass(frozen=True)
class JunctionForest:
    n: int
    cliques: tuple[tuple[int, ...], ...]
    trees: tuple[JunctionTree, ...]
    tree_of: tuple[int, ...]

    def separator(self, a: int, b: int) -> tuple[int, ...]:
        return tuple(sorted(set(self.cliques[a]) & set(self.cliques[b])))

    def edges(self) -> list[tuple[int, int]]:
        return [e for t in self.trees for e in t.edges]

    def containing(self, variables: Sequence[int]) -> int:
        """Id of the lexicographically smallest clique containing ``variables``."""
        vs = set(variables)
        for i, c in enumerate(self.cliques):
            if vs <= set(c):
                return i
        raise ScopeNotContained(f"no clique contains {sorted(vs)}")


class _UnionFind:
    def __init__(self, n):
        self.up = list(range(n))

    def find(self, x):
        while self.up[x] != x:
            self.up[x] = self.up[self.up[x]]
            x = self.up[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.up[max(ra, rb)] = min(ra, rb)
        return True


def build_forest(g: UndirectedGraph) -> JunctionForest:
    """One maximum-weight spanning clique tree per connected component."""
    cliques = tuple(maximal_cliques(g))
    holders = defaultdict(list)
    for i, c in enumerate(cliques):
        for v in c:
            holders[v].append(i)
    weights = {}
    for ids in holders.values():
        for x, a in enumerate(ids):
            for b in ids[x + 1:]:
                if (a, b) not in weights:
                    weights[a, b] = len(set(cliques[a]) & set(cliques[b]))
    uf = _UnionFind(len(cliques))
    adj = defaultdict(list)
    for (a, b), w in sorted(weights.items(), key=lambda kv: (-kv[1], kv[0])):
        if uf.union(a, b):
            adj[a].append(b)
            adj[b].append(a)

    comp_of = {}
    for k, comp in enumerate(connected_components(g)):
        for v in comp:
            comp_of[v] = k
    roots = {}
    for i, c in enumerate(cliques):
        roots.setdefault(comp_of[c[0]], i)

    trees, tree_of = [], [0] * len(cliques)
    for _, root in sorted(roots.items(), key=lambda kv: kv[1]):
        parent, children, order = {}, {}, []
        stack = [root]
        while stack:
            c = stack.pop()
            order.append(c)
            tree_of[c] = len(trees)
            kids = tuple(sorted(x for x in adj[c] if x != parent.get(c)))
            children[c] = kids
            for k in kids:
                parent[k] = c
            stack.extend(reversed(kids))
        trees.append(JunctionTree(root, tuple(order), parent, children))
    return JunctionForest(g.n, cliques, tuple(trees), tuple(tree_of))


def has_running_intersection(forest: JunctionForest) -> bool:
    """Check that, per tree, the cliques holding any variable form a subtree."""
    for t in forest.trees:
        members = set(t.order)
        for v in {v for c in t.order for v in forest.cliques[c]}:
            holding = {c for c in members if v in forest.cliques[c]}
            # a subset of a tree is connected iff exactly one member lacks a
            # parent inside the subset
            tops = [c for c in holding if t.parent.get(c) not in holding]
            if len(tops) != 1:
                return False
    return True


@dataclass(frozen=True)
class Calibration:
    forest: JunctionForest
    beliefs: tuple[Factor, ...]
    tree_totals: tuple[float, ...]

    def belief(self, clique: int) -> Factor:
        return self.beliefs[clique]

    def outside_constant(self, tree: int) -> float:
        """Product of the totals of every tree except ``tree``."""
        return math.prod(r for i, r in enumerate(self.tree_totals) if i != tree)


def belief_total(cal: Calibration, tree: int) -> float:
    return cal.tree_totals[tree]


def _prod(factors):
    out = factors[0]
    for f in factors[1:]:
        out = multiply(out, f)
    return out


def calibrate(forest: JunctionForest, factors: Sequence[tuple[Factor, int]],
              cards: Sequence[int]) -> Calibration:
    """Collect/distribute sum-product over every tree of ``forest``.

    ``factors`` pairs each factor with the id of the clique it is assigned
    to; unassigned cliques start from an all-ones potential.  After the call
    each belief equals the sum, over all variables of the tree outside the
    clique, of the product of the tree's factors.
    """
    psi = []
    for c in forest.cliques:
        psi.append(Factor.ones(c, [cards[v] for v in c]))
    for f, cid in factors:
        if not set(f.scope) <= set(forest.cliques[cid]):
            raise ScopeNotContained(f"factor scope {f.scope} not in clique {forest.cliques[cid]}")
        psi[cid] = multiply(psi[cid], f)

    beliefs: list = [None] * len(forest.cliques)
    totals = []
    for t in forest.trees:
        up, down = {}, {}
        for c in reversed(t.order):
            msg = _prod([psi[c], *(up[k] for k in t.children[c])])
            if c in t.parent:
                up[c] = marginalize(msg, forest.separator(c, t.parent[c]))
            else:
                beliefs[c] = msg
        for c in t.order:
            head = [psi[c]] + ([down[c]] if c in down else [])
            kids = t.children[c]
            if c != t.root:
                beliefs[c] = _prod(head + [up[k] for k in kids])
            if not kids:
                continue
            # prefix/suffix products keep the fan-out linear in the child count
            prefix = [_prod(head)]
            for k in kids[:-1]:
                prefix.append(multiply(prefix[-1], up[k]))
            suffix = None
            for j in range(len(kids) - 1, -1, -1):
                k = kids[j]
                full = prefix[j] if suffix is None else multiply(prefix[j], suffix)
                down[k] = marginalize(full, forest.separator(c, k))
                suffix = up[k] if suffix is None else multiply(suffix, up[k])
        totals.append(beliefs[t.root].total())
    return Calibration(forest, tuple(beliefs), tuple(totals))
