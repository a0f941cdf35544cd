"""Random chordal structures and decomposable models."""

from __future__ import annotations

import numpy as np

from .factor import Factor
from .graph import UndirectedGraph, VariableTable, maximal_cliques
from .junction import build_forest, calibrate
from .model import DecomposableModel


def random_chordal_graph(n: int, treewidth: int, rng: np.random.Generator,
                         blocks: list[list[int]] | None = None,
                         p_new_component: float = 0.0) -> UndirectedGraph:
    """Chordal graph with cliques of at most ``treewidth + 1`` vertices.

    Vertices are inserted in a random order; each attaches to a random
    subset of a random existing clique, which keeps the reversed insertion
    order a perfect elimination order.  With ``blocks`` each block is built
    separately so no edge crosses blocks.
    """
    if blocks is None:
        blocks = [list(range(n))]
    edges = set()
    for block in blocks:
        order = list(rng.permutation(block))
        cliques: list[list[int]] = []
        for v in order:
            if not cliques or rng.random() < p_new_component:
                cliques.append([v])
                continue
            base = cliques[rng.integers(len(cliques))]
            k = int(rng.integers(1, min(treewidth, len(base)) + 1)) if treewidth > 0 else 0
            nbrs = [int(u) for u in rng.choice(base, size=k, replace=False)] if k else []
            for u in nbrs:
                edges.add((min(u, v), max(u, v)))
            cliques.append(nbrs + [v])
    return UndirectedGraph(n, frozenset(edges))


def chain_graph(n: int) -> UndirectedGraph:
    return UndirectedGraph(n, frozenset((i, i + 1) for i in range(n - 1)))


def random_model(variables: VariableTable, graph: UndirectedGraph, rng: np.random.Generator,
                 concentration: float = 1.0, zero_fraction: float = 0.0) -> DecomposableModel:
    """Decomposable model with random (Dirichlet-like) clique potentials.

    Random potentials on the maximal cliques are calibrated and normalised,
    which yields exactly consistent marginals.  ``zero_fraction`` zeroes a
    random share of potential cells (never all of one clique).
    """
    cards = variables.cards
    forest = build_forest(graph)
    pots = []
    for i, c in enumerate(forest.cliques):
        shape = [cards[v] for v in c]
        vals = rng.gamma(concentration, size=shape)
        if zero_fraction > 0:
            mask = rng.random(shape) < zero_fraction
            if mask.all():
                mask.flat[0] = False
            vals = np.where(mask, 0.0, vals)
        pots.append((Factor(c, shape, vals), i))
    cal = calibrate(forest, pots, cards)
    tables = [Factor(b.scope, b.cards, b.values / cal.tree_totals[forest.tree_of[i]])
              for i, b in enumerate(cal.beliefs)]
    return DecomposableModel(variables, tables)


def random_variables(n: int, rng: np.random.Generator, max_card: int = 2) -> VariableTable:
    return VariableTable((f"X{i}", int(rng.integers(2, max_card + 1))) for i in range(n))


def random_pair(rng: np.random.Generator, n: int, treewidth: int = 2, max_card: int = 2,
                disconnected: bool = False, concentration: float = 1.0,
                variables: VariableTable | None = None):
    """Two random models over the same variables.

    With ``disconnected`` the variables are split into two or more blocks
    and both graphs respect the split, so their union is disconnected.
    """
    variables = variables or random_variables(n, rng, max_card)
    blocks = None
    if disconnected:
        perm = [int(v) for v in rng.permutation(n)]
        k = int(rng.integers(2, max(2, n // 2) + 1))
        cuts = sorted(int(c) for c in rng.choice(np.arange(1, n), size=k - 1, replace=False))
        blocks = [perm[a:b] for a, b in zip([0, *cuts], [*cuts, n])]
    gp = random_chordal_graph(n, treewidth, rng, blocks)
    gq = random_chordal_graph(n, treewidth, rng, blocks)
    return (random_model(variables, gp, rng, concentration),
            random_model(variables, gq, rng, concentration))


def chain_pair(n: int, rng: np.random.Generator, card: int = 2):
    """Two random binary chain models over ``X0 - X1 - ... - X{n-1}``."""
    variables = VariableTable((f"X{i}", card) for i in range(n))
    g = chain_graph(n)
    return random_model(variables, g, rng), random_model(variables, g, rng)


__all__ = ["random_chordal_graph", "chain_graph", "random_model", "random_variables",
           "random_pair", "chain_pair", "maximal_cliques"]
