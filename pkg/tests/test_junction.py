import math

import numpy as np
import pytest

from dmdiv.factor import Factor, marginalize, multiply, product
from dmdiv.generate import random_chordal_graph
from dmdiv.graph import UndirectedGraph
from dmdiv.junction import build_forest, calibrate, has_running_intersection


def chain(n):
    return UndirectedGraph(n, frozenset((i, i + 1) for i in range(n - 1)))


class TestBuildForest:
    def test_chain_is_one_path(self):
        f = build_forest(chain(4))
        assert f.cliques == ((0, 1), (1, 2), (2, 3))
        assert len(f.trees) == 1 and f.trees[0].root == 0
        assert sorted(f.edges()) == [(0, 1), (1, 2)]

    def test_disconnected_graph_gives_forest(self):
        f = build_forest(UndirectedGraph(2))
        assert len(f.trees) == 2
        assert f.tree_of == (0, 1)

    def test_separator(self):
        f = build_forest(chain(3))
        assert f.separator(0, 1) == (1,)

    def test_running_intersection_on_random_graphs(self, rng):
        for _ in range(100):
            n = int(rng.integers(1, 15))
            g = random_chordal_graph(n, int(rng.integers(1, 4)), rng, p_new_component=0.2)
            f = build_forest(g)
            assert has_running_intersection(f)
            # a spanning forest over the cliques of each component
            assert len(f.edges()) == len(f.cliques) - len(f.trees)


class TestCalibrate:
    def _brute_marginal(self, factors, n, cards, keep):
        full = product(factors)
        pad = Factor.ones(tuple(range(n)), cards)
        return marginalize(multiply(full, pad), keep)

    def test_beliefs_are_marginals_of_the_product(self, rng):
        for _ in range(30):
            n = int(rng.integers(2, 8))
            g = random_chordal_graph(n, 2, rng)
            f = build_forest(g)
            cards = [int(c) for c in rng.integers(2, 4, size=n)]
            pots = [(Factor(c, [cards[v] for v in c], rng.random([cards[v] for v in c])), i)
                    for i, c in enumerate(f.cliques)]
            cal = calibrate(f, pots, cards)
            for i, c in enumerate(f.cliques):
                ref = self._brute_marginal([p for p, _ in pots], n, cards, c)
                np.testing.assert_allclose(cal.beliefs[i].values, ref.values, rtol=1e-12)
            total = self._brute_marginal([p for p, _ in pots], n, cards, ()).total()
            assert math.prod(cal.tree_totals) == pytest.approx(total, rel=1e-12)

    def test_forest_totals_and_outside_constant(self):
        f = build_forest(UndirectedGraph(2))
        pots = [(Factor((0,), (2,), [1.0, 2.0]), 0), (Factor((1,), (2,), [3.0, 4.0]), 1)]
        cal = calibrate(f, pots, [2, 2])
        assert cal.tree_totals == (3.0, 7.0)
        assert cal.outside_constant(0) == 7.0
        np.testing.assert_allclose(cal.beliefs[0].flat, [1.0, 2.0])

    def test_unassigned_cliques_start_from_ones(self):
        f = build_forest(chain(3))
        cal = calibrate(f, [], [2, 2, 2])
        assert cal.tree_totals == (8.0,)
