import itertools

import numpy as np
import pytest

from dmdiv.factor import Factor
from dmdiv.graph import DirectedGraph, VariableTable
from dmdiv.model import BayesianNetwork


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def binary_vars(n):
    return VariableTable((f"X{i}", 2) for i in range(n))


def random_bn(rng, n, max_parents=2, card=2):
    """BN over ``n`` variables with parents drawn from earlier variables."""
    variables = VariableTable((f"V{i}", card) for i in range(n))
    edges, cpts = set(), {}
    for v in range(n):
        k = int(rng.integers(0, min(max_parents, v) + 1))
        parents = sorted(int(u) for u in rng.choice(v, size=k, replace=False)) if k else []
        edges.update((u, v) for u in parents)
        shape = [card] * (len(parents) + 1)
        t = rng.gamma(1.0, size=shape)
        t /= t.sum(axis=-1, keepdims=True)
        cpts[v] = Factor.from_ordered(parents + [v], shape, t)
    return BayesianNetwork(variables, DirectedGraph(n, frozenset(edges)), cpts)


def all_assignments(cards):
    return np.array(list(itertools.product(*(range(c) for c in cards))), dtype=np.int64)
