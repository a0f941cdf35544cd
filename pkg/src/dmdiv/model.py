"""Decomposable models and the Bayesian networks they are built from.

A :class:`DecomposableModel` stores one normalised marginal per maximal clique
of a chordal graph.  Separator marginals are derived from the junction forest
and checked for consistency; the joint is
``prod_C P_C(x_C) / prod_S P_S(x_S)``.
"""

from __future__ import annotations

import math
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    EmptyData,
    InconsistentModel,
    ModelError,
    NoSuchEdge,
    NonChordalInput,
    OutOfDomainValue,
)
from .factor import Factor, divide, marginalize, multiply
from .graph import (
    DirectedGraph,
    UndirectedGraph,
    VariableTable,
    is_chordal,
    maximal_cliques,
    moralize,
    triangulate,
)
from .junction import JunctionForest, build_forest, calibrate

TOL = 1e-9


class DecomposableModel:
    """Chordal graph plus consistent clique marginals.

    Parameters
    ----------
    variables : VariableTable
    tables : sequence of Factor
        One normalised table per maximal clique, any order.  Every variable
        must appear in at least one table.
    check : bool
        Validate normalisation and marginal consistency (default on).
    """

    def __init__(self, variables: VariableTable, tables: Sequence[Factor], check: bool = True):
        self.vars = variables
        cards = variables.cards
        by_scope = {}
        for t in tables:
            if any(cards[v] != c for v, c in zip(t.scope, t.cards)):
                raise ModelError(f"table over {t.scope} disagrees with variable cardinalities")
            if t.scope in by_scope:
                raise ModelError(f"duplicate clique {t.scope}")
            by_scope[t.scope] = t
        self.graph = UndirectedGraph.from_cliques(len(variables), by_scope)
        if not is_chordal(self.graph)[0]:
            raise NonChordalInput("clique structure does not form a chordal graph")
        if set(maximal_cliques(self.graph)) != set(by_scope):
            raise ModelError("tables must be exactly the maximal cliques of their graph "
                             "(every variable covered, no clique inside another)")
        self.forest: JunctionForest = build_forest(self.graph)
        self.clique_marginals: tuple[Factor, ...] = tuple(by_scope[c] for c in self.forest.cliques)
        seps = []
        for parent, child in self.forest.edges():
            s = self.forest.separator(parent, child)
            seps.append(((parent, child), marginalize(self.clique_marginals[parent], s)))
        self.separator_marginals: tuple[tuple[tuple[int, int], Factor], ...] = tuple(seps)
        if check:
            self.validate()

    @property
    def cliques(self) -> tuple[tuple[int, ...], ...]:
        return self.forest.cliques

    @property
    def separators(self) -> list[tuple[int, ...]]:
        return [f.scope for _, f in self.separator_marginals]

    def validate(self, tol: float = TOL) -> None:
        for f in self.clique_marginals:
            if np.any(f.values < 0):
                raise InconsistentModel(f"negative probability in clique {f.scope}")
            if abs(f.total() - 1.0) > tol:
                raise InconsistentModel(f"clique {f.scope} sums to {f.total()!r}")
        for (parent, child), ps in self.separator_marginals:
            other = marginalize(self.clique_marginals[child], ps.scope)
            if np.max(np.abs(other.values - ps.values), initial=0.0) > tol:
                raise InconsistentModel(
                    f"cliques {self.cliques[parent]} and {self.cliques[child]} disagree on {ps.scope}")

    @cached_property
    def jt_factors(self) -> tuple[Factor, ...]:
        """Per-clique factors whose product is the joint.

        Each tree is rooted at its smallest clique; every separator is divided
        out of the child clique of its edge.
        """
        out = list(self.clique_marginals)
        for (_, child), ps in self.separator_marginals:
            try:
                out[child] = divide(out[child], ps)
            except ZeroDivisionError as exc:
                raise InconsistentModel(str(exc)) from exc
        return tuple(out)

    def domain_size(self) -> float:
        return self.vars.domain_size()

    def marginal(self, variables: Sequence[int]) -> Factor:
        """Exact marginal over variables that share a clique."""
        cid = self.forest.containing(variables)
        return marginalize(self.clique_marginals[cid], variables)

    def __repr__(self) -> str:
        return f"DecomposableModel(n={len(self.vars)}, cliques={list(self.cliques)})"


def jt_factorization(m: DecomposableModel) -> tuple[Factor, ...]:
    return m.jt_factors


def _as_rows(m_vars: VariableTable, x) -> np.ndarray:
    if isinstance(x, Mapping):
        x = [x[name] for name in m_vars.names]
    rows = np.atleast_2d(np.asarray(x, dtype=np.int64))
    if rows.shape[1] != len(m_vars):
        raise OutOfDomainValue(f"expected {len(m_vars)} values per assignment")
    cards = np.asarray(m_vars.cards)
    if np.any(rows < 0) or np.any(rows >= cards):
        raise OutOfDomainValue("assignment outside the variable domains")
    return rows


def joint_probabilities(m: DecomposableModel, rows) -> np.ndarray:
    """Vectorised :func:`evaluate_joint` over an ``(N, n)`` array of assignments."""
    rows = _as_rows(m.vars, rows)
    num = np.ones(len(rows))
    for f in m.clique_marginals:
        num *= f.values[tuple(rows[:, list(f.scope)].T)]
    den = np.ones(len(rows))
    for _, f in m.separator_marginals:
        den *= f.values[tuple(rows[:, list(f.scope)].T)]
    if np.any((den == 0) & (num != 0)):
        raise InconsistentModel("separator marginal is zero under a positive clique marginal")
    return np.divide(num, den, out=np.zeros_like(num), where=den != 0)


def evaluate_joint(m: DecomposableModel, x) -> float:
    """``P(x)`` for one full assignment (sequence by id or mapping by name)."""
    return float(joint_probabilities(m, x)[0])


def mle_fit(structure: UndirectedGraph, variables: VariableTable, data,
            smoothing: float = 0.0) -> DecomposableModel:
    """Maximum-likelihood decomposable model for complete data.

    With ``smoothing = s > 0`` the empirical joint is mixed with a uniform
    pseudo-sample of ``s * max_C |X_C|`` rows, so the largest clique table
    gains ``s`` per cell and every other table gains the matching amount.
    All tables stay marginals of one distribution, hence consistent.
    """
    if smoothing < 0:
        raise ValueError("smoothing must be >= 0")
    if not is_chordal(structure)[0]:
        raise NonChordalInput("structure is not chordal")
    rows = _as_rows(variables, data) if len(data) else np.empty((0, len(variables)), dtype=np.int64)
    if len(rows) == 0:
        raise EmptyData("no data rows")
    cards = variables.cards
    cliques = maximal_cliques(structure)
    sizes = [math.prod(cards[v] for v in c) for c in cliques]
    pseudo = smoothing * max(sizes)
    tables = []
    for c, size in zip(cliques, sizes):
        cc = [cards[v] for v in c]
        flat = np.ravel_multi_index(tuple(rows[:, list(c)].T), cc)
        counts = np.bincount(flat, minlength=size).astype(np.float64)
        counts += pseudo / size
        tables.append(Factor(c, cc, counts / counts.sum()))
    return DecomposableModel(variables, tables)


def log_likelihood(m: DecomposableModel, data) -> float:
    p = joint_probabilities(m, data)
    with np.errstate(divide="ignore"):
        return float(np.sum(np.log(p)))


class BayesianNetwork:
    """DAG with one conditional table per node.

    ``cpts[v]`` is a :class:`Factor` over ``{v} | parents(v)`` normalised
    over ``v`` for each parent configuration.
    """

    def __init__(self, variables: VariableTable, dag: DirectedGraph, cpts: Mapping[int, Factor],
                 check: bool = True):
        if dag.n != len(variables):
            raise ModelError("DAG size differs from variable count")
        self.vars = variables
        self.dag = dag
        self.order = dag.topological_order()
        self.cpts = {int(v): f for v, f in cpts.items()}
        for v in range(dag.n):
            f = self.cpts.get(v)
            if f is None:
                raise ModelError(f"missing CPT for {variables.names[v]}")
            family = tuple(sorted([v, *dag.parents(v)]))
            if f.scope != family:
                raise ModelError(f"CPT of {variables.names[v]} has scope {f.scope}, expected {family}")
            if any(variables.cards[u] != c for u, c in zip(f.scope, f.cards)):
                raise ModelError(f"CPT of {variables.names[v]} has wrong cardinalities")
        if check:
            self.validate()

    def parents(self, v: int) -> list[int]:
        return self.dag.parents(v)

    def validate(self, tol: float = TOL) -> None:
        for v, f in self.cpts.items():
            if np.any(f.values < 0):
                raise ModelError(f"negative entry in CPT of {self.vars.names[v]}")
            cols = marginalize(f, [u for u in f.scope if u != v])
            if np.max(np.abs(cols.values - 1.0)) > tol:
                raise ModelError(f"CPT of {self.vars.names[v]} is not normalised")

    def joint_probabilities(self, rows) -> np.ndarray:
        rows = _as_rows(self.vars, rows)
        out = np.ones(len(rows))
        for f in self.cpts.values():
            out *= f.values[tuple(rows[:, list(f.scope)].T)]
        return out


def bn_to_dm(bn: BayesianNetwork) -> DecomposableModel:
    """Exact decomposable model of a BN: moralise, triangulate, calibrate."""
    h = triangulate(moralize(bn.dag))
    forest = build_forest(h)
    assigned = [(f, forest.containing(f.scope)) for _, f in sorted(bn.cpts.items())]
    cal = calibrate(forest, assigned, bn.vars.cards)
    tables = []
    for i, b in enumerate(cal.beliefs):
        # each tree total is 1 up to rounding; renormalise to absorb it
        tables.append(Factor(b.scope, b.cards, b.values / cal.tree_totals[forest.tree_of[i]]))
    return DecomposableModel(bn.vars, tables)


def _resolve(bn: BayesianNetwork, v) -> int:
    return bn.vars.id_of(v) if isinstance(v, str) else int(v)


def delete_edge(bn: BayesianNetwork, parent, child) -> BayesianNetwork:
    """Remove ``parent -> child``, averaging the child's CPT over the parent.

    ``P'(x | z) = sum_y P(x | y, z) P(y)`` with ``P(y)`` the exact marginal of
    the removed parent in ``bn``.
    """
    y, x = _resolve(bn, parent), _resolve(bn, child)
    if (y, x) not in bn.dag.edges:
        raise NoSuchEdge(f"{bn.vars.names[y]} -> {bn.vars.names[x]} is not an edge")
    p_y = bn_to_dm(bn).marginal([y])
    new_cpt = marginalize(multiply(bn.cpts[x], p_y), [v for v in bn.cpts[x].scope if v != y])
    cpts = dict(bn.cpts)
    cpts[x] = new_cpt
    return BayesianNetwork(bn.vars, DirectedGraph(bn.dag.n, bn.dag.edges - {(y, x)}), cpts)


def delete_edges(bn: BayesianNetwork, edges) -> BayesianNetwork:
    """Apply :func:`delete_edge` for each ``(parent, child)`` in order."""
    for y, x in edges:
        bn = delete_edge(bn, y, x)
    return bn
