"""Exact evaluation of the functional ``F`` between two decomposable models.

``F(P, Q) = sum_x g[P](x) h[Q](x) L(g*[P](x) h*[Q](x))``

is evaluated without touching the joint domain.  Both models' cliques are
mapped (``alpha``) into the maximal cliques of a chordal computation graph
``h`` that contains both model graphs.  The per-clique factors ``P^jt_C ** a``
and ``Q^jt_C ** b`` are calibrated on the junction forest of ``h``; each
model clique then contributes ``R * sum L(g*[P^jt_C]) * beta_alpha(C)``,
``R`` being the product of the totals of every other tree of the forest.

The log-quadratic ``f1`` has no such product form and is evaluated by
pairwise variable elimination over clique/separator log tables instead.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ConsistencyError, LogOfZero, LogOfZeroOnSupport, VariableMismatch
from .factor import Factor, elementwise_log, elementwise_power, marginalize, weighted_sum
from .graph import UndirectedGraph, triangulate
from .junction import Calibration, JunctionForest, build_forest, calibrate
from .model import DecomposableModel


@dataclass(frozen=True)
class ComputationGraph:
    h: UndirectedGraph
    forest: JunctionForest
    alpha_p: tuple[int, ...]   # P clique id -> clique id in h
    alpha_q: tuple[int, ...]
    tau_p: tuple[int, ...]     # P clique id -> tree index in the forest of h
    tau_q: tuple[int, ...]

    @property
    def cliques(self):
        return self.forest.cliques

    @property
    def connected(self) -> bool:
        return len(self.forest.trees) == 1


def _smallest_container(forest: JunctionForest, holders, clique) -> int:
    vs = set(clique)
    for cid in holders[clique[0]]:
        if vs <= set(forest.cliques[cid]):
            return cid
    raise AssertionError(f"no clique of h contains {clique}")


def build_computation_graph(p: DecomposableModel, q: DecomposableModel) -> ComputationGraph:
    if p.vars != q.vars:
        raise VariableMismatch("models are over different variable tables")
    h = triangulate(p.graph.union(q.graph))
    forest = build_forest(h)
    holders = defaultdict(list)
    for cid, c in enumerate(forest.cliques):
        for v in c:
            holders[v].append(cid)
    alpha_p = tuple(_smallest_container(forest, holders, c) for c in p.cliques)
    alpha_q = tuple(_smallest_container(forest, holders, c) for c in q.cliques)
    return ComputationGraph(
        h, forest, alpha_p, alpha_q,
        tuple(forest.tree_of[a] for a in alpha_p),
        tuple(forest.tree_of[a] for a in alpha_q),
    )


@dataclass(frozen=True)
class Power:
    """Inner transform ``f -> f ** c``."""
    c: float


@dataclass(frozen=True)
class Constant:
    """Inner transform ``f -> base ** exponent`` regardless of ``f``."""
    exponent: float
    base: float = math.e


Star = Union[Power, Constant]


@dataclass(frozen=True)
class FunctionalSpec:
    g_exp: float
    h_exp: float
    g_star: Star
    h_star: Star
    log_base: float | None = None      # None: natural log

    def __post_init__(self):
        b = self.log_base
        if b is not None and (b <= 0 or b == 1):
            raise ValueError("log base must be positive and different from 1")

    def L(self, x: float) -> float:
        return math.log(x) if self.log_base is None else math.log(x, self.log_base)

    def lift(self, star: Star, f: Factor) -> tuple[tuple[int, ...], np.ndarray]:
        """``L(star[f])`` as ``(scope, array)``; constants give a 0-d array."""
        if isinstance(star, Constant):
            return (), np.asarray(self.L(star.base ** star.exponent))
        if star.c == 0:
            return f.scope, np.zeros(f.cards)
        scale = star.c if self.log_base is None else star.c / math.log(self.log_base)
        return f.scope, elementwise_log(f).values * scale


def compute_sp_beliefs(cg: ComputationGraph, spec: FunctionalSpec,
                       p: DecomposableModel, q: DecomposableModel) -> Calibration:
    """Calibrate the forest of ``h`` on ``{P^jt_C ** a} | {Q^jt_C ** b}``."""
    psi = [(elementwise_power(f, spec.g_exp), cg.alpha_p[i]) for i, f in enumerate(p.jt_factors)]
    psi += [(elementwise_power(f, spec.h_exp), cg.alpha_q[i]) for i, f in enumerate(q.jt_factors)]
    return calibrate(cg.forest, psi, p.vars.cards)


def evaluate_F(cg: ComputationGraph, spec: FunctionalSpec,
               p: DecomposableModel, q: DecomposableModel,
               cal: Calibration | None = None) -> float:
    return math.fsum(F_terms(cg, spec, p, q, cal))


def F_terms(cg: ComputationGraph, spec: FunctionalSpec,
            p: DecomposableModel, q: DecomposableModel,
            cal: Calibration | None = None) -> list[float]:
    """The per-model-clique contributions whose sum is ``F``."""
    if cal is None:
        cal = compute_sp_beliefs(cg, spec, p, q)
    terms = []
    for model, star, alpha, tau in ((p, spec.g_star, cg.alpha_p, cg.tau_p),
                                    (q, spec.h_star, cg.alpha_q, cg.tau_q)):
        for i, f in enumerate(model.jt_factors):
            inner = weighted_sum(cal.beliefs[alpha[i]], *spec.lift(star, f))
            if not math.isfinite(inner):
                raise LogOfZeroOnSupport(
                    f"log of a zero table entry on the support (clique {f.scope})")
            terms.append(cal.outside_constant(tau[i]) * inner)
    return terms


def _rel_close(x: float, y: float, rtol: float) -> bool:
    return abs(x - y) <= rtol * max(abs(x), abs(y)) or x == y


def f2_paths(p: DecomposableModel, q: DecomposableModel, a: float, b: float,
             cg: ComputationGraph | None = None, base: float = math.e) -> tuple[float, float]:
    """``sum_x P^a Q^b`` by two routes sharing one calibration.

    The first route evaluates ``F`` with constant inner transforms
    ``base ** (1 / (2 |C|))`` per clique and ``L = log_base``: each model's
    constants multiply to ``base ** 0.5``, so ``L`` of their product is 1.
    The second is the product of the forest's tree totals.
    """
    cg = cg or build_computation_graph(p, q)
    spec = FunctionalSpec(
        a, b,
        Constant(1.0 / (2 * len(p.cliques)), base),
        Constant(1.0 / (2 * len(q.cliques)), base),
        None if base == math.e else base,
    )
    cal = compute_sp_beliefs(cg, spec, p, q)
    return evaluate_F(cg, spec, p, q, cal), math.prod(cal.tree_totals)


def f2(p: DecomposableModel, q: DecomposableModel, a: float, b: float,
       cg: ComputationGraph | None = None, base: float = math.e, rtol: float = 1e-9) -> float:
    via_f, via_totals = f2_paths(p, q, a, b, cg, base)
    if not _rel_close(via_f, via_totals, rtol):
        raise ConsistencyError(f"f2 routes disagree: {via_f!r} vs {via_totals!r}")
    return via_f


def f3_spec(a: float, b: float, c: float, d: float) -> FunctionalSpec:
    return FunctionalSpec(a, b, Power(c), Power(d))


def f3(p: DecomposableModel, q: DecomposableModel, a: float, b: float, c: float, d: float,
       cg: ComputationGraph | None = None) -> float:
    """``sum_x P^a Q^b log(P^c Q^d)``."""
    cg = cg or build_computation_graph(p, q)
    return evaluate_F(cg, f3_spec(a, b, c, d), p, q)


def f3_with_magnitude(p, q, a, b, c, d, cg=None) -> tuple[float, float]:
    """:func:`f3` together with the sum of absolute clique contributions."""
    cg = cg or build_computation_graph(p, q)
    terms = F_terms(cg, f3_spec(a, b, c, d), p, q)
    return math.fsum(terms), math.fsum(abs(t) for t in terms)


# -- log-quadratic functional ------------------------------------------------

def _log_terms(m: DecomposableModel, sign: float) -> list[tuple[float, Factor]]:
    """Signed log tables: ``log P = sum_C log P_C - sum_S log P_S``."""
    out = [(sign, elementwise_log(f)) for f in m.clique_marginals]
    out += [(-sign, elementwise_log(f)) for _, f in m.separator_marginals]
    for _, f in out:
        if not np.all(np.isfinite(f.values)):
            raise LogOfZero(f"zero probability in table over {f.scope}")
    return out


def _outside_cells(cards, inside) -> float:
    size = 1.0
    for v, c in enumerate(cards):
        if v not in inside:
            size *= float(c)
    return size


def pairwise_ve(fb: Factor, fd: Factor, cards) -> float:
    """``sum_x fb(x_B) fd(x_D)`` over the full domain described by ``cards``.

    Variables outside ``B | D`` contribute their domain size; shared
    variables are kept while each factor sums out its private ones.
    """
    outside = _outside_cells(cards, set(fb.scope) | set(fd.scope))
    shared = sorted(set(fb.scope) & set(fd.scope))
    if not shared:
        return outside * fb.total() * fd.total()
    mb, md = marginalize(fb, shared), marginalize(fd, shared)
    return outside * float(np.sum(mb.values * md.values))


def log_product_sum(p: DecomposableModel, q: DecomposableModel) -> float:
    """``sum_x log P(x) log Q(x)`` as signed pairwise VE terms.

    Every (clique or separator of P, clique or separator of Q) pair is
    eliminated separately: ``(C_P, C_Q)`` and ``(S_P, S_Q)`` add,
    the mixed blocks subtract.
    """
    cards = p.vars.cards
    tp, tq = _log_terms(p, 1.0), _log_terms(q, 1.0)
    return math.fsum(sb * sd * pairwise_ve(fb, fd, cards) for sb, fb in tp for sd, fd in tq)


def f1_assembled(p: DecomposableModel, q: DecomposableModel) -> float:
    """``0.5 [S(P,P) + S(Q,Q) - 2 S(P,Q)]`` with ``S`` from :func:`log_product_sum`."""
    return 0.5 * (log_product_sum(p, p) + log_product_sum(q, q) - 2.0 * log_product_sum(p, q))


def f1_direct(p: DecomposableModel, q: DecomposableModel) -> float:
    """``0.5 sum_x (log P(x) - log Q(x))^2`` in time polynomial in ``n``.

    Expands the square of the signed sum of clique/separator log tables of
    both models.  Under the uniform measure on the domain, pairs of tables
    with disjoint scopes are uncorrelated, so

        sum_x (sum_i s_i l_i)^2 = |X| [(sum_i s_i m_i)^2 + sum_{i,j overlapping} s_i s_j cov_ij]

    with ``m_i`` the mean of table ``i`` and ``cov_ij`` computed by
    eliminating every non-shared variable.  Only overlapping pairs are
    visited.
    """
    if p.vars != q.vars:
        raise VariableMismatch("models are over different variable tables")
    terms = _log_terms(p, 1.0) + _log_terms(q, -1.0)
    means = [f.total() / f.size for _, f in terms]
    holders = defaultdict(list)
    for i, (_, f) in enumerate(terms):
        for v in f.scope:
            holders[v].append(i)
    pairs = set()
    for ids in holders.values():
        for x, i in enumerate(ids):
            for j in ids[x:]:
                pairs.add((i, j))
    cov = []
    for i, j in sorted(pairs):
        (si, fi), (sj, fj) = terms[i], terms[j]
        shared = sorted(set(fi.scope) & set(fj.scope))
        mi, mj = marginalize(fi, shared), marginalize(fj, shared)
        cells = mi.size
        e_ij = float(np.sum(mi.values * mj.values)) * cells / (fi.size * fj.size)
        weight = 1.0 if i == j else 2.0
        cov.append(weight * si * sj * (e_ij - means[i] * means[j]))
    mean_part = math.fsum(s * m for (s, _), m in zip(terms, means))
    return 0.5 * p.domain_size() * (mean_part * mean_part + math.fsum(cov))
