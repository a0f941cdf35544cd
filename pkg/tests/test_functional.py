import math
import time

import numpy as np
import pytest

import dmdiv.functional as fn
from conftest import binary_vars
from dmdiv.baselines import (
    brute_force_f1,
    brute_force_f2,
    brute_force_f3,
    brute_force_functional,
    joint_vector,
)
from dmdiv.errors import ConsistencyError, LogOfZero, LogOfZeroOnSupport, NegativePowerOfZero, VariableMismatch
from dmdiv.factor import Factor
from dmdiv.functional import (
    Constant,
    FunctionalSpec,
    Power,
    build_computation_graph,
    evaluate_F,
    f1_assembled,
    f1_direct,
    f2,
    f2_paths,
    f3,
    log_product_sum,
    pairwise_ve,
)
from dmdiv.generate import chain_pair, random_model, random_pair, random_variables
from dmdiv.graph import UndirectedGraph, VariableTable
from dmdiv.model import DecomposableModel

SPECS = [
    FunctionalSpec(1.0, 0.0, Power(1.0), Power(-1.0)),
    FunctionalSpec(0.5, 0.5, Power(0.5), Power(0.5)),
    FunctionalSpec(2.0, -1.0, Power(-0.5), Power(0.0)),
    FunctionalSpec(0.0, 1.0, Power(-1.0), Power(1.0), log_base=2.0),
    FunctionalSpec(1.0, 1.0, Constant(0.25), Constant(0.5, 3.0)),
]


def pairs(rng, count, **kw):
    for k in range(count):
        n = int(rng.integers(3, 10))
        yield random_pair(rng, n, disconnected=(k % 3 == 0 and n > 3), **kw)


class TestComputationGraph:
    def test_identical_structures(self, rng):
        p, q = random_pair(rng, 5)
        cg = build_computation_graph(p, p)
        assert cg.h.edges == p.graph.edges
        assert cg.alpha_p == tuple(range(len(p.cliques)))

    def test_union_of_paths(self):
        vt = binary_vars(3)
        p = DecomposableModel(vt, [Factor((0, 1), (2, 2), [0.25] * 4), Factor((2,), (2,), [0.5] * 2)])
        q = DecomposableModel(vt, [Factor((0,), (2,), [0.5] * 2), Factor((1, 2), (2, 2), [0.25] * 4)])
        cg = build_computation_graph(p, q)
        assert {(0, 1), (1, 2)} <= cg.h.edges
        for i, c in enumerate(p.cliques):
            assert set(c) <= set(cg.cliques[cg.alpha_p[i]])

    def test_edgeless_models_give_two_trees(self):
        vt = binary_vars(2)
        m = DecomposableModel(vt, [Factor((0,), (2,), [0.5] * 2), Factor((1,), (2,), [0.5] * 2)])
        cg = build_computation_graph(m, m)
        assert not cg.connected and len(cg.forest.trees) == 2

    def test_variable_mismatch(self, rng):
        p, _ = random_pair(rng, 4)
        q, _ = random_pair(rng, 5)
        with pytest.raises(VariableMismatch):
            build_computation_graph(p, q)


class TestEvaluateF:
    @pytest.mark.parametrize("spec", SPECS)
    def test_matches_enumeration(self, rng, spec):
        for p, q in pairs(rng, 25, max_card=3):
            got = evaluate_F(build_computation_graph(p, q), spec, p, q)
            assert got == pytest.approx(brute_force_functional(p, q, spec), rel=1e-9, abs=1e-12)

    def test_disconnected_blocks_combine_via_tree_totals(self, rng):
        """F over two independent blocks equals the block-wise values recombined."""
        va, vb = binary_vars(3), VariableTable((f"Y{i}", 2) for i in range(2))
        ga = UndirectedGraph(3, frozenset({(0, 1), (1, 2)}))
        gb = UndirectedGraph(2, frozenset({(0, 1)}))
        pa, qa = random_model(va, ga, rng), random_model(va, ga, rng)
        pb, qb = random_model(vb, gb, rng), random_model(vb, gb, rng)
        vt = VariableTable([*zip(va.names, va.cards), *zip(vb.names, vb.cards)])

        def join(x, y):
            shifted = [Factor([v + 3 for v in f.scope], f.cards, f.values) for f in y.clique_marginals]
            return DecomposableModel(vt, list(x.clique_marginals) + shifted)

        p, q = join(pa, pb), join(qa, qb)
        a, b = 0.7, 0.6
        # F = sum P^a Q^b log(P Q): blockwise sums times the other block's f2
        spec = FunctionalSpec(a, b, Power(1.0), Power(1.0))
        whole = evaluate_F(build_computation_graph(p, q), spec, p, q)
        fa, fb = f2(pa, qa, a, b), f2(pb, qb, a, b)
        la = evaluate_F(build_computation_graph(pa, qa), spec, pa, qa)
        lb = evaluate_F(build_computation_graph(pb, qb), spec, pb, qb)
        assert whole == pytest.approx(la * fb + lb * fa, rel=1e-12)

    def test_log_of_zero_on_support(self, rng):
        vt = binary_vars(2)
        p = DecomposableModel(vt, [Factor((0, 1), (2, 2), [0.5, 0.5, 0.0, 0.0])])
        q = DecomposableModel(vt, [Factor((0, 1), (2, 2), [0.25] * 4)])
        assert f3(p, q, 1.0, 0.0, 1.0, 0.0) == pytest.approx(brute_force_f3(p, q, 1.0, 0.0, 1.0, 0.0))
        with pytest.raises(LogOfZeroOnSupport):
            f3(p, q, 0.0, 1.0, 1.0, 0.0)
        with pytest.raises(NegativePowerOfZero):
            f2(p, q, -1.0, 0.0)


class TestF2:
    def test_matches_enumeration_and_symmetry(self, rng):
        for p, q in pairs(rng, 20):
            for a, b in [(0.5, 0.5), (2.0, -1.0), (-0.5, -0.5), (0.0, 1.0)]:
                got = f2(p, q, a, b)
                assert got == pytest.approx(brute_force_f2(p, q, a, b), rel=1e-9)
                assert got == pytest.approx(f2(q, p, b, a), rel=1e-12)

    def test_normalisation(self, rng):
        p, q = random_pair(rng, 7)
        assert f2(p, q, 1.0, 0.0) == pytest.approx(1.0, abs=1e-12)
        assert f2(p, q, 0.0, 0.0) == pytest.approx(p.domain_size())

    def test_paths_agree_for_other_bases(self, rng):
        p, q = random_pair(rng, 6)
        for base in (2.0, 10.0, math.e):
            x, y = f2_paths(p, q, 0.3, 0.9, base=base)
            assert x == pytest.approx(y, rel=1e-12)

    def test_tight_tolerance_raises(self, rng, monkeypatch):
        p, q = random_pair(rng, 5)
        monkeypatch.setattr(fn, "f2_paths", lambda *a, **k: (1.0, 1.0 + 1e-6))
        with pytest.raises(ConsistencyError):
            fn.f2(p, q, 0.5, 0.5)

    def test_chain_scaling(self):
        """n=200 costs well under 8x n=100 (best of five runs)."""
        def best(n):
            p, q = chain_pair(n, np.random.default_rng(n))
            cg = build_computation_graph(p, q)
            times = []
            for _ in range(5):
                t0 = time.perf_counter()
                f2(p, q, 0.5, 0.5, cg)
                times.append(time.perf_counter() - t0)
            return min(times)
        assert best(200) < 8 * best(100)


class TestF1:
    def test_three_methods_agree(self, rng):
        for p, q in pairs(rng, 20, max_card=3):
            ref = brute_force_f1(p, q)
            assert f1_direct(p, q) == pytest.approx(ref, rel=1e-9)
            assert f1_assembled(p, q) == pytest.approx(ref, rel=1e-9)

    def test_log_product_pieces(self, rng):
        p, q = random_pair(rng, 6)
        lp, lq = np.log(joint_vector(p)), np.log(joint_vector(q))
        assert log_product_sum(p, q) == pytest.approx(math.fsum(lp * lq), rel=1e-10)
        assert log_product_sum(p, p) == pytest.approx(math.fsum(lp * lp), rel=1e-10)

    def test_zero_rejected(self):
        vt = binary_vars(1)
        p = DecomposableModel(vt, [Factor((0,), (2,), [1.0, 0.0])])
        with pytest.raises(LogOfZero):
            f1_direct(p, p)


class TestPairwiseVE:
    cards = (2, 3, 2, 2)

    def _brute(self, fb, fd):
        total = 0.0
        for x in np.ndindex(*self.cards):
            a = dict(enumerate(x))
            total += fb.lookup(a) * fd.lookup(a)
        return total

    @pytest.mark.parametrize("sb, sd", [((0,), (2,)), ((0, 1), (1, 2)), ((1,), (0, 1, 2)),
                                        ((0, 1), (0, 1)), ((), (3,))])
    def test_overlap_patterns(self, rng, sb, sd):
        fb = Factor(sb, [self.cards[v] for v in sb], rng.normal(size=[self.cards[v] for v in sb]) if sb else 1.5)
        fd = Factor(sd, [self.cards[v] for v in sd], rng.normal(size=[self.cards[v] for v in sd]))
        assert pairwise_ve(fb, fd, self.cards) == pytest.approx(self._brute(fb, fd), rel=1e-12)
