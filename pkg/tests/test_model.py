import itertools
import json

import numpy as np
import pytest

from conftest import all_assignments, binary_vars, random_bn
from dmdiv.baselines import forward_sample, joint_vector
from dmdiv.errors import EmptyData, InconsistentModel, NoSuchEdge, NonChordalInput, OutOfDomainValue
from dmdiv.factor import Factor
from dmdiv.fileio import (
    bn_from_dict,
    bn_to_dict,
    dm_from_dict,
    dm_to_dict,
    load_csv,
    load_dm,
    load_structure,
    save_csv,
    save_dm,
)
from dmdiv.generate import random_model, random_chordal_graph, random_variables
from dmdiv.graph import DirectedGraph, UndirectedGraph, VariableTable
from dmdiv.model import (
    BayesianNetwork,
    DecomposableModel,
    bn_to_dm,
    delete_edge,
    evaluate_joint,
    jt_factorization,
    mle_fit,
)


def chain_dm(tables):
    vt = binary_vars(len(tables) + 1)
    return DecomposableModel(vt, [Factor((i, i + 1), (2, 2), t) for i, t in enumerate(tables)])


class TestDecomposableModel:
    def test_single_clique(self):
        m = DecomposableModel(binary_vars(2), [Factor((0, 1), (2, 2), [0.1, 0.2, 0.3, 0.4])])
        assert evaluate_joint(m, [1, 0]) == pytest.approx(0.3)

    def test_uniform_chain(self):
        m = chain_dm([[0.25] * 4] * 2)
        for x in itertools.product(range(2), repeat=3):
            assert evaluate_joint(m, x) == pytest.approx(1 / 8)

    def test_mapping_assignment(self):
        m = chain_dm([[0.1, 0.2, 0.3, 0.4]])
        assert evaluate_joint(m, {"X0": 0, "X1": 1}) == pytest.approx(0.2)

    def test_out_of_domain(self):
        with pytest.raises(OutOfDomainValue):
            evaluate_joint(chain_dm([[0.25] * 4]), [0, 2])

    def test_inconsistent_marginals_rejected(self):
        with pytest.raises(InconsistentModel):
            chain_dm([[0.1, 0.2, 0.3, 0.4], [0.25] * 4])

    def test_random_models_normalised_and_factorised(self, rng):
        for _ in range(30):
            n = int(rng.integers(2, 9))
            vt = random_variables(n, rng, max_card=3)
            m = random_model(vt, random_chordal_graph(n, 3, rng), rng)
            joint = joint_vector(m)
            assert joint.sum() == pytest.approx(1.0, abs=1e-8)
            prod = np.ones(len(joint))
            rows = all_assignments(vt.cards)
            for f in jt_factorization(m):
                prod *= f.values[tuple(rows[:, list(f.scope)].T)]
            np.testing.assert_allclose(prod, joint, rtol=1e-10)

    def test_zero_cells_allowed(self, rng):
        vt = binary_vars(4)
        m = random_model(vt, random_chordal_graph(4, 2, rng), rng, zero_fraction=0.3)
        assert joint_vector(m).sum() == pytest.approx(1.0)


class TestMleFit:
    def test_point_mass(self):
        g = UndirectedGraph(3, frozenset({(0, 1), (1, 2)}))
        m = mle_fit(g, binary_vars(3), [[1, 0, 1]] * 5)
        assert evaluate_joint(m, [1, 0, 1]) == pytest.approx(1.0)

    def test_independent_uniform(self):
        m = mle_fit(UndirectedGraph(2), binary_vars(2), [[0, 0], [0, 1], [1, 0], [1, 1]])
        for f in m.clique_marginals:
            np.testing.assert_allclose(f.flat, [0.5, 0.5])

    def test_recovers_chain_within_three_standard_errors(self, rng):
        truth = chain_dm([[0.3, 0.2, 0.1, 0.4], [0.2, 0.2, 0.5, 0.1]])
        data = forward_sample(truth, 200, seed=3).rows
        fit = mle_fit(truth.graph, truth.vars, data)
        for f, t in zip(fit.clique_marginals, truth.clique_marginals):
            se = np.sqrt(t.values * (1 - t.values) / 200)
            assert np.all(np.abs(f.values - t.values) <= 3 * se)

    def test_smoothing_gives_positive_consistent_tables(self):
        g = UndirectedGraph(3, frozenset({(0, 1), (1, 2)}))
        m = mle_fit(g, binary_vars(3), [[0, 0, 0]], smoothing=1.0)
        assert all(np.all(f.values > 0) for f in m.clique_marginals)
        m.validate(1e-12)

    def test_zero_smoothing_consistent(self, rng):
        g = UndirectedGraph(4, frozenset({(0, 1), (1, 2), (1, 3)}))
        m = mle_fit(g, binary_vars(4), rng.integers(0, 2, size=(50, 4)))
        m.validate(1e-15)

    def test_errors(self):
        with pytest.raises(EmptyData):
            mle_fit(UndirectedGraph(2), binary_vars(2), [])
        cyc = UndirectedGraph(4, frozenset({(0, 1), (1, 2), (2, 3), (0, 3)}))
        with pytest.raises(NonChordalInput):
            mle_fit(cyc, binary_vars(4), [[0, 0, 0, 0]])


class TestBayesianNetworks:
    def test_single_node(self):
        bn = BayesianNetwork(VariableTable([("A", 2)]), DirectedGraph(1),
                             {0: Factor((0,), (2,), [0.3, 0.7])})
        m = bn_to_dm(bn)
        assert m.cliques == ((0,),)
        np.testing.assert_allclose(m.clique_marginals[0].flat, [0.3, 0.7])

    def test_v_structure_uniform(self):
        vt = binary_vars(3)
        cpts = {0: Factor((0,), (2,), [0.5] * 2), 1: Factor((1,), (2,), [0.5] * 2),
                2: Factor((0, 1, 2), (2, 2, 2), [0.5] * 8)}
        m = bn_to_dm(BayesianNetwork(vt, DirectedGraph(3, frozenset({(0, 2), (1, 2)})), cpts))
        assert m.cliques == ((0, 1, 2),)
        np.testing.assert_allclose(m.clique_marginals[0].flat, [1 / 8] * 8)

    def test_random_bn_joint_matches_cpt_product(self, rng):
        for _ in range(10):
            bn = random_bn(rng, 5)
            m = bn_to_dm(bn)
            rows = all_assignments(bn.vars.cards)
            np.testing.assert_allclose(joint_vector(m), bn.joint_probabilities(rows), rtol=1e-10)

    def test_delete_edge_symmetric_mixture(self):
        vt = VariableTable([("Y", 2), ("X", 2)])
        cpts = {0: Factor((0,), (2,), [0.5, 0.5]),
                1: Factor.from_ordered([0, 1], [2, 2], [0.9, 0.1, 0.1, 0.9])}
        bn = BayesianNetwork(vt, DirectedGraph(2, frozenset({(0, 1)})), cpts)
        out = delete_edge(bn, "Y", "X")
        np.testing.assert_allclose(out.cpts[1].flat, [0.5, 0.5])
        assert out.dag.edges == frozenset()
        assert out.cpts[0] is bn.cpts[0]

    def test_delete_edge_ignored_parent(self, rng):
        vt = VariableTable([("Y", 2), ("X", 3)])
        col = [0.2, 0.3, 0.5]
        cpts = {0: Factor((0,), (2,), [0.4, 0.6]), 1: Factor.from_ordered([0, 1], [2, 3], col * 2)}
        out = delete_edge(BayesianNetwork(vt, DirectedGraph(2, frozenset({(0, 1)})), cpts), 0, 1)
        np.testing.assert_allclose(out.cpts[1].flat, col)

    def test_delete_edge_keeps_normalisation(self, rng):
        for _ in range(10):
            bn = random_bn(rng, 6, max_parents=3)
            for y, x in sorted(bn.dag.edges):
                out = delete_edge(bn, y, x)
                f = out.cpts[x]
                cols = f.values.sum(axis=f.scope.index(x))
                np.testing.assert_allclose(cols, 1.0, atol=1e-10)

    def test_delete_missing_edge(self, rng):
        with pytest.raises(NoSuchEdge):
            delete_edge(random_bn(rng, 3, max_parents=0), 0, 1)


class TestFileIO:
    def test_dm_round_trip(self, rng, tmp_path):
        vt = random_variables(5, rng, max_card=3)
        m = random_model(vt, random_chordal_graph(5, 2, rng), rng)
        save_dm(m, tmp_path / "m.json")
        back = load_dm(tmp_path / "m.json")
        np.testing.assert_array_equal(joint_vector(back), joint_vector(m))
        assert dm_to_dict(dm_from_dict(dm_to_dict(m))) == dm_to_dict(m)

    def test_bn_round_trip(self, rng):
        bn = random_bn(rng, 5, max_parents=2, card=3)
        back = bn_from_dict(json.loads(json.dumps(bn_to_dict(bn))))
        rows = all_assignments(bn.vars.cards)
        np.testing.assert_array_equal(back.joint_probabilities(rows), bn.joint_probabilities(rows))

    def test_cpt_layout_parents_then_child(self):
        doc = {"variables": [{"name": "Y", "card": 2}, {"name": "X", "card": 2}],
               "nodes": [{"name": "Y", "parents": [], "cpt": [0.5, 0.5]},
                         {"name": "X", "parents": ["Y"], "cpt": [0.9, 0.1, 0.2, 0.8]}]}
        bn = bn_from_dict(doc)
        assert bn.cpts[1].lookup({0: 1, 1: 0}) == 0.2

    def test_structure_and_csv(self, tmp_path):
        (tmp_path / "s.json").write_text(json.dumps(
            {"variables": [{"name": "A", "card": 2}, {"name": "B", "card": 3}], "edges": [["A", "B"]]}))
        vt, g = load_structure(tmp_path / "s.json")
        assert g.edges == frozenset({(0, 1)})
        save_csv([[1, 2], [0, 0]], vt, tmp_path / "d.csv")
        np.testing.assert_array_equal(load_csv(tmp_path / "d.csv", vt), [[1, 2], [0, 0]])
