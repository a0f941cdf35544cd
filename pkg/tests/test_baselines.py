import math

import numpy as np
import pytest

from conftest import all_assignments, binary_vars
from dmdiv.baselines import (
    brute_force_divergence,
    brute_force_f2,
    enumerate_domain,
    forward_sample,
    joint_vector,
    mc_alpha_beta,
)
from dmdiv.divergence import alpha_beta_divergence
from dmdiv.errors import DomainTooLarge, ZeroProbabilitySample
from dmdiv.factor import Factor
from dmdiv.generate import chain_pair, random_pair
from dmdiv.model import DecomposableModel


def literal(P, Q, a, b):
    """Case definitions applied cell by cell, no rearrangement."""
    if a == 0 and b == 0:
        return 0.5 * np.sum((np.log(P) - np.log(Q)) ** 2)
    if b == 0:
        return np.sum(P**a * np.log(P**a / Q**a) - P**a + Q**a) / a**2
    if a == 0:
        return np.sum(Q**b * np.log(Q**b / P**b) - Q**b + P**b) / b**2
    if a + b == 0:
        return np.sum(np.log(Q**a / P**a) + (Q**a / P**a) ** -1 - 1) / a**2
    s = a + b
    return -np.sum(P**a * Q**b - a / s * P**s - b / s * Q**s) / (a * b)


class TestBruteForce:
    def test_enumeration_order_and_cap(self):
        rows = np.concatenate(list(enumerate_domain((2, 3), chunk=4)))
        np.testing.assert_array_equal(rows, all_assignments((2, 3)))
        with pytest.raises(DomainTooLarge):
            next(enumerate_domain((2,) * 30))

    def test_stable_form_equals_literal_definition(self, rng):
        p, q = random_pair(rng, 5)
        P, Q = joint_vector(p), joint_vector(q)
        for a, b in [(1, 0), (0, 1), (0.5, -0.5), (2, 1), (-1, -0.5), (0, 0), (-0.5, 0)]:
            assert brute_force_divergence(p, q, a, b) == pytest.approx(literal(P, Q, a, b), rel=1e-10)

    def test_stable_form_is_exactly_zero_on_identical_joints(self, rng):
        p, _ = random_pair(rng, 8)
        for a, b in [(-1, -1), (-1, 0), (0.5, -0.5), (2, 2)]:
            assert brute_force_divergence(p, p, a, b) == 0.0

    def test_f2_is_plain_sum(self, rng):
        p, q = random_pair(rng, 4)
        P, Q = joint_vector(p), joint_vector(q)
        assert brute_force_f2(p, q, 0.5, 0.5) == pytest.approx(np.sum(np.sqrt(P * Q)), rel=1e-14)

    def test_refuses_thirty_binary_variables(self):
        p, q = chain_pair(30, np.random.default_rng(0))
        with pytest.raises(DomainTooLarge):
            brute_force_divergence(p, q, 1.0, 0.0)


class TestSampling:
    def test_frequencies_match_joint(self, rng):
        p, _ = random_pair(rng, 4)
        rows = forward_sample(p, 200_000, seed=5).rows
        flat = np.ravel_multi_index(rows.T, p.vars.cards)
        freq = np.bincount(flat, minlength=16) / len(rows)
        P = joint_vector(p)
        se = np.sqrt(P * (1 - P) / len(rows))
        assert np.all(np.abs(freq - P) <= 5 * se + 1e-12)

    def test_zero_cells_never_drawn(self):
        vt = binary_vars(2)
        p = DecomposableModel(vt, [Factor((0, 1), (2, 2), [0.5, 0.0, 0.0, 0.5])])
        rows = forward_sample(p, 10_000, seed=1).rows
        assert np.all(rows[:, 0] == rows[:, 1])

    def test_reproducible(self, rng):
        p, _ = random_pair(rng, 6)
        a, b = forward_sample(p, 70_000, 11), forward_sample(p, 70_000, 11)
        np.testing.assert_array_equal(a.rows, b.rows)
        assert not np.array_equal(a.rows, forward_sample(p, 70_000, 12).rows)


class TestMonteCarlo:
    def test_reproducible(self, rng):
        p, q = random_pair(rng, 6)
        assert mc_alpha_beta(p, q, 1, 0, 5000, 7) == mc_alpha_beta(p, q, 1, 0, 5000, 7)

    @pytest.mark.parametrize("ab", [(1, 0), (0, 1), (0.5, 0.5), (2, -1), (0, 0), (-0.5, 0.5)])
    def test_within_four_standard_errors(self, rng, ab):
        p, q = random_pair(rng, 8)
        est = mc_alpha_beta(p, q, *ab, 50_000, 3)
        assert abs(est.estimate - alpha_beta_divergence(p, q, *ab)) <= 4 * est.stderr

    def test_stderr_shrinks_like_root_n(self, rng):
        p, q = random_pair(rng, 8)
        small = mc_alpha_beta(p, q, 1, 0, 20_000, 1).stderr
        large = mc_alpha_beta(p, q, 1, 0, 80_000, 2).stderr
        assert 0.4 <= large / small <= 0.6

    def test_bootstrap_close_to_delta(self, rng):
        p, q = random_pair(rng, 6)
        d = mc_alpha_beta(p, q, 0.5, 0.5, 20_000, 4)
        b = mc_alpha_beta(p, q, 0.5, 0.5, 20_000, 4, bootstrap=200)
        assert b.estimate == d.estimate
        assert b.stderr == pytest.approx(d.stderr, rel=0.3)

    def test_zero_probability_sample(self):
        vt = binary_vars(1)
        p = DecomposableModel(vt, [Factor((0,), (2,), [0.5, 0.5])])
        q = DecomposableModel(vt, [Factor((0,), (2,), [1.0, 0.0])])
        with pytest.raises(ZeroProbabilitySample):
            mc_alpha_beta(p, q, 1.0, 0.0, 1000, 1)
