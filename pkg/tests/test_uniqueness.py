"""Tests for coherence, RIP, complement-property and collision diagnostics."""

import unittest
from itertools import combinations, product

import numpy as np

from phasekit.core.signal import Signal
from phasekit.diagnostics.fixtures import two_ortho_basis_dictionary
from phasekit.diagnostics.uniqueness import (
    coherence_mu,
    collision_free_check,
    complement_property_check,
    rip_delta,
)
from phasekit.utils.errors import GuardExceededError


def coherence_oracle(a):
    best = 0.0
    for i, j in combinations(range(a.shape[1]), 2):
        ai, aj = a[:, i], a[:, j]
        best = max(best, abs(np.vdot(ai, aj)) / (np.linalg.norm(ai) * np.linalg.norm(aj)))
    return best


def rip_oracle(a, k):
    a = a / np.linalg.norm(a, axis=0)
    delta = 0.0
    for idx in combinations(range(a.shape[1]), k):
        sub = a[:, idx]
        eig = np.linalg.eigvalsh(sub.T @ sub)
        delta = max(delta, 1.0 - eig[0], eig[-1] - 1.0)
    return delta


def complement_oracle(vectors):
    m, n = vectors.shape
    for bits in product([False, True], repeat=m):
        chosen = np.array(bits)
        rank_s = np.linalg.matrix_rank(vectors[chosen]) if chosen.any() else 0
        rank_c = np.linalg.matrix_rank(vectors[~chosen]) if (~chosen).any() else 0
        if rank_s < n and rank_c < n:
            return False
    return True


def collision_oracle(locations):
    for i, j, k, l in product(locations, repeat=4):
        if i != j and k != l and (i, j) != (k, l) and i - j == k - l:
            return False
    return True


class TestCoherence(unittest.TestCase):
    """Test cases for coherence_mu."""

    def test_identity(self):
        self.assertEqual(coherence_mu(np.eye(5)), 0.0)

    def test_repeated_column(self):
        a = np.array([[1.0, 1.0, 0.0], [2.0, 2.0, 1.0]])
        self.assertAlmostEqual(coherence_mu(a), 1.0)

    def test_matches_pairwise_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            a = rng.standard_normal((16, 32))
            self.assertAlmostEqual(coherence_mu(a), coherence_oracle(a), places=12)

    def test_two_ortho_basis(self):
        self.assertAlmostEqual(coherence_mu(two_ortho_basis_dictionary(16, seed=2)), 0.25, places=12)

    def test_zero_column(self):
        with self.assertRaises(ValueError):
            coherence_mu(np.array([[1.0, 0.0], [0.0, 0.0]]))


class TestRIP(unittest.TestCase):
    """Test cases for rip_delta."""

    def setUp(self):
        """Set up test fixtures."""
        self.rng = np.random.default_rng(4)

    def test_orthonormal(self):
        q, _ = np.linalg.qr(self.rng.standard_normal((6, 6)))
        for k in (1, 3, 6):
            self.assertAlmostEqual(rip_delta(q, k), 0.0, places=12)

    def test_repeated_columns(self):
        a = np.eye(4)[:, [0, 1, 1, 2]]
        self.assertAlmostEqual(rip_delta(a, 2), 1.0, places=12)

    def test_matches_singular_value_oracle(self):
        for _ in range(20):
            a = self.rng.standard_normal((8, 16)) / np.sqrt(8)
            self.assertAlmostEqual(rip_delta(a, 2), rip_oracle(a, 2), delta=1e-12)

    def test_monotone_in_k(self):
        a = self.rng.standard_normal((6, 10))
        deltas = [rip_delta(a, k) for k in range(1, 5)]
        for lower, higher in zip(deltas, deltas[1:]):
            self.assertLessEqual(lower, higher + 1e-12)

    def test_guard(self):
        with self.assertRaises(GuardExceededError):
            rip_delta(self.rng.standard_normal((10, 40)), 13)
        with self.assertRaises(GuardExceededError):
            rip_delta(self.rng.standard_normal((10, 60)), 8)


class TestComplementProperty(unittest.TestCase):
    """Test cases for complement_property_check."""

    def test_too_few_vectors_fail(self):
        rng = np.random.default_rng(1)
        for n in (2, 3, 4):
            result = complement_property_check(rng.standard_normal((2 * n - 2, n)))
            self.assertFalse(result.holds)
            self.assertIsNotNone(result.witness)

    def test_three_vectors_in_the_plane(self):
        result = complement_property_check(np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]))
        self.assertTrue(result.holds)
        self.assertIsNone(result.witness)

    def test_repeated_basis_vector_fails(self):
        """Test {e1, e2, e1} fails: S = {e2} and its complement both miss a direction."""
        vectors = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]])
        self.assertFalse(complement_property_check(vectors).holds)

    def test_equal_vectors_witness(self):
        vectors = np.ones((5, 3))
        result = complement_property_check(vectors)
        self.assertFalse(result.holds)
        chosen = np.zeros(5, dtype=bool)
        chosen[list(result.witness)] = True
        self.assertLess(np.linalg.matrix_rank(vectors[chosen]), 3)
        self.assertLess(np.linalg.matrix_rank(vectors[~chosen]), 3)

    def test_matches_exhaustive_oracle(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            vectors = rng.integers(-1, 2, size=(3, 2)).astype(float)
            self.assertEqual(complement_property_check(vectors).holds, complement_oracle(vectors))

    def test_guard(self):
        with self.assertRaises(GuardExceededError):
            complement_property_check(np.ones((21, 2)))


class TestCollisionFree(unittest.TestCase):
    """Test cases for collision_free_check."""

    def test_golomb_ruler(self):
        x = np.zeros(8)
        x[[0, 1, 3]] = 1.0
        self.assertTrue(collision_free_check(x).collision_free)

    def test_arithmetic_progression(self):
        x = np.zeros(8)
        x[[0, 1, 2, 3]] = 1.0
        result = collision_free_check(Signal(x))
        self.assertFalse(result.collision_free)
        i, j, k, l = result.quadruple
        self.assertEqual(i - j, k - l)
        self.assertNotEqual((i, j), (k, l))

    def test_single_nonzero(self):
        self.assertTrue(collision_free_check(np.eye(1, 10, 4).ravel()).collision_free)

    def test_matches_quadruple_oracle(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            locations = sorted(rng.choice(24, size=int(rng.integers(2, 7)), replace=False).tolist())
            x = np.zeros(24)
            x[locations] = rng.uniform(1, 2, len(locations))
            self.assertEqual(collision_free_check(x).collision_free, collision_oracle(locations))

    def test_guard(self):
        with self.assertRaises(GuardExceededError):
            collision_free_check(np.ones(101))


if __name__ == '__main__':
    unittest.main()
