"""Tests for the lifted (PhaseLift, CPRL, QCS) solvers."""

import os
import unittest
from unittest.mock import patch

import numpy as np
import numpy.testing as npt
from dotenv import load_dotenv
from pydantic import ValidationError

from phasekit.bench.scenes import gen_sparse_vector
from phasekit.core.forward import GeneralLinear, Observation, OversampledFourier, intensity
from phasekit.core.signal import Signal, align_global_phase
from phasekit.solvers import lifted
from phasekit.solvers.lifted import (
    LiftedConfig,
    LiftedMatrix,
    cprl_solve,
    extract_rank1,
    lift,
    phaselift_solve,
    project_l1_ball,
    project_psd,
    qcs_solve,
    spectral_initializer,
)
from phasekit.utils.errors import ShapeMismatchError

load_dotenv()

SLOW = os.getenv("PHASEKIT_SLOW_TESTS") == "1"


def gaussian_model(rng, m, n):
    return GeneralLinear(rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n)))


def e1(n):
    x = np.zeros(n)
    x[0] = 1.0
    return Signal(x)


class TestLift(unittest.TestCase):
    """Test cases for lift and extract_rank1."""

    def setUp(self):
        """Set up test fixtures."""
        self.rng = np.random.default_rng(3)
        self.x = Signal(self.rng.standard_normal(8) + 1j * self.rng.standard_normal(8))

    def test_unit_vector(self):
        expected = np.zeros((4, 4))
        expected[0, 0] = 1.0
        npt.assert_array_equal(lift(e1(4)).X, expected)

    def test_trace_is_energy(self):
        self.assertAlmostEqual(float(np.real(np.trace(lift(self.x).X))), self.x.norm() ** 2)

    def test_measurement_linearity(self):
        """Test Tr(A_k X) reproduces the intensities of the general linear model."""
        model = gaussian_model(self.rng, 20, 8)
        traces = np.real(np.einsum("kij,ji->k", model.lifted_matrices(), lift(self.x).X))
        npt.assert_allclose(traces, intensity(self.x, model).y, rtol=1e-10)

    def test_zero_signal(self):
        npt.assert_array_equal(lift(Signal.zeros((5,))).X, np.zeros((5, 5)))

    def test_rejects_images(self):
        with self.assertRaises(ShapeMismatchError):
            lift(Signal(np.ones((2, 2))))

    def test_extract_exact_rank_one(self):
        recovered = extract_rank1(lift(self.x))
        _, _, residual = align_global_phase(recovered, self.x)
        self.assertLess(residual, 1e-10)

    def test_extract_with_noise(self):
        x = Signal(self.rng.standard_normal(16) + 1j * self.rng.standard_normal(16))
        noise = self.rng.standard_normal((16, 16)) + 1j * self.rng.standard_normal((16, 16))
        noisy = lift(x).X + 0.01 * 0.5 * (noise + noise.conj().T)
        _, _, residual = align_global_phase(extract_rank1(LiftedMatrix(noisy)), x)
        self.assertLess(residual, 0.05)

    def test_extract_zero_matrix(self):
        recovered = extract_rank1(LiftedMatrix(np.zeros((3, 3))))
        npt.assert_array_equal(recovered.values, np.zeros(3))


class TestProjections(unittest.TestCase):
    """Test cases for the PSD and l1-ball projections."""

    def test_psd_clips_negative_eigenvalues(self):
        projected = project_psd(np.diag([2.0, -1.0, 0.5]))
        npt.assert_allclose(projected, np.diag([2.0, 0.0, 0.5]), atol=1e-12)

    def test_l1_ball(self):
        npt.assert_allclose(project_l1_ball(np.array([3.0, 1.0]), 2.0), [2.0, 0.0])
        inside = np.array([0.5, 0.5])
        self.assertIs(project_l1_ball(inside, 2.0), inside)


class TestPhaseLift(unittest.TestCase):
    """Test cases for phaselift_solve and cprl_solve."""

    def setUp(self):
        """Set up test fixtures."""
        self.rng = np.random.default_rng(11)
        self.identity = GeneralLinear(np.eye(4))
        self.obs_e1 = intensity(e1(4), self.identity)

    def test_identity_measurements(self):
        result = phaselift_solve(self.obs_e1, self.identity, LiftedConfig())
        self.assertTrue(result.feasible)
        _, _, residual = align_global_phase(extract_rank1(result), e1(4))
        self.assertLess(residual, 1e-6)

    def test_returned_matrix_is_hermitian_psd(self):
        x = Signal(self.rng.standard_normal(8) + 1j * self.rng.standard_normal(8))
        model = gaussian_model(self.rng, 48, 8)
        result = phaselift_solve(intensity(x, model), model, LiftedConfig(inner_iters=100, polish_iters=20))
        self.assertLess(result.hermitian_error(), 1e-10)
        self.assertGreater(result.min_eigenvalue(), -1e-8)

    def test_single_measurement_is_ambiguous(self):
        """Test one measurement is satisfied by a matrix unrelated to x."""
        x = Signal(self.rng.standard_normal(4) + 1j * self.rng.standard_normal(4))
        model = gaussian_model(self.rng, 1, 4)
        result = phaselift_solve(intensity(x, model), model, LiftedConfig())
        self.assertTrue(result.feasible)
        _, _, residual = align_global_phase(extract_rank1(result), x)
        self.assertGreater(residual, 0.1)

    def test_cprl_without_l1_matches_phaselift(self):
        x = Signal(self.rng.standard_normal(6))
        model = gaussian_model(self.rng, 24, 6)
        obs = intensity(x, model)
        cfg = LiftedConfig(inner_iters=50, polish_iters=10)
        npt.assert_array_equal(cprl_solve(obs, model, cfg).X, phaselift_solve(obs, model, cfg).X)

    def test_without_polish_returns_last_iterate(self):
        x = Signal(self.rng.standard_normal(6) + 1j * self.rng.standard_normal(6))
        model = gaussian_model(self.rng, 30, 6)
        obs = intensity(x, model)
        original = lifted._mfista
        runs = []

        def recording(*args, **kwargs):
            runs.append(original(*args, **kwargs))
            return runs[-1]

        for solve in (phaselift_solve, cprl_solve):
            runs.clear()
            with self.subTest(solver=solve.__name__), patch.object(lifted, "_mfista", side_effect=recording):
                result = solve(obs, model, LiftedConfig(lam=0.3, inner_iters=60, polish_iters=0))
                self.assertEqual(len(runs), 1)
                raw, history = runs[0]
                npt.assert_allclose(result.X, raw, atol=1e-12)
                self.assertEqual(result.iterations, len(history))

    def test_polish_refits_after_last_iterate(self):
        x = Signal(self.rng.standard_normal(6))
        model = gaussian_model(self.rng, 30, 6)
        original = lifted._mfista
        runs = []

        def recording(*args, **kwargs):
            runs.append(original(*args, **kwargs))
            return runs[-1]

        with patch.object(lifted, "_mfista", side_effect=recording):
            result = cprl_solve(intensity(x, model), model, LiftedConfig(lam=0.3, inner_iters=60, polish_iters=25))
        self.assertEqual(len(runs), 2)
        npt.assert_allclose(result.X, runs[1][0], atol=1e-12)
        self.assertEqual(result.iterations, len(runs[0][1]) + len(runs[1][1]))

    def test_cprl_objective_nonincreasing(self):
        x = np.zeros(8)
        x[[1, 5]] = [1.0, -2.0]
        model = gaussian_model(self.rng, 24, 8)
        result = cprl_solve(intensity(Signal(x), model), model, LiftedConfig(lam=0.5, inner_iters=100))
        history = np.array(result.objective)
        self.assertTrue(np.all(np.diff(history) <= 1e-8 * max(history[0], 1.0)))

    def test_huge_l1_weight_gives_zero(self):
        result = cprl_solve(self.obs_e1, self.identity, LiftedConfig(lam=1e8))
        self.assertLess(np.linalg.norm(result.X), 1e-12)
        self.assertFalse(result.feasible)

    def test_real_valued_lifting(self):
        x = Signal(self.rng.standard_normal(5))
        model = GeneralLinear(self.rng.standard_normal((20, 5)))
        result = phaselift_solve(intensity(x, model), model, LiftedConfig(real_valued=True, inner_iters=50))
        npt.assert_array_equal(np.imag(result.X), 0.0)

    def test_model_checks(self):
        with self.assertRaises(TypeError):
            phaselift_solve(self.obs_e1, OversampledFourier(8), LiftedConfig())
        with self.assertRaises(ShapeMismatchError):
            phaselift_solve(Observation(np.ones(3)), self.identity, LiftedConfig())

    def test_config_ranges(self):
        with self.assertRaises(ValidationError):
            LiftedConfig(epsilon=-1.0)
        with self.assertRaises(ValidationError):
            LiftedConfig(lam=-0.1)
        with self.assertRaises(ValidationError):
            LiftedConfig(eta=0.0)
        with self.assertRaises(ValidationError):
            LiftedConfig(delta=0.0)


class TestQCS(unittest.TestCase):
    """Test cases for qcs_solve."""

    def setUp(self):
        """Set up test fixtures."""
        self.rng = np.random.default_rng(19)
        self.identity = GeneralLinear(np.eye(4))
        self.obs_e1 = intensity(e1(4), self.identity)

    def test_needs_eta(self):
        with self.assertRaises(ValueError):
            qcs_solve(self.obs_e1, self.identity, LiftedConfig())

    def test_inactive_constraints_reduce_to_phaselift(self):
        """Test a huge budget, no threshold and one outer step match PhaseLift."""
        x = Signal(self.rng.standard_normal(6))
        model = gaussian_model(self.rng, 24, 6)
        obs = intensity(x, model)
        cfg = LiftedConfig(eta=1e9, threshold=0.0, outer_iters=1, inner_iters=50, polish_iters=10)
        npt.assert_allclose(qcs_solve(obs, model, cfg).X, phaselift_solve(obs, model, cfg).X, atol=1e-12)

    def test_unit_vector_row_survives(self):
        result = qcs_solve(self.obs_e1, self.identity, LiftedConfig(eta=10.0, outer_iters=3))
        self.assertGreater(np.real(result.X[0, 0]), 0.5)
        npt.assert_array_equal(result.X[1:, :], 0.0)
        _, _, residual = align_global_phase(extract_rank1(result), e1(4))
        self.assertLess(residual, 1e-6)


def top_support(x: Signal, k: int) -> set:
    return set(np.argsort(np.abs(x.values))[-k:].tolist())


def true_support(x: Signal) -> set:
    return set(np.flatnonzero(x.values).tolist())


@unittest.skipUnless(SLOW, "set PHASEKIT_SLOW_TESTS=1 to run")
class TestSparseLiftedRecovery(unittest.TestCase):
    """Monte-Carlo support recovery of sparse signals from Gaussian measurements, N=16."""

    def test_cprl_support_with_swept_lambda(self):
        rates = {}
        for lam in (0.0, 0.1, 1.0, 10.0):
            hits = 0
            for seed in range(20):
                x = gen_sparse_vector(16, 2, seed)
                model = gaussian_model(np.random.default_rng(seed), 40, 16)
                result = cprl_solve(intensity(x, model), model, LiftedConfig(lam=lam))
                hits += top_support(extract_rank1(result), 2) == true_support(x)
            rates[lam] = hits / 20
        self.assertGreaterEqual(max(rates.values()), 0.8, rates)

    def test_qcs_support_contains_truth(self):
        hits = 0
        for seed in range(20):
            x = gen_sparse_vector(16, 3, seed)
            model = gaussian_model(np.random.default_rng(100 + seed), 48, 16)
            eta = 1.5 * float(np.sum(np.linalg.norm(lift(x).X, axis=1)))
            recovered = np.abs(extract_rank1(qcs_solve(intensity(x, model), model, LiftedConfig(eta=eta))).values)
            found = set(np.flatnonzero(recovered > 1e-6 * recovered.max()).tolist())
            hits += found >= true_support(x)
        self.assertGreaterEqual(hits / 20, 0.7)


class TestSpectralInitializer(unittest.TestCase):
    """Test cases for spectral_initializer."""

    def test_correlates_with_truth(self):
        rng = np.random.default_rng(23)
        x = Signal(rng.standard_normal(8) + 1j * rng.standard_normal(8))
        model = gaussian_model(rng, 2000, 8)
        estimate = spectral_initializer(intensity(x, model), model)
        correlation = abs(np.vdot(estimate.values, x.values)) / (estimate.norm() * x.norm())
        self.assertGreater(correlation, 0.9)
        self.assertAlmostEqual(estimate.norm() / x.norm(), 1.0, delta=0.1)


if __name__ == '__main__':
    unittest.main()
