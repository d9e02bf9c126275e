"""Tests for reconstruction metrics and fixtures."""

import unittest
from unittest.mock import patch

import numpy as np
import numpy.testing as npt

from phasekit.core.forward import (
    GeneralLinear,
    OversampledFourier,
    autocorrelation,
    intensity,
    oversampled_dft,
)
from phasekit.core.signal import AmbiguityTransform, Signal, align_to_reference, apply_ambiguity
from phasekit.diagnostics.fixtures import counterexample_pair
from phasekit.diagnostics.metrics import (
    ensemble_average,
    evaluate_reconstruction,
    prtf,
    r_factor,
    recovery_error_E,
)


class TestCounterexample(unittest.TestCase):
    """Test cases for the non-uniqueness fixture."""

    def test_autocorrelations_agree(self):
        """Test both vectors share the integer autocorrelation."""
        u, v = counterexample_pair()
        expected = [-2, 0, 2, 0, 9, 0, 2, 0, -2]
        npt.assert_allclose(autocorrelation(u), expected, atol=1e-12)
        npt.assert_allclose(autocorrelation(v), expected, atol=1e-12)

    def test_fourier_magnitudes_agree(self):
        """Test the oversampled magnitudes coincide."""
        u, v = counterexample_pair()
        npt.assert_allclose(np.abs(oversampled_dft(u, 9)), np.abs(oversampled_dft(v, 9)), atol=1e-10)

    def test_not_ambiguity_equivalent(self):
        """Test no trivial ambiguity maps one onto the other."""
        u, v = counterexample_pair()
        _, _, residual = align_to_reference(u.embed((9,)), v.embed((9,)))
        self.assertGreater(residual, 0.1)


class TestRecoveryError(unittest.TestCase):
    """Test cases for the real-space recovery error."""

    def setUp(self):
        """Set up test fixtures."""
        self.z = np.array([1.0, -2.0, 3j, 0.5])

    def test_identical(self):
        self.assertEqual(recovery_error_E(self.z, self.z), 0.0)

    def test_zero_reconstruction(self):
        self.assertAlmostEqual(recovery_error_E(np.zeros(4), self.z), 1.0)

    def test_single_sample_perturbation(self):
        """Test a one-sample perturbation gives delta over the model L1 norm."""
        perturbed = self.z.copy()
        perturbed[2] += 0.25
        expected = 0.25 / np.sum(np.abs(self.z))
        self.assertAlmostEqual(recovery_error_E(perturbed, self.z), expected)

    def test_zero_model(self):
        with self.assertRaises(ValueError):
            recovery_error_E(self.z, np.zeros(4))


class TestRFactor(unittest.TestCase):
    """Test cases for the scale-fitted R-factor."""

    def setUp(self):
        """Set up test fixtures."""
        self.rng = np.random.default_rng(21)

    def test_identical(self):
        mag = self.rng.uniform(0.1, 2.0, 32)
        rf, zeta = r_factor(mag, mag)
        self.assertAlmostEqual(rf, 0.0)
        self.assertAlmostEqual(zeta, 1.0)

    def test_pure_scale(self):
        mag = self.rng.uniform(0.1, 2.0, 32)
        rf, zeta = r_factor(mag, 2 * mag)
        self.assertAlmostEqual(rf, 0.0)
        self.assertAlmostEqual(zeta, 0.5)

    def test_beats_grid_of_scales(self):
        """Test the fitted scale is at least as good as any grid value."""
        for _ in range(20):
            measured = self.rng.uniform(0, 1, 64)
            recon = self.rng.uniform(0, 1, 64)
            rf, _ = r_factor(measured, recon)
            for zeta in (0.5, 1.0, 2.0):
                grid_rf = np.sum(np.abs(measured - zeta * recon)) / np.sum(measured)
                self.assertLessEqual(rf, grid_rf + 1e-12)

    def test_scale_equivariance(self):
        """Test scaling the reconstruction scales zeta inversely and keeps R_F."""
        measured = self.rng.uniform(0, 1, 40)
        recon = self.rng.uniform(0, 1, 40)
        rf, zeta = r_factor(measured, recon)
        for c in (0.1, 3.0, 250.0):
            rf_c, zeta_c = r_factor(measured, c * recon)
            self.assertAlmostEqual(rf_c, rf, places=12)
            self.assertAlmostEqual(zeta_c * c, zeta, places=10)

    def test_zero_measured(self):
        with self.assertRaises(ValueError):
            r_factor(np.zeros(4), np.ones(4))


class TestPRTF(unittest.TestCase):
    """Test cases for the phase-retrieval transfer function."""

    def setUp(self):
        """Set up test fixtures."""
        self.rng = np.random.default_rng(8)
        self.x = Signal(self.rng.standard_normal(16))
        self.measured = np.abs(np.fft.fft(self.x.values))

    def test_identical_copies(self):
        curve = prtf([self.x, self.x, self.x], self.measured)
        npt.assert_allclose(curve, 1.0, atol=1e-9)

    def test_negated_copy_cancels(self):
        curve = prtf([self.x, Signal(-self.x.values)], self.measured)
        npt.assert_allclose(curve, 0.0, atol=1e-12)

    def test_zero_measured_entries(self):
        measured = self.measured.copy()
        measured[3] = 0.0
        curve = prtf([self.x, self.x], measured)
        self.assertEqual(curve[3], 0.0)

    def test_random_phases_average_out(self):
        """Test random spectral phases give a PRTF near 1/sqrt(ensemble size)."""
        phases = self.rng.uniform(0, 2 * np.pi, size=(1000, 64))
        ensemble = [Signal(np.fft.ifft(np.exp(1j * p))) for p in phases]
        curve = prtf(ensemble, np.ones(64), check_alignment=False)
        self.assertTrue(0.01 < np.median(curve) < 0.06)

    def test_misaligned_ensemble_warns(self):
        other = Signal(5.0 * self.rng.standard_normal(16))
        with patch('phasekit.diagnostics.metrics.logger') as mock_logger:
            prtf([self.x, other], self.measured)
            mock_logger.warning.assert_called_once()

    def test_needs_two_members(self):
        with self.assertRaises(ValueError):
            prtf([self.x], self.measured)


class TestEvaluation(unittest.TestCase):
    """Test cases for ensemble averaging and evaluate_reconstruction."""

    def setUp(self):
        """Set up test fixtures."""
        self.rng = np.random.default_rng(17)
        self.x = Signal(self.rng.standard_normal(8) + 1j * self.rng.standard_normal(8))

    def test_ensemble_average_of_ambiguity_members(self):
        members = [
            apply_ambiguity(self.x, AmbiguityTransform(0.4 * i, (i,), bool(i % 2)))
            for i in range(4)
        ]
        average = ensemble_average(members, self.x)
        npt.assert_allclose(average.values, self.x.values, atol=1e-10)

    def test_evaluate_exact_fourier_reconstruction(self):
        """Test a shifted truth on the measurement grid scores perfectly."""
        obs = intensity(self.x, OversampledFourier(16))
        recon = apply_ambiguity(self.x, AmbiguityTransform(1.0, (5,), True), (16,))
        report = evaluate_reconstruction(recon, obs, truth=self.x)
        self.assertLess(report.aligned_residual, 1e-10)
        self.assertLess(report.E, 1e-10)
        self.assertLess(report.R_F, 1e-10)

    def test_evaluate_general_linear_only_allows_phase(self):
        """Test general measurements do not forgive a shift."""
        model = GeneralLinear(self.rng.standard_normal((32, 8)))
        obs = intensity(self.x, model)
        shifted = apply_ambiguity(self.x, AmbiguityTransform(0.0, (1,), False))
        report = evaluate_reconstruction(shifted, obs, truth=self.x, model=model)
        self.assertGreater(report.aligned_residual, 0.1)
        phased = Signal(self.x.values * np.exp(0.7j))
        self.assertLess(evaluate_reconstruction(phased, obs, self.x, model).aligned_residual, 1e-12)

    def test_report_to_dict_is_flat(self):
        obs = intensity(self.x, OversampledFourier(16))
        report = evaluate_reconstruction(self.x, obs)
        data = report.to_dict()
        self.assertIsNone(data["E"])
        self.assertEqual(set(data), {"E", "R_F", "zeta", "aligned_residual"})


if __name__ == '__main__':
    unittest.main()
