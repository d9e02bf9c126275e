"""Tests for signal containers and ambiguity alignment."""

import unittest

import numpy as np
import numpy.testing as npt

from phasekit.core.signal import (
    AmbiguityTransform,
    Signal,
    SupportMask,
    align_to_reference,
    apply_ambiguity,
    conjugate_invert,
)
from phasekit.utils.errors import ShapeMismatchError


def random_signal(rng, shape):
    return Signal(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def random_transform(rng, ndim, grid):
    return AmbiguityTransform(
        global_phase=rng.uniform(0, 2 * np.pi),
        shift=tuple(int(rng.integers(-2 * n, 2 * n)) for n in grid),
        conjugate_flip=bool(rng.integers(2)),
    )


class TestSignal(unittest.TestCase):
    """Test cases for the Signal and SupportMask containers."""

    def test_signal_is_immutable_copy(self):
        """Test that construction copies and freezes the samples."""
        raw = np.arange(4, dtype=float)
        x = Signal(raw)
        raw[0] = 99.0
        self.assertEqual(x.values[0], 0.0)
        with self.assertRaises(ValueError):
            x.values[0] = 1.0

    def test_signal_rejects_non_finite(self):
        """Test that NaN and Inf samples are refused."""
        with self.assertRaises(ValueError):
            Signal([1.0, np.nan])
        with self.assertRaises(ValueError):
            Signal([np.inf])

    def test_signal_rejects_bad_dimensions(self):
        """Test that empty and 3D inputs are refused."""
        with self.assertRaises(ShapeMismatchError):
            Signal(np.zeros(0))
        with self.assertRaises(ShapeMismatchError):
            Signal(np.zeros((2, 2, 2)))

    def test_support_mask_needs_a_sample(self):
        """Test that an all-false support is refused."""
        with self.assertRaises(ValueError):
            SupportMask(np.zeros(5, dtype=bool))

    def test_support_mask_dilate(self):
        """Test dilation grows a single pixel into a square."""
        mask = np.zeros((9, 9), dtype=bool)
        mask[4, 4] = True
        grown = SupportMask(mask).dilate(2)
        self.assertEqual(grown.count(), 25)
        self.assertTrue(grown.mask[2:7, 2:7].all())


class TestAmbiguity(unittest.TestCase):
    """Test cases for apply_ambiguity and transform inversion."""

    def setUp(self):
        """Set up test fixtures."""
        self.rng = np.random.default_rng(1234)

    def test_identity(self):
        """Test the identity transform returns the signal."""
        x = random_signal(self.rng, 8)
        y = apply_ambiguity(x, AmbiguityTransform(0.0, (0,), False))
        npt.assert_array_equal(y.values, x.values)

    def test_shift_of_impulse(self):
        """Test a shift moves an impulse."""
        delta = Signal([1, 0, 0, 0, 0])
        y = apply_ambiguity(delta, AmbiguityTransform(0.0, (2,), False))
        npt.assert_array_equal(y.values, [0, 0, 1, 0, 0])

    def test_conjugate_invert_definition(self):
        """Test conjugate inversion is conj(x[-n mod N])."""
        x = np.array([1 + 1j, 2, 3j, 4])
        npt.assert_array_equal(conjugate_invert(x), np.conj(x[[0, 3, 2, 1]]))

    def test_shift_arity_mismatch(self):
        """Test a shift with the wrong number of offsets is refused."""
        x = random_signal(self.rng, (4, 4))
        with self.assertRaises(ShapeMismatchError):
            apply_ambiguity(x, AmbiguityTransform(0.0, (1,), False))

    def test_fourier_magnitude_preserved(self):
        """Test the oversampled magnitude is unchanged over random transforms."""
        for _ in range(100):
            ndim = int(self.rng.integers(1, 3))
            shape = (8,) if ndim == 1 else (5, 6)
            grid = tuple(2 * n - 1 for n in shape)
            x = random_signal(self.rng, shape)
            t = random_transform(self.rng, ndim, grid)
            y = apply_ambiguity(x, t, grid)
            before = np.abs(np.fft.fftn(x.values, s=grid))
            after = np.abs(np.fft.fftn(y.values))
            self.assertLess(np.max(np.abs(before - after)), 1e-10 * max(1.0, before.max()))

    def test_inverse_round_trip(self):
        """Test a transform followed by its inverse is the identity."""
        for flip in (False, True):
            x = random_signal(self.rng, 10)
            t = AmbiguityTransform(0.7, (3,), flip)
            back = apply_ambiguity(apply_ambiguity(x, t), t.inverse())
            npt.assert_allclose(back.values, x.values, rtol=1e-12, atol=1e-12)


class TestAlignToReference(unittest.TestCase):
    """Test cases for align_to_reference."""

    def setUp(self):
        """Set up test fixtures."""
        self.rng = np.random.default_rng(99)

    def test_self_alignment(self):
        """Test aligning a signal to itself."""
        x = random_signal(self.rng, 16)
        aligned, t, residual = align_to_reference(x, x)
        self.assertLess(residual, 1e-12)
        self.assertFalse(t.conjugate_flip)
        self.assertEqual(t.shift, (0,))
        npt.assert_allclose(aligned.values, x.values, atol=1e-12)

    def test_exact_ambiguity_member(self):
        """Test a shifted and phased copy aligns exactly."""
        x = random_signal(self.rng, 16)
        candidate = apply_ambiguity(x, AmbiguityTransform(np.pi / 4, (3,), False))
        aligned, t, residual = align_to_reference(candidate, x)
        self.assertLess(residual, 1e-10)
        npt.assert_allclose(apply_ambiguity(candidate, t).values, aligned.values)

    def test_any_transform_aligns(self):
        """Test every random ambiguity member aligns, in 1D and 2D."""
        for shape in [(12,), (6, 7)]:
            for _ in range(20):
                x = random_signal(self.rng, shape)
                t = random_transform(self.rng, len(shape), shape)
                _, _, residual = align_to_reference(apply_ambiguity(x, t), x)
                self.assertLess(residual, 1e-10)

    def test_noisy_conjugate_inverted_copy(self):
        """Test the residual of a noisy flipped copy matches the injected noise."""
        x = random_signal(self.rng, 64)
        noise = random_signal(self.rng, 64).values
        noise *= 0.05 * x.norm() / np.linalg.norm(noise)
        flipped = apply_ambiguity(x, AmbiguityTransform(1.1, (5,), True))
        candidate = Signal(flipped.values + noise)
        _, t, residual = align_to_reference(candidate, x)
        self.assertTrue(t.conjugate_flip)
        self.assertAlmostEqual(residual, 0.05, delta=0.005)

    def test_symmetric_success(self):
        """Test zero residual holds in both directions."""
        x = random_signal(self.rng, 9)
        y = apply_ambiguity(x, AmbiguityTransform(2.0, (4,), True))
        self.assertLess(align_to_reference(x, y)[2], 1e-10)
        self.assertLess(align_to_reference(y, x)[2], 1e-10)

    def test_zero_reference(self):
        """Test a zero reference is refused."""
        with self.assertRaises(ValueError):
            align_to_reference(Signal([1.0, 2.0]), Signal.zeros((2,)))

    def test_shape_mismatch(self):
        """Test mismatched shapes are refused."""
        with self.assertRaises(ShapeMismatchError):
            align_to_reference(Signal([1.0, 2.0]), Signal([1.0, 2.0, 3.0]))


if __name__ == '__main__':
    unittest.main()
