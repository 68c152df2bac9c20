import os
import tempfile
import unittest
from math import comb
from unittest.mock import patch

from sympy.polys.domains import QQ

from derham import (TwistedDeRham, betti_numbers, build_filtration_level, build_graded_level, filtration_image_dim,
                    wedge_sign)
from errors import DimensionDeficiencyError, IntegrityError, LevelError
from exact_linalg import is_zero
from laurent import parse_laurent

REFLEXIVE = "x + y + x^-1*y^-1"


class TestWedgeSign(unittest.TestCase):

    def test_signs(self):
        self.assertEqual(wedge_sign(0, ()), 1)
        self.assertEqual(wedge_sign(1, (0,)), -1)
        self.assertEqual(wedge_sign(0, (1,)), 1)
        self.assertEqual(wedge_sign(2, (0, 1)), 1)


class TestComplexSlices(unittest.TestCase):

    def test_filtration_level_bases(self):
        level = build_filtration_level(parse_laurent("x + x^-1"), 0)
        self.assertEqual(level.bases[0], (((0,), ()),))
        self.assertEqual({alpha for alpha, _ in level.bases[1]}, {(-1,), (0,), (1,)})
        self.assertEqual(level.differentials[0].shape, (3, 1))

    def test_level_above_zero_drops_low_degrees(self):
        level = build_filtration_level(parse_laurent("x + x^-1"), QQ(1, 2))
        self.assertEqual(level.dim(0), 0)
        self.assertEqual(level.dim(1), 1)

    def test_nabla_squares_to_zero(self):
        for text in (REFLEXIVE, "x^2 + y + x^-1*y^-1", "x + y + z + x^-1*y^-1*z^-1"):
            service = TwistedDeRham(parse_laurent(text))
            for level in (0, QQ(1, 2), 1):
                complex_slice = service.filtration_level(level)
                complex_slice.check_complex()
                for p in range(len(complex_slice.differentials) - 1):
                    product = complex_slice.differentials[p + 1] * complex_slice.differentials[p]
                    self.assertTrue(is_zero(product))

    def test_graded_slice_weights(self):
        f = parse_laurent(REFLEXIVE)
        service = TwistedDeRham(f)
        graded = build_graded_level(f, 1)
        for p in range(3):
            for alpha, index_set in graded.bases[p]:
                self.assertEqual(len(index_set), p)
                self.assertEqual(service.weight_of(alpha), QQ(p - 1))

    def test_level_above_n(self):
        with self.assertRaises(LevelError):
            TwistedDeRham(parse_laurent("x")).filtration_level(2)

    def test_needs_full_dimension(self):
        with self.assertRaises(DimensionDeficiencyError):
            TwistedDeRham(parse_laurent("x*y"))

    @patch("derham.lattice_points_in_dilate", return_value=[(0,)])
    def test_missing_target_is_an_integrity_error(self, mock_points):
        with self.assertRaises(IntegrityError):
            TwistedDeRham(parse_laurent("x + x^-1")).filtration_level(0)
        mock_points.assert_called()


class TestCohomology(unittest.TestCase):

    def test_betti_numbers(self):
        self.assertEqual(betti_numbers(parse_laurent("x + x^-1")), [0, 2])
        self.assertEqual(betti_numbers(parse_laurent("x")), [0, 1])
        self.assertEqual(betti_numbers(parse_laurent("x^2 + x^-1")), [0, 3])
        self.assertEqual(betti_numbers(parse_laurent(REFLEXIVE)), [0, 0, 3])

    def test_euler_characteristic_is_signed_volume(self):
        service = TwistedDeRham(parse_laurent("x^2 + y + x^-1*y^-1"))
        betti = service.betti_numbers()
        self.assertEqual(sum((-1) ** i * b for i, b in enumerate(betti)), 5)

    def test_counts(self):
        service = TwistedDeRham(parse_laurent(REFLEXIVE))
        self.assertEqual(service.count_up_to(2), 10)
        self.assertEqual(service.count_at(1), 3)
        self.assertEqual(service.count_at(2), 6)
        self.assertEqual(service.count_at(-1), 0)

    def test_basis_counts(self):
        for text in ("x^2 + x^-1", REFLEXIVE, "x + y + z + x^-1*y^-1*z^-1"):
            service = TwistedDeRham(parse_laurent(text))
            n = service.n
            for level in (QQ(0), QQ(1, 2), QQ(1), QQ(3, 2)):
                if level > n:
                    continue
                filtration = service.filtration_level(level)
                graded = service.graded_level(level)
                for p in range(n + 1):
                    self.assertEqual(filtration.dim(p), comb(n, p) * service.count_up_to(p - level), (text, level, p))
                    self.assertEqual(graded.dim(p), comb(n, p) * service.count_at(p - level), (text, level, p))

    def test_image_dims(self):
        f = parse_laurent("x + x^-1")
        self.assertEqual(filtration_image_dim(f, 0, 1), 2)
        self.assertEqual(filtration_image_dim(f, 1, 1), 1)
        self.assertEqual(filtration_image_dim(f, QQ(1, 2), 1), 1)

    def test_image_dim_range(self):
        service = TwistedDeRham(parse_laurent("x"))
        with self.assertRaises(LevelError):
            service.image_dim(0, 2)
        with self.assertRaises(LevelError):
            service.image_dim(-1, 1)

    def test_accelerated_rank_agrees(self):
        f = parse_laurent("x^2 + y + x^-1*y^-1")
        self.assertEqual(TwistedDeRham(f, accelerated=True, seed=3).betti_numbers(), betti_numbers(f))

    def test_dump(self):
        with tempfile.TemporaryDirectory() as directory:
            paths = TwistedDeRham(parse_laurent("x + x^-1")).dump(0, directory)
            self.assertEqual([os.path.basename(p) for p in paths], ["level_0_d0.txt"])
            with open(paths[0], encoding="utf-8") as handle:
                self.assertEqual(handle.readline().strip(), "3 1")


if __name__ == "__main__":
    unittest.main()
