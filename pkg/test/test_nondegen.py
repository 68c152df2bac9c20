import random
import unittest
from unittest.mock import patch

from sympy.polys.domains import QQ
from sympy.polys.groebnertools import groebner
from sympy.polys.orderings import grevlex
from sympy.polys.rings import ring

from errors import FaceError, GroebnerBudgetExceeded, PrimeExhaustionError
from laurent import parse_laurent
from models import Witness
from nondegen import (BUDGET_EXCEEDED, DEGENERATE, EMPTY, LIKELY_NONDEGENERATE, NONDEGENERATE, NONEMPTY,
                      FaceSystem, _check_face_report, _good_primes, _rational_grid, check_face, find_witness,
                      groebner_basis, is_nondegenerate)
from polytope import newton_polytope, proper_faces_excluding_origin

SQUARE = "x^2 + 2*x*y + y^2"
REFLEXIVE = "x + y + x^-1*y^-1"
LONG_EDGE = "conv{(2,0),(0,2)}"


def face_by_label(f, label):
    faces = proper_faces_excluding_origin(newton_polytope(f))
    return next(face for face in faces if face.label() == label)


class TestGroebnerBasis(unittest.TestCase):

    def test_reduced_basis_is_kept(self):
        R, x, y = ring("x,y", QQ, grevlex)
        self.assertEqual(groebner_basis([x - 1, y - 1]), [x - 1, y - 1])

    def test_inconsistent_system_gives_one(self):
        R, x = ring("x", QQ, grevlex)
        self.assertEqual(groebner_basis([x ** 2, x - 1]), [R.one])

    def test_agrees_with_sympy(self):
        R, x, y = ring("x,y", QQ, grevlex)
        generators = [x ** 2 * y - 1, x * y ** 2 - x]
        expected = [g.monic() for g in groebner(generators, R, method="buchberger")]
        self.assertEqual(set(groebner_basis(generators)), set(expected))

    def test_budget(self):
        R, x, y, z = ring("x,y,z", QQ, grevlex)
        with self.assertRaises(GroebnerBudgetExceeded) as ctx:
            groebner_basis([x ** 3 - y * z, y ** 3 - x * z, z ** 3 - x * y], budget=1)
        self.assertEqual(ctx.exception.budget, 1)


class TestFaceChecks(unittest.TestCase):

    def test_degenerate_edge_is_nonempty(self):
        f = parse_laurent(SQUARE)
        self.assertEqual(check_face(f, face_by_label(f, LONG_EDGE), p=10007), NONEMPTY)
        self.assertEqual(check_face(f, face_by_label(f, LONG_EDGE)), NONEMPTY)

    def test_reflexive_edge_is_empty(self):
        f = parse_laurent(REFLEXIVE)
        self.assertEqual(check_face(f, face_by_label(f, "conv{(1,0),(0,1)}"), p=10007), EMPTY)
        self.assertEqual(check_face(f, face_by_label(f, "conv{(1,0),(0,1)}")), EMPTY)

    def test_vertex_face_is_empty(self):
        f = parse_laurent(SQUARE)
        self.assertEqual(check_face(f, face_by_label(f, "(2,0)"), p=10007), EMPTY)

    def test_face_through_origin_is_rejected(self):
        f = parse_laurent("x + y")
        through_origin = next(face for face in newton_polytope(f).faces if face.contains_origin and face.dim == 1)
        with self.assertRaises(FaceError):
            check_face(f, through_origin, p=10007)

    def test_budget_status(self):
        f = parse_laurent(SQUARE)
        self.assertEqual(check_face(f, face_by_label(f, LONG_EDGE), p=10007, budget=0), BUDGET_EXCEEDED)

    def test_face_system_shift(self):
        f = parse_laurent(REFLEXIVE)
        system = FaceSystem.build(f, face_by_label(f, "conv{(0,1),(-1,-1)}"))
        self.assertEqual(system.shift, (1, 1))
        for g in system.generators:
            self.assertTrue(all(a >= 0 for exponent in g.support for a in exponent))

    def test_saturation_variable_avoids_clashes(self):
        f = parse_laurent("t + s + t^-1*s^-1", ["t", "s"])
        system = FaceSystem.build(f, face_by_label(f, "conv{(1,0),(0,1)}"))
        self.assertEqual(system.saturation_ring(QQ).symbols[-1].name, "t_")


class TestWitnesses(unittest.TestCase):

    def test_rational_grid_witness(self):
        f = parse_laurent(SQUARE)
        system = FaceSystem.build(f, face_by_label(f, LONG_EDGE))
        witness = find_witness(system)
        self.assertTrue(witness.is_rational)
        self.assertEqual(witness.coordinates, (QQ(1), QQ(-1)))

    def test_modular_zero_is_lifted(self):
        # (2x - 5y)^2 has no zero on the rational grid but one at (1, 2/5)
        f = parse_laurent("4*x^2 - 20*x*y + 25*y^2")
        system = FaceSystem.build(f, face_by_label(f, LONG_EDGE))
        witness = find_witness(system)
        self.assertTrue(witness.is_rational)
        self.assertTrue(system.vanishes_at(witness.coordinates))
        self.assertFalse(all(v in _rational_grid() for v in witness.coordinates))
        self.assertTrue(all(witness.coordinates))

    def test_no_witness_for_empty_face(self):
        f = parse_laurent(REFLEXIVE)
        system = FaceSystem.build(f, face_by_label(f, "conv{(1,0),(0,1)}"))
        self.assertIsNone(find_witness(system))


class TestIsNondegenerate(unittest.TestCase):

    def test_degenerate_with_witness(self):
        report = is_nondegenerate(parse_laurent(SQUARE), seed=1)
        self.assertEqual(report.verdict, DEGENERATE)
        self.assertTrue(report.certified)
        self.assertEqual(report.witness.face_label, LONG_EDGE)
        self.assertEqual(report.witness.coordinates, (QQ(1), QQ(-1)))

    def test_reflexive_is_likely_nondegenerate(self):
        report = is_nondegenerate(parse_laurent(REFLEXIVE), primes=3, seed=5)
        self.assertEqual(report.verdict, LIKELY_NONDEGENERATE)
        self.assertFalse(report.certified)
        self.assertEqual(len(report.primes), 3)
        self.assertTrue(all(r.status == EMPTY for r in report.faces))

    def test_reflexive_is_certified(self):
        report = is_nondegenerate(parse_laurent(REFLEXIVE), seed=5, certify=True)
        self.assertEqual(report.verdict, NONDEGENERATE)
        self.assertTrue(report.certified)

    def test_deterministic_under_seed(self):
        f = parse_laurent(REFLEXIVE)
        self.assertEqual(is_nondegenerate(f, seed=9).primes, is_nondegenerate(f, seed=9).primes)

    def test_one_variable_needs_no_primes(self):
        report = is_nondegenerate(parse_laurent("x + x^-1"))
        self.assertEqual(report.verdict, NONDEGENERATE)
        self.assertEqual(report.primes, [])

    def test_threads_give_the_same_verdict(self):
        f = parse_laurent("x^2 + y^2 + x^-1*y^-1 + x*y")
        self.assertEqual(is_nondegenerate(f, seed=2, threads=3).verdict, is_nondegenerate(f, seed=2).verdict)

    @patch("nondegen._ideal_status")
    def test_disagreeing_primes_are_decided_exactly(self, mock_status):
        mock_status.side_effect = lambda system, p, budget: {11: EMPTY, 13: NONEMPTY, None: EMPTY}[p]
        f = parse_laurent(REFLEXIVE)
        result = _check_face_report(f, face_by_label(f, "conv{(1,0),(0,1)}"), [11, 13], False, 100)
        self.assertEqual(result.status, EMPTY)
        self.assertTrue(result.certified)
        self.assertEqual([c.args[1] for c in mock_status.call_args_list], [11, 13, None])

    @patch("nondegen._ideal_status")
    def test_agreeing_primes_skip_the_exact_check(self, mock_status):
        mock_status.return_value = EMPTY
        f = parse_laurent(REFLEXIVE)
        result = _check_face_report(f, face_by_label(f, "conv{(1,0),(0,1)}"), [11, 13], False, 100)
        self.assertEqual(result.status, EMPTY)
        self.assertFalse(result.certified)
        self.assertEqual([c.args[1] for c in mock_status.call_args_list], [11, 13])

    @patch("nondegen.find_witness")
    @patch("nondegen._ideal_status")
    def test_exact_budget_falls_back_to_modular_witness(self, mock_status, mock_witness):
        mock_status.side_effect = lambda system, p, budget: BUDGET_EXCEEDED if p is None else NONEMPTY
        mock_witness.return_value = Witness(coordinates=(1, 3), field=5, face_label=LONG_EDGE)
        report = is_nondegenerate(parse_laurent(SQUARE), seed=1)
        self.assertEqual(report.verdict, DEGENERATE)
        self.assertFalse(report.certified)
        self.assertEqual(report.witness.field, 5)

    @patch("nondegen.find_witness", return_value=None)
    @patch("nondegen._ideal_status")
    def test_exact_budget_without_witness(self, mock_status, mock_witness):
        mock_status.side_effect = lambda system, p, budget: BUDGET_EXCEEDED if p is None else NONEMPTY
        report = is_nondegenerate(parse_laurent(SQUARE), seed=1)
        self.assertEqual(report.verdict, BUDGET_EXCEEDED)
        mock_witness.assert_called_once()

    @patch("nondegen.random_primes", return_value=[7])
    def test_prime_exhaustion(self, mock_primes):
        with self.assertRaises(PrimeExhaustionError):
            _good_primes(parse_laurent("1/7*x + y"), 1, random.Random(0))
        self.assertGreater(mock_primes.call_count, 1)


if __name__ == "__main__":
    unittest.main()
