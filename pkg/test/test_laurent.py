import random
import unittest

from sympy.polys.domains import QQ

from errors import BadPrimeError, LaurentParseError, UnknownVariableError, ZeroPolynomialError
from laurent import (LaurentPolynomial, default_var_names, face_restriction, format_laurent, log_derivative,
                     monomial_span, parse_laurent, reduce_mod_p)
from polytope import newton_polytope, proper_faces_excluding_origin


def random_polynomial(rng: random.Random) -> LaurentPolynomial:
    nvars = rng.randint(1, 3)
    terms = {}
    for _ in range(rng.randint(1, 5)):
        exponent = tuple(rng.randint(-3, 3) for _ in range(nvars))
        numerator = rng.choice([a for a in range(-9, 10) if a])
        terms[exponent] = QQ(numerator, rng.randint(1, 4))
    return LaurentPolynomial.from_dict(terms, nvars=nvars)


class TestParseLaurent(unittest.TestCase):

    def test_parse_simple(self):
        f = parse_laurent("x + x^-1")
        self.assertEqual(f.var_names, ("x",))
        self.assertEqual(f.terms, {(1,): QQ(1), (-1,): QQ(1)})

    def test_parse_rational_coefficients(self):
        f = parse_laurent("3/2*x^2*y^-1 - 5")
        self.assertEqual(f.var_names, ("x", "y"))
        self.assertEqual(f.terms, {(2, -1): QQ(3, 2), (0, 0): QQ(-5)})

    def test_like_terms_are_merged(self):
        f = parse_laurent("x + 2*x - y")
        self.assertEqual(f.terms, {(1, 0): QQ(3), (0, 1): QQ(-1)})

    def test_names_are_inferred_up_to_the_highest_default(self):
        f = parse_laurent("y")
        self.assertEqual(f.var_names, ("x", "y"))
        self.assertEqual(f.terms, {(0, 1): QQ(1)})

    def test_indexed_names(self):
        f = parse_laurent("x1*x3^-1")
        self.assertEqual(f.var_names, ("x1", "x2", "x3"))
        self.assertEqual(f.support, [(1, 0, -1)])

    def test_explicit_names(self):
        f = parse_laurent("a*b^-1 + b", ["a", "b"])
        self.assertEqual(f.terms, {(1, -1): QQ(1), (0, 1): QQ(1)})

    def test_unknown_variable(self):
        with self.assertRaises(UnknownVariableError) as ctx:
            parse_laurent("x + z", ["x", "y"])
        self.assertEqual(ctx.exception.position, 4)

    def test_zero_polynomial(self):
        with self.assertRaises(ZeroPolynomialError):
            parse_laurent("x - x")

    def test_bad_character_position(self):
        with self.assertRaises(LaurentParseError) as ctx:
            parse_laurent("x + $")
        self.assertEqual(ctx.exception.position, 4)

    def test_dangling_operator(self):
        with self.assertRaises(LaurentParseError):
            parse_laurent("x +")

    def test_zero_denominator(self):
        with self.assertRaises(LaurentParseError):
            parse_laurent("1/0*x")

    def test_missing_exponent(self):
        with self.assertRaises(LaurentParseError):
            parse_laurent("x^")

    def test_format(self):
        self.assertEqual(format_laurent(parse_laurent("x^-1 + x")), "x + x^-1")
        self.assertEqual(format_laurent(parse_laurent("-3/2*x*y^2 + 1")), "-3/2*x*y^2 + 1")

    def test_round_trip_random(self):
        rng = random.Random(20240601)
        for _ in range(150):
            f = random_polynomial(rng)
            if f.is_zero():
                continue
            text = format_laurent(f)
            self.assertEqual(parse_laurent(text, f.var_names), f, text)


class TestLaurentPolynomial(unittest.TestCase):

    def test_default_var_names(self):
        self.assertEqual(default_var_names(3), ("x", "y", "z"))
        self.assertEqual(default_var_names(5), ("x1", "x2", "x3", "x4", "x5"))

    def test_evaluate(self):
        self.assertEqual(parse_laurent("x + x^-1").evaluate([2]), QQ(5, 2))

    def test_evaluate_rejects_zero_coordinates(self):
        with self.assertRaises(ValueError):
            parse_laurent("x + y").evaluate([0, 1])

    def test_negation_and_sum(self):
        f = parse_laurent("x + y")
        self.assertTrue((f - f).is_zero())
        self.assertEqual((-f).terms, {(1, 0): QQ(-1), (0, 1): QQ(-1)})

    def test_log_derivative(self):
        f = parse_laurent("x^2 + x^-1")
        self.assertEqual(log_derivative(f, 1).terms, {(2,): QQ(2), (-1,): QQ(-1)})
        with self.assertRaises(ValueError):
            log_derivative(f, 2)

    def test_log_derivative_is_linear(self):
        rng = random.Random(5)
        for _ in range(200):
            f = random_polynomial(rng)
            g = random_polynomial(rng)
            if f.nvars != g.nvars:
                continue
            for i in range(1, f.nvars + 1):
                self.assertEqual(log_derivative(f + g, i).terms,
                                 (log_derivative(f, i) + log_derivative(g, i)).terms)
                self.assertEqual(log_derivative(f - g, i).terms,
                                 (log_derivative(f, i) - log_derivative(g, i)).terms)

    def test_face_restriction(self):
        f = parse_laurent("x^2 + 2*x*y + y^2 + x")
        edge = next(face for face in proper_faces_excluding_origin(newton_polytope(f)) if face.dim == 1)
        self.assertEqual(face_restriction(f, edge).terms, {(2, 0): QQ(1), (1, 1): QQ(2), (0, 2): QQ(1)})

    def test_reduce_mod_p(self):
        g = reduce_mod_p(parse_laurent("3/2*x"), 5)
        self.assertEqual(int(g.domain.to_int(g.coefficient((1,)))), 4)

    def test_reduce_mod_p_bad_prime(self):
        with self.assertRaises(BadPrimeError):
            reduce_mod_p(parse_laurent("1/7*x + 1"), 7)

    def test_monomial_span(self):
        polys = [parse_laurent("x^-2*y + y^3", ["x", "y"]), parse_laurent("x*y^-1", ["x", "y"])]
        self.assertEqual(monomial_span(polys), (-2, -1))

    def test_pole_orders(self):
        self.assertEqual(parse_laurent("x^2 + x^-1").pole_orders(), (1, 2))
        self.assertEqual(parse_laurent("x").pole_orders(), (0, 1))
        with self.assertRaises(ValueError):
            parse_laurent("x + y").pole_orders()


if __name__ == "__main__":
    unittest.main()
