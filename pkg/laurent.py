import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Iterable, Mapping, Optional, Sequence

from sympy.polys.domains import GF, QQ
from sympy.polys.domains.domain import Domain

from errors import (BadPrimeError, FaceError, LaurentParseError, UnknownVariableError,
                    ZeroPolynomialError)

if TYPE_CHECKING:
    from polytope import Face

Exponent = tuple[int, ...]
Coefficient = Any

DEFAULT_VAR_NAMES = ("x", "y", "z", "w")

_TOKEN_RE = re.compile(r"\s*(?:(?P<int>\d+)|(?P<var>[A-Za-z]+\d*)|(?P<op>[-+*/^]))")
_INDEXED_VAR_RE = re.compile(r"^x(\d+)$")


def default_var_names(n: int) -> tuple[str, ...]:
    if n <= len(DEFAULT_VAR_NAMES):
        return DEFAULT_VAR_NAMES[:n]
    return tuple(f"x{i}" for i in range(1, n + 1))


@dataclass(frozen=True)
class Monomial:
    """
    Exponent vector of a torus monomial
    """
    exponents: Exponent

    @property
    def nvars(self) -> int:
        return len(self.exponents)


@dataclass(frozen=True)
class LaurentPolynomial:
    """
    Laurent polynomial with coefficients in QQ or a prime field GF(p).
    Terms are kept sorted lexicographically descending by exponent vector.
    """
    nvars: int
    items: tuple[tuple[Exponent, Coefficient], ...]
    var_names: tuple[str, ...]
    domain: Domain = field(default=QQ)

    @classmethod
    def from_dict(cls, terms: Mapping[Exponent, Any], var_names: Optional[Sequence[str]] = None,
                  nvars: Optional[int] = None, domain: Domain = QQ) -> "LaurentPolynomial":
        if nvars is None:
            if var_names:
                nvars = len(var_names)
            elif terms:
                nvars = len(next(iter(terms)))
            else:
                raise ValueError("nvars cannot be inferred from an empty term map")
        if nvars < 1:
            raise ValueError("a Laurent polynomial needs at least one variable")
        names = tuple(var_names) if var_names else default_var_names(nvars)
        if len(names) != nvars:
            raise ValueError(f"expected {nvars} variable names, got {len(names)}")
        cleaned = {}
        for exponent, coeff in terms.items():
            exponent = tuple(int(a) for a in exponent)
            if len(exponent) != nvars:
                raise ValueError(f"exponent {exponent} does not have arity {nvars}")
            coeff = domain.convert(coeff)
            if coeff:
                cleaned[exponent] = coeff
        items = tuple(sorted(cleaned.items(), key=lambda item: item[0], reverse=True))
        return cls(nvars=nvars, items=items, var_names=names, domain=domain)

    @property
    def terms(self) -> dict[Exponent, Coefficient]:
        return dict(self.items)

    @property
    def support(self) -> list[Exponent]:
        return [exponent for exponent, _ in self.items]

    def is_zero(self) -> bool:
        return not self.items

    def coefficient(self, exponent: Exponent) -> Coefficient:
        return self.terms.get(tuple(exponent), self.domain.zero)

    def with_terms(self, terms: Mapping[Exponent, Any]) -> "LaurentPolynomial":
        return LaurentPolynomial.from_dict(terms, self.var_names, self.nvars, self.domain)

    def __neg__(self) -> "LaurentPolynomial":
        return self.with_terms({a: -c for a, c in self.items})

    def __add__(self, other: "LaurentPolynomial") -> "LaurentPolynomial":
        self._check_compatible(other)
        terms = self.terms
        for exponent, coeff in other.items:
            terms[exponent] = terms.get(exponent, self.domain.zero) + coeff
        return self.with_terms(terms)

    def __sub__(self, other: "LaurentPolynomial") -> "LaurentPolynomial":
        return self + (-other)

    def _check_compatible(self, other: "LaurentPolynomial") -> None:
        if self.nvars != other.nvars or self.domain != other.domain:
            raise ValueError("Laurent polynomials live in different rings")

    def evaluate(self, point: Sequence[Any]) -> Coefficient:
        """Value at a torus point; coordinates must be nonzero elements of the domain."""
        K = self.domain
        coords = [K.convert(value) for value in point]
        if len(coords) != self.nvars:
            raise ValueError(f"point must have {self.nvars} coordinates")
        if any(not value for value in coords):
            raise ValueError("torus points have no zero coordinates")
        total = K.zero
        for exponent, coeff in self.items:
            term = coeff
            for value, a in zip(coords, exponent):
                if a >= 0:
                    term = term * value ** a
                else:
                    term = term * (K.one / value) ** (-a)
            total += term
        return total

    def shift(self, offset: Exponent) -> "LaurentPolynomial":
        return self.with_terms({tuple(a + o for a, o in zip(exponent, offset)): c
                                for exponent, c in self.items})

    def exponent_range(self, i: int = 0) -> tuple[int, int]:
        values = [exponent[i] for exponent in self.support] or [0]
        return min(values), max(values)

    def pole_orders(self) -> tuple[int, int]:
        """(order at 0, order at ∞) of a one-variable f on the projective line."""
        if self.nvars != 1:
            raise ValueError("pole orders at 0 and ∞ only make sense for n = 1")
        low, high = self.exponent_range(0)
        return max(0, -low), max(0, high)

    def __str__(self) -> str:
        return format_laurent(self)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    position = 0
    while position < len(text):
        if text[position:].strip() == "":
            break
        match = _TOKEN_RE.match(text, position)
        if match is None:
            bad = len(text[position:]) - len(text[position:].lstrip()) + position
            raise LaurentParseError(f"unexpected character {text[bad]!r}", bad)
        kind = match.lastgroup
        start = match.start(kind)
        tokens.append((kind, match.group(kind), start))
        position = match.end()
    tokens.append(("end", "", len(text)))
    return tokens


def _infer_var_names(tokens: list[tuple[str, str, int]]) -> tuple[str, ...]:
    seen = []
    for kind, value, _ in tokens:
        if kind == "var" and value not in seen:
            seen.append(value)
    if not seen:
        return default_var_names(1)
    if all(name in DEFAULT_VAR_NAMES for name in seen):
        top = max(DEFAULT_VAR_NAMES.index(name) for name in seen)
        return DEFAULT_VAR_NAMES[:top + 1]
    indexed = [_INDEXED_VAR_RE.match(name) for name in seen]
    if all(indexed) and all(int(m.group(1)) >= 1 for m in indexed):
        top = max(int(m.group(1)) for m in indexed)
        return tuple(f"x{i}" for i in range(1, top + 1))
    return tuple(seen)


class _Parser:
    def __init__(self, tokens: list[tuple[str, str, int]], var_names: tuple[str, ...]):
        self.tokens = tokens
        self.index = 0
        self.var_names = var_names
        self.nvars = len(var_names)

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.index]

    def advance(self) -> tuple[str, str, int]:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def expect_op(self, op: str) -> None:
        kind, value, position = self.advance()
        if kind != "op" or value != op:
            raise LaurentParseError(f"expected {op!r}, found {value or 'end of input'!r}", position)

    def fail(self, what: str) -> None:
        kind, value, position = self.peek()
        found = "end of input" if kind == "end" else repr(value)
        raise LaurentParseError(f"expected {what}, found {found}", position)

    def parse_poly(self) -> dict[Exponent, Any]:
        terms: dict[Exponent, Any] = {}
        sign = 1
        kind, value, _ = self.peek()
        if kind == "op" and value in "+-":
            self.advance()
            sign = -1 if value == "-" else 1
        while True:
            exponent, coeff = self.parse_term()
            terms[exponent] = terms.get(exponent, QQ.zero) + sign * coeff
            kind, value, _ = self.peek()
            if kind == "end":
                return terms
            if kind == "op" and value in "+-":
                self.advance()
                sign = -1 if value == "-" else 1
                continue
            self.fail("'+' or '-'")

    def parse_term(self) -> tuple[Exponent, Any]:
        exponent = [0] * self.nvars
        coeff = QQ.one
        kind, _, _ = self.peek()
        if kind == "int":
            coeff = self.parse_rational()
            kind, value, _ = self.peek()
            if not (kind == "op" and value == "*"):
                return tuple(exponent), coeff
            self.advance()
        elif kind != "var":
            self.fail("a coefficient or a variable")
        self.parse_factor(exponent)
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value == "*":
                self.advance()
                self.parse_factor(exponent)
            else:
                return tuple(exponent), coeff

    def parse_rational(self) -> Any:
        _, numerator, _ = self.advance()
        kind, value, _ = self.peek()
        if kind == "op" and value == "/":
            self.advance()
            kind, denominator, position = self.peek()
            if kind != "int":
                self.fail("a positive integer denominator")
            self.advance()
            if int(denominator) == 0:
                raise LaurentParseError("zero denominator", position)
            return QQ(int(numerator), int(denominator))
        return QQ(int(numerator))

    def parse_factor(self, exponent: list[int]) -> None:
        kind, name, position = self.peek()
        if kind != "var":
            self.fail("a variable")
        self.advance()
        if name not in self.var_names:
            raise UnknownVariableError(f"unknown variable {name!r}", position)
        power = 1
        kind, value, _ = self.peek()
        if kind == "op" and value == "^":
            self.advance()
            sign = 1
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                sign = -1 if value == "-" else 1
            kind, value, _ = self.peek()
            if kind != "int":
                self.fail("an integer exponent")
            self.advance()
            power = sign * int(value)
        exponent[self.var_names.index(name)] += power


def parse_laurent(text: str, var_names: Optional[Sequence[str]] = None) -> LaurentPolynomial:
    tokens = _tokenize(text)
    names = tuple(var_names) if var_names else _infer_var_names(tokens)
    terms = _Parser(tokens, names).parse_poly()
    f = LaurentPolynomial.from_dict(terms, names)
    if f.is_zero():
        raise ZeroPolynomialError()
    return f


def _format_monomial(exponent: Exponent, var_names: Sequence[str]) -> str:
    factors = []
    for name, a in zip(var_names, exponent):
        if a == 1:
            factors.append(name)
        elif a != 0:
            factors.append(f"{name}^{a}")
    return "*".join(factors)


def _coefficient_int(domain: Domain, coeff: Any) -> Any:
    if domain.is_FiniteField:
        return int(domain.to_int(coeff))
    return coeff


def format_laurent(f: LaurentPolynomial) -> str:
    if f.is_zero():
        return "0"
    pieces = []
    for exponent, coeff in f.items:
        coeff = _coefficient_int(f.domain, coeff)
        negative = coeff < 0
        magnitude = -coeff if negative else coeff
        monomial = _format_monomial(exponent, f.var_names)
        if not monomial:
            body = str(magnitude)
        elif magnitude == 1:
            body = monomial
        else:
            body = f"{magnitude}*{monomial}"
        if not pieces:
            pieces.append(f"-{body}" if negative else body)
        else:
            pieces.append(f"- {body}" if negative else f"+ {body}")
    return " ".join(pieces)


def log_derivative(f: LaurentPolynomial, i: int) -> LaurentPolynomial:
    """x_i·∂f/∂x_i for a 1-based variable index i."""
    if not 1 <= i <= f.nvars:
        raise ValueError(f"variable index {i} outside 1..{f.nvars}")
    return f.with_terms({exponent: exponent[i - 1] * coeff
                         for exponent, coeff in f.items if exponent[i - 1] != 0})


def face_restriction(f: LaurentPolynomial, face: "Face") -> LaurentPolynomial:
    restricted = f.with_terms({exponent: coeff for exponent, coeff in f.items if face.contains(exponent)})
    if restricted.is_zero():
        raise FaceError("face carries no terms")
    return restricted


def reduce_mod_p(f: LaurentPolynomial, p: int) -> LaurentPolynomial:
    if f.domain.is_FiniteField:
        raise ValueError("polynomial is already over a prime field")
    K = GF(p, symmetric=False)
    terms = {}
    for exponent, coeff in f.items:
        numerator, denominator = int(coeff.numerator), int(coeff.denominator)
        if denominator % p == 0:
            raise BadPrimeError(p)
        terms[exponent] = K(numerator) / K(denominator)
    return LaurentPolynomial.from_dict(terms, f.var_names, f.nvars, K)


def monomial_span(polys: Iterable[LaurentPolynomial]) -> Exponent:
    """Coordinatewise minimum exponent over all terms of the given polynomials."""
    polys = list(polys)
    n = polys[0].nvars
    lows = [0] * n
    first = True
    for poly in polys:
        for exponent in poly.support:
            if first:
                lows = list(exponent)
                first = False
            else:
                lows = [min(a, b) for a, b in zip(lows, exponent)]
    return tuple(lows)
