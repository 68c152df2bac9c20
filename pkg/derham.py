import itertools
import os
import threading
from dataclasses import dataclass
from typing import Any, Optional

from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from errors import IntegrityError, LevelError
from exact_linalg import dump_matrix, exact_rank, from_entries, is_zero, subcomplex_image_dim
from laurent import Exponent, LaurentPolynomial
from polytope import NewtonPolytope, ceil_qq, lattice_points_in_dilate, newton_polytope, weight_value
from settings import create_logger

logger = create_logger(__name__)

# x^α·dlog x_I with I sorted ascending (0-based variable indices)
BasisForm = tuple[Exponent, tuple[int, ...]]


def wedge_sign(i: int, index_set: tuple[int, ...]) -> int:
    """Sign of dlog x_i ∧ dlog x_I once rewritten as ±dlog x_{I ∪ {i}}."""
    return -1 if sum(1 for j in index_set if j < i) % 2 else 1


@dataclass(frozen=True)
class ComplexSlice:
    """
    Level λ of the Newton filtration: degree p holds the forms x^α·dlog x_I with |I| = p,
    p ≥ ⌈λ⌉ and w(α) ≤ p − λ. differentials[p] maps degree p to degree p + 1.
    """
    level: Any
    nvars: int
    bases: tuple[tuple[BasisForm, ...], ...]
    differentials: tuple[DomainMatrix, ...]

    def dim(self, p: int) -> int:
        return len(self.bases[p])

    def index(self, p: int) -> dict[BasisForm, int]:
        return {form: k for k, form in enumerate(self.bases[p])}

    def incoming(self, p: int) -> DomainMatrix:
        if p == 0:
            return DomainMatrix({}, (self.dim(0), 0), QQ)
        return self.differentials[p - 1]

    def outgoing(self, p: int) -> DomainMatrix:
        if p == self.nvars:
            return DomainMatrix({}, (0, self.dim(p)), QQ)
        return self.differentials[p]

    def check_complex(self) -> None:
        for p in range(len(self.differentials) - 1):
            first, second = self.differentials[p], self.differentials[p + 1]
            if 0 in first.shape or 0 in second.shape:
                continue
            if not is_zero(second * first):
                raise IntegrityError(f"∇∘∇ ≠ 0 in degree {p} at level {self.level}")


class GradedSlice(ComplexSlice):
    """
    Gr^λ of the Newton filtration: w(α) = p − λ exactly, and the differential keeps the
    terms that raise the weight by exactly one.
    """


class TwistedDeRham:
    """
    Twisted de Rham complex of one Laurent polynomial, with its weight data cached.
    """

    def __init__(self, f: LaurentPolynomial, accelerated: bool = False, seed: Optional[int] = None,
                 polytope: Optional[NewtonPolytope] = None):
        self.f = f
        self.n = f.nvars
        self.polytope = polytope or newton_polytope(f)
        self.polytope.require_full_dimension()
        self.accelerated = accelerated
        self.seed = seed
        self._weights: dict[Exponent, Any] = {}
        self._points: list[tuple[Any, Exponent]] = []
        self._points_bound = None
        self._lock = threading.Lock()
        self._slices: dict[tuple[Any, bool], ComplexSlice] = {}

    def weight_of(self, alpha: Exponent) -> Any:
        if alpha not in self._weights:
            self._weights[alpha] = weight_value(self.polytope, alpha)
        return self._weights[alpha]

    def points_up_to(self, c: Any) -> list[tuple[Any, Exponent]]:
        """(w(α), α) for the lattice points of cΔ, sorted by α."""
        c = QQ.convert(c)
        if c < 0:
            return []
        with self._lock:
            if self._points_bound is None or c > self._points_bound:
                points = lattice_points_in_dilate(self.polytope, c)
                self._points = sorted(((self.weight_of(alpha), alpha) for alpha in points),
                                      key=lambda item: item[1])
                self._points_bound = c
            table = self._points
        return [(w, alpha) for w, alpha in table if w <= c]

    def count_up_to(self, c: Any) -> int:
        """#{α : w(α) ≤ c}, zero for c < 0."""
        return len(self.points_up_to(c))

    def count_at(self, c: Any) -> int:
        """N(c) = #{α : w(α) = c}, zero for c < 0."""
        c = QQ.convert(c)
        return sum(1 for w, _ in self.points_up_to(c) if w == c)

    def weights(self) -> list[Any]:
        """Weights of the lattice points of nΔ."""
        return [w for w, _ in self.points_up_to(self.n)]

    def _check_level(self, level: Any) -> Any:
        level = QQ.convert(level)
        if level > self.n:
            raise LevelError(f"level {level} above top degree {self.n}")
        return level

    def _basis(self, level: Any, p: int, graded: bool) -> list[BasisForm]:
        if p < ceil_qq(level):
            return []
        bound = QQ(p) - level
        alphas = [alpha for w, alpha in self.points_up_to(bound) if not graded or w == bound]
        return [(alpha, index_set)
                for index_set in itertools.combinations(range(self.n), p)
                for alpha in alphas]

    def _differential(self, source: list[BasisForm], target: list[BasisForm], level: Any, p: int,
                      graded: bool) -> DomainMatrix:
        position = {form: k for k, form in enumerate(target)}
        target_weight = QQ(p + 1) - level
        entries: dict[tuple[int, int], Any] = {}

        def add(alpha: Exponent, index_set: tuple[int, ...], column: int, value: Any) -> None:
            if graded and self.weight_of(alpha) != target_weight:
                return
            row = position.get((alpha, index_set))
            if row is None:
                raise IntegrityError(f"∇ leaves the level {level} slice at {alpha}")
            entries[(row, column)] = entries.get((row, column), QQ.zero) + value

        for column, (alpha, index_set) in enumerate(source):
            for i in range(self.n):
                if i in index_set:
                    continue
                sign = wedge_sign(i, index_set)
                joined = tuple(sorted(index_set + (i,)))
                if alpha[i]:
                    add(alpha, joined, column, QQ(sign * alpha[i]))
                for beta, c in self.f.items:
                    if beta[i]:
                        shifted = tuple(a + b for a, b in zip(alpha, beta))
                        add(shifted, joined, column, sign * beta[i] * c)
        return from_entries(entries, (len(target), len(source)))

    def _build(self, level: Any, graded: bool) -> ComplexSlice:
        level = self._check_level(level)
        key = (level, graded)
        if key not in self._slices:
            bases = [self._basis(level, p, graded) for p in range(self.n + 1)]
            differentials = [self._differential(bases[p], bases[p + 1], level, p, graded)
                             for p in range(self.n)]
            cls = GradedSlice if graded else ComplexSlice
            built = cls(level=level, nvars=self.n, bases=tuple(tuple(b) for b in bases),
                        differentials=tuple(differentials))
            logger.debug("%s level %s: dims %s", "graded" if graded else "filtration", level,
                         [len(b) for b in bases])
            self._slices[key] = built
        return self._slices[key]

    def filtration_level(self, level: Any) -> ComplexSlice:
        return self._build(level, graded=False)

    def graded_level(self, level: Any) -> GradedSlice:
        return self._build(level, graded=True)

    def rank(self, M: DomainMatrix) -> int:
        return exact_rank(M, accelerated=self.accelerated, seed=self.seed)

    def cohomology_dims(self, complex_slice: ComplexSlice) -> list[int]:
        ranks = [self.rank(M) for M in complex_slice.differentials]
        dims = []
        for p in range(self.n + 1):
            rank_out = ranks[p] if p < self.n else 0
            rank_in = ranks[p - 1] if p > 0 else 0
            dims.append(complex_slice.dim(p) - rank_out - rank_in)
        return dims

    def betti_numbers(self) -> list[int]:
        return self.cohomology_dims(self.filtration_level(0))

    def graded_cohomology(self, level: Any) -> list[int]:
        return self.cohomology_dims(self.graded_level(level))

    def image_dim(self, level: Any, i: int) -> int:
        """dim Image{H^i(level λ) → H^i(level 0)}."""
        if not 0 <= i <= self.n:
            raise LevelError(f"degree {i} outside 0..{self.n}")
        level = self._check_level(level)
        if level < 0:
            raise LevelError("filtration image is taken for 0 ≤ λ ≤ n")
        sub = self.filtration_level(level)
        ambient = self.filtration_level(0)
        position = ambient.index(i)
        kept = [position[form] for form in sub.bases[i]]
        rank_out = self.rank(sub.outgoing(i)) if sub.dim(i) else 0
        return subcomplex_image_dim(sub.dim(i), rank_out, ambient.incoming(i), kept,
                                    accelerated=self.accelerated, seed=self.seed)

    def dump(self, level: Any, directory: str) -> list[str]:
        """Writes the differentials of a level as triplet files; returns the paths."""
        complex_slice = self.filtration_level(level)
        os.makedirs(directory, exist_ok=True)
        tag = str(complex_slice.level).replace("/", "_")
        paths = []
        for p, M in enumerate(complex_slice.differentials):
            path = os.path.join(directory, f"level_{tag}_d{p}.txt")
            with open(path, "w", encoding="utf-8") as handle:
                handle.write(dump_matrix(M))
            paths.append(path)
        return paths


def build_filtration_level(f: LaurentPolynomial, level: Any) -> ComplexSlice:
    return TwistedDeRham(f).filtration_level(level)


def build_graded_level(f: LaurentPolynomial, level: Any) -> GradedSlice:
    return TwistedDeRham(f).graded_level(level)


def betti_numbers(f: LaurentPolynomial) -> list[int]:
    return TwistedDeRham(f).betti_numbers()


def filtration_image_dim(f: LaurentPolynomial, level: Any, i: int) -> int:
    return TwistedDeRham(f).image_dim(level, i)
