import itertools
from collections import Counter
from dataclasses import dataclass
from functools import total_ordering
from math import gcd, lcm
from typing import Any, Optional, Sequence

import numpy as np
from scipy.spatial import ConvexHull
from sympy import Matrix
from sympy.polys.domains import QQ, ZZ
from sympy.polys.matrices import DomainMatrix

from errors import DimensionDeficiencyError, IntegrityError
from exact_linalg import exact_rank
from laurent import Exponent, LaurentPolynomial
from settings import create_logger

logger = create_logger(__name__)

Point = tuple[int, ...]
Facet = tuple[Point, int]


def floor_qq(q: Any) -> int:
    return int(q.numerator) // int(q.denominator)


def ceil_qq(q: Any) -> int:
    return -(-int(q.numerator) // int(q.denominator))


@total_ordering
@dataclass(frozen=True)
class ExtendedRational:
    """
    Nonnegative rational or +infinity (value None)
    """
    value: Optional[Any] = None

    @classmethod
    def finite(cls, value: Any) -> "ExtendedRational":
        return cls(QQ.convert(value))

    @property
    def is_finite(self) -> bool:
        return self.value is not None

    def __lt__(self, other: Any) -> bool:
        if not isinstance(other, ExtendedRational):
            other = ExtendedRational.finite(other)
        if self.value is None:
            return False
        if other.value is None:
            return True
        return self.value < other.value

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, ExtendedRational):
            if self.value is None:
                return False
            return self.value == other
        return self.value == other.value

    def __hash__(self) -> int:
        return hash(self.value)

    def __str__(self) -> str:
        return "infinity" if self.value is None else str(self.value)


INFINITY = ExtendedRational(None)


@dataclass(frozen=True)
class Face:
    """
    Face of a Newton polytope, cut out by its active facets
    """
    vertex_indices: tuple[int, ...]
    vertices: tuple[Point, ...]
    active_facets: tuple[int, ...]
    equations: tuple[Facet, ...]
    dim: int
    contains_origin: bool

    def contains(self, alpha: Sequence[int]) -> bool:
        """Membership for points already known to lie in Δ."""
        return all(_dot(u, alpha) == -c for u, c in self.equations)

    def label(self) -> str:
        if len(self.vertices) == 1:
            return _format_point(self.vertices[0])
        return "conv{" + ",".join(_format_point(v) for v in sorted(self.vertices, reverse=True)) + "}"


@dataclass(frozen=True)
class NewtonPolytope:
    """
    Δ(f) = conv({0} ∪ supp f) with the facet presentation ⟨u,α⟩ ≥ −c
    """
    nvars: int
    vertices: tuple[Point, ...]
    facets: tuple[Facet, ...]
    dim: int
    faces: tuple[Face, ...] = ()

    @property
    def is_full_dimensional(self) -> bool:
        return self.dim == self.nvars

    def require_full_dimension(self) -> None:
        if not self.is_full_dimensional:
            raise DimensionDeficiencyError(self.dim, self.nvars)

    def vertex_set(self) -> frozenset:
        return frozenset(range(len(self.vertices)))


def _dot(u: Sequence[int], v: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(u, v))


def _format_point(p: Point) -> str:
    return "(" + ",".join(str(a) for a in p) + ")"


def _primitive(vector: Sequence[Any]) -> Point:
    values = [QQ.convert(a) for a in vector]
    scale = lcm(*(int(q.denominator) for q in values))
    integral = [int(q.numerator) * (scale // int(q.denominator)) for q in values]
    g = 0
    for a in integral:
        g = gcd(g, a)
    return tuple(a // g for a in integral)


def _affine_dim(points: Sequence[Point]) -> int:
    if len(points) <= 1:
        return 0
    base = points[0]
    rows = [[a - b for a, b in zip(p, base)] for p in points[1:]]
    return exact_rank(DomainMatrix([[QQ(a) for a in row] for row in rows], (len(rows), len(base)), QQ))


def _exact_facet(points: Sequence[Point], simplex: Sequence[int]) -> Optional[Facet]:
    base = points[simplex[0]]
    diffs = Matrix([[a - b for a, b in zip(points[i], base)] for i in simplex[1:]])
    kernel = diffs.nullspace()
    if len(kernel) != 1:
        return None
    u = _primitive(list(kernel[0]))
    values = [_dot(u, p) for p in points]
    low, high = min(values), max(values)
    level = _dot(u, base)
    if level == low:
        return u, -low
    if level == high:
        return tuple(-a for a in u), high
    return None


def _hull_facets(points: list[Point]) -> list[Facet]:
    """Facets of a full-dimensional point set containing the origin."""
    n = len(points[0])
    if n == 1:
        values = [p[0] for p in points]
        return [((1,), -min(values)), ((-1,), max(values))]
    # qhull only proposes candidates; every facet is recomputed and verified exactly
    hull = ConvexHull(np.array(points, dtype=float))
    facets = set()
    for simplex in hull.simplices:
        facet = _exact_facet(points, list(simplex))
        if facet is None:
            raise IntegrityError("convex hull facet failed exact verification")
        facets.add(facet)
    for u, c in facets:
        if any(_dot(u, p) < -c for p in points):
            raise IntegrityError("convex hull facet is violated by a support point")
    return sorted(facets)


def _vertices_from_facets(points: list[Point], facets: list[Facet]) -> list[Point]:
    n = len(points[0])
    vertices = []
    for p in points:
        active = [u for u, c in facets if _dot(u, p) == -c]
        if len(active) >= n and exact_rank(
                DomainMatrix([[QQ(a) for a in u] for u in active], (len(active), n), QQ)) == n:
            vertices.append(p)
    return sorted(vertices)


def _face_lattice(vertices: list[Point], facets: list[Facet]) -> list[Face]:
    incidence = [frozenset(i for i, v in enumerate(vertices) if _dot(u, v) == -c) for u, c in facets]
    vertex_sets = {frozenset(range(len(vertices)))}
    frontier = set(incidence)
    while frontier:
        vertex_sets |= frontier
        fresh = set()
        for a in frontier:
            for b in incidence:
                meet = a & b
                if meet and meet not in vertex_sets:
                    fresh.add(meet)
        frontier = fresh
    faces = []
    for vertex_set in vertex_sets:
        indices = tuple(sorted(vertex_set))
        active = tuple(j for j, inc in enumerate(incidence) if vertex_set <= inc)
        equations = tuple(facets[j] for j in active)
        pts = tuple(vertices[i] for i in indices)
        faces.append(Face(vertex_indices=indices, vertices=pts, active_facets=active, equations=equations,
                          dim=_affine_dim(list(pts)),
                          contains_origin=all(c == 0 for _, c in equations)))
    faces.sort(key=lambda face: (face.dim, face.vertex_indices))
    return faces


def _lower_dimensional_vertices(points: list[Point], dim: int) -> list[Point]:
    if dim == 0:
        return [tuple(0 for _ in points[0])]
    n = len(points[0])
    matrix = DomainMatrix([[QQ(a) for a in p] for p in points], (len(points), n), QQ)
    _, pivots = matrix.rref()
    # projecting onto pivot coordinates is injective on the linear span of the points
    projected = [tuple(p[j] for j in pivots) for p in points]
    facets = _hull_facets(sorted(set(projected)))
    keep = set(_vertices_from_facets(sorted(set(projected)), facets))
    return sorted({p for p, q in zip(points, projected) if q in keep})


def newton_polytope(f: LaurentPolynomial) -> NewtonPolytope:
    n = f.nvars
    points = sorted({tuple(0 for _ in range(n))} | {tuple(a) for a in f.support})
    dim = _affine_dim(points)
    if dim < n:
        logger.debug("Δ(f) has dimension %s < %s", dim, n)
        return NewtonPolytope(nvars=n, vertices=tuple(_lower_dimensional_vertices(points, dim)),
                              facets=(), dim=dim)
    facets = _hull_facets(points)
    vertices = _vertices_from_facets(points, facets)
    faces = _face_lattice(vertices, facets)
    logger.debug("Δ(f): %s vertices, %s facets, %s faces", len(vertices), len(facets), len(faces))
    return NewtonPolytope(nvars=n, vertices=tuple(vertices), facets=tuple(facets), dim=dim, faces=tuple(faces))


def _facets_of(face: Face, faces: Sequence[Face]) -> list[Face]:
    inner = set(face.vertex_indices)
    return [g for g in faces if g.dim == face.dim - 1 and set(g.vertex_indices) <= inner]


def _triangulate(face: Face, faces: Sequence[Face]) -> list[tuple[int, ...]]:
    if face.dim == 0:
        return [face.vertex_indices]
    apex = face.vertex_indices[0]
    simplices = []
    for sub in _facets_of(face, faces):
        if apex in sub.vertex_indices:
            continue
        simplices.extend((apex,) + s for s in _triangulate(sub, faces))
    return simplices


def normalized_volume(polytope: NewtonPolytope) -> int:
    """n!·Vol(Δ) via a pulling (fan) triangulation from the first vertex of each face."""
    polytope.require_full_dimension()
    n = polytope.nvars
    whole = next(face for face in polytope.faces if face.dim == n)
    total = 0
    for simplex in _triangulate(whole, polytope.faces):
        base = polytope.vertices[simplex[0]]
        rows = [[ZZ(a - b) for a, b in zip(polytope.vertices[i], base)] for i in simplex[1:]]
        total += abs(int(DomainMatrix(rows, (n, n), ZZ).det()))
    return total


def proper_faces_excluding_origin(polytope: NewtonPolytope) -> list[Face]:
    return [face for face in polytope.faces if face.dim < polytope.dim and not face.contains_origin]


def contains_origin_interior(polytope: NewtonPolytope) -> bool:
    return polytope.is_full_dimensional and all(c > 0 for _, c in polytope.facets)


def weight_value(polytope: NewtonPolytope, alpha: Sequence[int]) -> Optional[Any]:
    """Gauge w(α) = min{c ≥ 0 : α ∈ cΔ} as a QQ element, None for infinity."""
    value = QQ.zero
    for u, c in polytope.facets:
        pairing = _dot(u, alpha)
        if c == 0:
            if pairing < 0:
                return None
        elif pairing < 0:
            ratio = QQ(-pairing, c)
            if ratio > value:
                value = ratio
    return value


def weight(polytope: NewtonPolytope, alpha: Sequence[int]) -> ExtendedRational:
    polytope.require_full_dimension()
    value = weight_value(polytope, alpha)
    return INFINITY if value is None else ExtendedRational(value)


def in_dilate(polytope: NewtonPolytope, alpha: Sequence[int], c: Any) -> bool:
    """
    Direct facet test α ∈ cΔ. Since ⟨u,α⟩ is an integer, ⟨u,α⟩ ≥ −⌊c·e⌋ holds exactly when
    ⟨u,α⟩ ≥ −c·e, so the floors in the twisting divisors never need to be taken explicitly.
    """
    c = QQ.convert(c)
    return all(_dot(u, alpha) >= -floor_qq(c * level) for u, level in polytope.facets)


def lattice_points_in_dilate(polytope: NewtonPolytope, c: Any) -> list[Point]:
    polytope.require_full_dimension()
    c = QQ.convert(c)
    if c < 0:
        return []
    ranges = []
    for i in range(polytope.nvars):
        low = min(v[i] for v in polytope.vertices)
        high = max(v[i] for v in polytope.vertices)
        ranges.append(range(floor_qq(c * low), ceil_qq(c * high) + 1))
    points = []
    for alpha in itertools.product(*ranges):
        value = weight_value(polytope, alpha)
        if value is not None and value <= c:
            points.append(alpha)
    return points


def weight_census(polytope: NewtonPolytope, c_max: Any) -> dict[Any, int]:
    census = Counter(weight_value(polytope, alpha) for alpha in lattice_points_in_dilate(polytope, c_max))
    return {key: census[key] for key in sorted(census)}


def weight_table(polytope: NewtonPolytope, c_max: Any) -> dict[Exponent, Any]:
    return {alpha: weight_value(polytope, alpha) for alpha in lattice_points_in_dilate(polytope, c_max)}
