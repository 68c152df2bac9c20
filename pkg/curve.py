from dataclasses import dataclass, field
from typing import Any, Optional

from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from derham import TwistedDeRham
from errors import CurveError, LevelError, StabilizationError, TruncationUnstableError
from exact_linalg import exact_rank, from_entries, hstack, kernel_basis, subcomplex_image_dim, to_dod
from laurent import LaurentPolynomial
from models import CurveDualityReport, CurveFiltrationReport
from polytope import ceil_qq, floor_qq
from settings import DELIGNE_LEVELS, TRUNCATION_STEP, create_logger

logger = create_logger(__name__)

# (chart, sheaf degree, exponent); charts "0" = P^1 - {∞}, "1" = P^1 - {0}, "01" = their overlap
Label = tuple[str, int, int]


@dataclass(frozen=True)
class PointDivisor:
    """
    m0·[0] + m_inf·[∞] on the projective line
    """
    m0: int = 0
    m_inf: int = 0

    def __add__(self, other: "PointDivisor") -> "PointDivisor":
        return PointDivisor(self.m0 + other.m0, self.m_inf + other.m_inf)

    def __sub__(self, other: "PointDivisor") -> "PointDivisor":
        return PointDivisor(self.m0 - other.m0, self.m_inf - other.m_inf)

    def __neg__(self) -> "PointDivisor":
        return PointDivisor(-self.m0, -self.m_inf)

    def __le__(self, other: "PointDivisor") -> bool:
        return self.m0 <= other.m0 and self.m_inf <= other.m_inf

    @property
    def is_effective(self) -> bool:
        return self.m0 >= 0 and self.m_inf >= 0

    def reduced(self) -> "PointDivisor":
        return PointDivisor(1 if self.m0 > 0 else 0, 1 if self.m_inf > 0 else 0)

    def floor_multiple(self, c: Any) -> "PointDivisor":
        c = QQ.convert(c)
        return PointDivisor(floor_qq(c * self.m0), floor_qq(c * self.m_inf))

    def ceil_multiple(self, c: Any) -> "PointDivisor":
        c = QQ.convert(c)
        return PointDivisor(ceil_qq(c * self.m0), ceil_qq(c * self.m_inf))

    def __str__(self) -> str:
        return f"{self.m0}[0] + {self.m_inf}[∞]"


BOUNDARY = PointDivisor(1, 1)


def pole_divisor(f: LaurentPolynomial) -> PointDivisor:
    e0, e_inf = f.pole_orders()
    return PointDivisor(e0, e_inf)


@dataclass(frozen=True)
class TwoTermComplex:
    """
    [O(D0) → Ω̌¹(D1)] with ∇ = d + df in the dlog x trivialization; D0 None drops the degree-0 term
    and f None gives the untwisted d.
    """
    D0: Optional[PointDivisor]
    D1: PointDivisor
    f: Optional[LaurentPolynomial] = None

    def __post_init__(self):
        if self.f is not None and self.f.nvars != 1:
            raise CurveError("two-term complexes live on the projective line (n = 1)")

    @property
    def pole_orders(self) -> tuple[int, int]:
        return self.f.pole_orders() if self.f is not None else (0, 0)

    def nabla(self, k: int) -> dict[int, Any]:
        """∇x^k = k·x^k + Σ c_β·β·x^(k+β), as exponent → coefficient."""
        image: dict[int, Any] = {}
        if k:
            image[k] = QQ(k)
        if self.f is not None:
            for (beta,), c in self.f.items:
                if beta:
                    image[k + beta] = image.get(k + beta, QQ.zero) + beta * c
        return {e: v for e, v in image.items() if v}

    def shifted(self, E: PointDivisor) -> "TwoTermComplex":
        return TwoTermComplex(None if self.D0 is None else self.D0 + E, self.D1 + E, self.f)

    def contained_in(self, other: "TwoTermComplex") -> bool:
        if self.f != other.f or not self.D1 <= other.D1:
            return False
        if self.D0 is None:
            return True
        return other.D0 is not None and self.D0 <= other.D0

    def default_truncation(self) -> int:
        e0, e_inf = self.pole_orders
        divisors = [self.D1] + ([self.D0] if self.D0 is not None else [])
        return 2 * (max(abs(D.m0) for D in divisors) + max(abs(D.m_inf) for D in divisors) + e0 + e_inf) + 10


def _windows(K: TwoTermComplex, B: int) -> dict[tuple[str, int], range]:
    e0, e_inf = K.pole_orders
    windows = {}
    if K.D0 is not None:
        windows[("0", 0)] = range(-K.D0.m0, B + 1)
        windows[("1", 0)] = range(-B, K.D0.m_inf + 1)
        windows[("01", 0)] = range(-B, B + 1)
    # degree-1 windows are widened by the pole orders so that ∇ stays inside the truncation
    windows[("0", 1)] = range(-K.D1.m0, B + e_inf + 1)
    windows[("1", 1)] = range(-B - e0, K.D1.m_inf + 1)
    windows[("01", 1)] = range(-B - e0, B + e_inf + 1)
    return windows


@dataclass
class CechModel:
    """
    Truncated Čech total complex T⁰ → T¹ → T² of a two-term complex for the cover {U0, U1}.
    """
    complex: TwoTermComplex
    truncation: int
    bases: tuple[tuple[Label, ...], tuple[Label, ...], tuple[Label, ...]]
    d0: DomainMatrix
    d1: DomainMatrix
    dims: tuple[int, int, int] = (0, 0, 0)
    _positions: dict[int, dict[Label, int]] = field(default_factory=dict, repr=False)

    @property
    def h0(self) -> int:
        return self.dims[0]

    @property
    def h1(self) -> int:
        return self.dims[1]

    @property
    def h2(self) -> int:
        return self.dims[2]

    def dim(self, degree: int) -> int:
        return len(self.bases[degree])

    def index(self, degree: int) -> dict[Label, int]:
        if degree not in self._positions:
            self._positions[degree] = {label: k for k, label in enumerate(self.bases[degree])}
        return self._positions[degree]

    def cocycles(self) -> DomainMatrix:
        return kernel_basis(self.d1)

    def h1_basis(self) -> list[dict[Label, Any]]:
        """Cocycles whose classes form a basis of H¹."""
        Z = self.cocycles()
        current = self.d0
        current_rank = exact_rank(current)
        chosen = []
        columns = to_dod(Z.transpose())
        for j in range(Z.shape[1]):
            if len(chosen) == self.h1:
                break
            column = DomainMatrix({r: {0: v} for r, v in columns.get(j, {}).items()}, (Z.shape[0], 1), QQ)
            trial = hstack(current, column)
            trial_rank = exact_rank(trial)
            if trial_rank > current_rank:
                current, current_rank = trial, trial_rank
                chosen.append({self.bases[1][r]: v for r, v in columns.get(j, {}).items()})
        return chosen


def _build_model(K: TwoTermComplex, B: int) -> CechModel:
    windows = _windows(K, B)
    degree0 = [(chart, 0, k) for chart in ("0", "1") for k in windows.get((chart, 0), ())]
    degree1 = [("01", 0, k) for k in windows.get(("01", 0), ())]
    degree1 += [(chart, 1, k) for chart in ("0", "1") for k in windows[(chart, 1)]]
    degree2 = [("01", 1, k) for k in windows[("01", 1)]]
    position1 = {label: r for r, label in enumerate(degree1)}
    position2 = {label: r for r, label in enumerate(degree2)}

    def locate(position: dict[Label, int], label: Label, what: str) -> int:
        if label not in position:
            raise CurveError(f"{what}: {label} falls outside the sections of the target sheaf "
                             f"(D0 = {K.D0}, D1 = {K.D1}, B = {B})")
        return position[label]

    entries0: dict[tuple[int, int], Any] = {}
    for column, (chart, _, k) in enumerate(degree0):
        sign = -1 if chart == "0" else 1
        entries0[(locate(position1, ("01", 0, k), "restriction"), column)] = QQ(sign)
        for e, v in K.nabla(k).items():
            row = locate(position1, (chart, 1, e), "∇ on U" + chart)
            entries0[(row, column)] = entries0.get((row, column), QQ.zero) + v

    entries1: dict[tuple[int, int], Any] = {}
    for column, (chart, degree, k) in enumerate(degree1):
        if degree == 0:
            for e, v in K.nabla(k).items():
                row = locate(position2, ("01", 1, e), "∇ on U01")
                entries1[(row, column)] = entries1.get((row, column), QQ.zero) - v
        else:
            sign = -1 if chart == "0" else 1
            entries1[(locate(position2, ("01", 1, k), "restriction"), column)] = QQ(sign)

    d0 = from_entries(entries0, (len(degree1), len(degree0)))
    d1 = from_entries(entries1, (len(degree2), len(degree1)))
    rank0, rank1 = exact_rank(d0), exact_rank(d1)
    dims = (len(degree0) - rank0, len(degree1) - rank1 - rank0, len(degree2) - rank1)
    logger.debug("Čech model D0=%s D1=%s B=%s: sizes %s, dims %s", K.D0, K.D1, B,
                 (len(degree0), len(degree1), len(degree2)), dims)
    return CechModel(complex=K, truncation=B, bases=(tuple(degree0), tuple(degree1), tuple(degree2)),
                     d0=d0, d1=d1, dims=dims)


def cech_hypercohomology(K: TwoTermComplex, B: Optional[int] = None) -> CechModel:
    """Hypercohomology model of K, checked against the truncation B + 5."""
    if B is None:
        B = K.default_truncation()
    model = _build_model(K, B)
    wider = _build_model(K, B + TRUNCATION_STEP)
    if model.dims != wider.dims:
        raise TruncationUnstableError(f"truncation unstable: dims {model.dims} at B = {B}, "
                                      f"{wider.dims} at B = {B + TRUNCATION_STEP}")
    return model


def curve_jumps(f: LaurentPolynomial) -> list[Any]:
    """Multiples of 1/e in [0, 1] for each pole order e of f, together with 0 and 1."""
    jumps = {QQ(0), QQ(1)}
    for e in f.pole_orders():
        if e > 0:
            jumps |= {QQ(k, e) for k in range(e + 1)}
    return sorted(jumps)


def _require_curve(f: LaurentPolynomial) -> PointDivisor:
    if f.nvars != 1:
        raise CurveError(f"the curve engine needs n = 1, got n = {f.nvars}")
    P = pole_divisor(f)
    if P == PointDivisor(0, 0):
        raise CurveError("f must have a pole at 0 or ∞")
    return P


def _check_level(level: Any) -> Any:
    level = QQ.convert(level)
    if not 0 <= level <= 1:
        raise LevelError(f"level {level} outside [0, 1]")
    return level


def irregular_level(f: LaurentPolynomial, level: Any) -> TwoTermComplex:
    """F^λ = [O(⌊−λP⌋) → Ω̌¹(⌊(1−λ)P⌋)], the degree-0 term kept only for λ = 0."""
    P = _require_curve(f)
    level = _check_level(level)
    D0 = P.floor_multiple(-level) if level == 0 else None
    return TwoTermComplex(D0, P.floor_multiple(1 - level), f)


def _deligne_divisor(P: PointDivisor, mu: Any) -> Optional[PointDivisor]:
    mu = QQ.convert(mu)
    if mu > 0:
        return None
    if mu > -1:
        return BOUNDARY - P.ceil_multiple(mu)
    return _deligne_divisor(P, mu + 1) + BOUNDARY + P


def deligne_level(f: LaurentPolynomial, level: Any) -> TwoTermComplex:
    """𝔉^λ for λ ≤ 1; the degree-1 term is Ω¹ ⊗ 𝔉^{λ−1}O = Ω̌¹(−S + div(λ − 1))."""
    P = _require_curve(f)
    level = QQ.convert(level)
    if level > 1:
        raise LevelError(f"level {level} above 1")
    return TwoTermComplex(_deligne_divisor(P, level), -BOUNDARY + _deligne_divisor(P, level - 1), f)


def compact_level(f: LaurentPolynomial, level: Any) -> TwoTermComplex:
    """F̌^λ = F^λ(−T) with T = S − red P."""
    P = _require_curve(f)
    T = BOUNDARY - P.reduced()
    return irregular_level(f, level).shifted(-T)


def graded_dims(dims: list[tuple[Any, int]]) -> dict[Any, int]:
    """dim Gr^λ from a non-increasing filtration listed at its jumps."""
    graded = {}
    for k, (level, dim) in enumerate(dims):
        following = dims[k + 1][1] if k + 1 < len(dims) else 0
        graded[level] = dim - following
    return graded


class CurveEngine:
    """
    Filtrations on H¹ of the punctured line for one Laurent polynomial in one variable.
    """

    def __init__(self, f: LaurentPolynomial, truncation: Optional[int] = None):
        self.f = f
        self.P = _require_curve(f)
        self.truncation = truncation
        self.jumps = curve_jumps(f)
        self._models: dict[tuple[TwoTermComplex, int], CechModel] = {}
        self._ambient: Optional[tuple[int, TwoTermComplex]] = None

    def model(self, K: TwoTermComplex, B: int) -> CechModel:
        if (K, B) not in self._models:
            self._models[(K, B)] = _build_model(K, B)
        return self._models[(K, B)]

    def _image_dims(self, ambient: TwoTermComplex, levels: list[TwoTermComplex], B: int) -> list[int]:
        whole = self.model(ambient, B)
        dims = []
        for K in levels:
            if not K.contained_in(ambient):
                raise CurveError(f"[{K.D0} → {K.D1}] is not a subcomplex of [{ambient.D0} → {ambient.D1}]")
            sub = self.model(K, B)
            position = whole.index(1)
            kept = [position[label] for label in sub.bases[1]]
            dims.append(subcomplex_image_dim(sub.dim(1), exact_rank(sub.d1), whole.d0, kept))
        return dims

    def _truncation_for(self, ambient: TwoTermComplex) -> int:
        return self.truncation if self.truncation is not None else ambient.default_truncation()

    def stable_image_dims(self, ambient: TwoTermComplex, levels: list[TwoTermComplex]) -> list[int]:
        B = self._truncation_for(ambient)
        dims = self._image_dims(ambient, levels, B)
        wider = self._image_dims(ambient, levels, B + TRUNCATION_STEP)
        if dims != wider:
            raise TruncationUnstableError(f"truncation unstable: image dims {dims} at B = {B}, "
                                          f"{wider} at B = {B + TRUNCATION_STEP}")
        return dims

    def irregular(self) -> list[tuple[Any, int]]:
        levels = [irregular_level(self.f, level) for level in self.jumps]
        dims = self.stable_image_dims(irregular_level(self.f, 0), levels)
        return list(zip(self.jumps, dims))

    def compact(self) -> list[tuple[Any, int]]:
        levels = [compact_level(self.f, level) for level in self.jumps]
        dims = self.stable_image_dims(compact_level(self.f, 0), levels)
        return list(zip(self.jumps, dims))

    def deligne_ambient(self) -> tuple[int, TwoTermComplex]:
        """Smallest 𝔉^{−M} on the ladder whose H¹ agrees with the previous rung (and with M + 2)."""
        if self._ambient is not None:
            return self._ambient
        previous = None
        for M in DELIGNE_LEVELS:
            K = deligne_level(self.f, -M)
            h1 = cech_hypercohomology(K, self._truncation_for(K)).h1
            logger.debug("Deligne level −%s: dim H¹ = %s", M, h1)
            if previous is not None and h1 == previous:
                check = deligne_level(self.f, -(M + 2))
                if cech_hypercohomology(check, self._truncation_for(check)).h1 != h1:
                    raise StabilizationError(f"stabilization failure: dim H¹ moves between M = {M} and {M + 2}")
                self._ambient = (M, K)
                return self._ambient
            previous = h1
        raise StabilizationError(f"stabilization failure: dim H¹ still moving at M = {DELIGNE_LEVELS[-1]}")

    def deligne(self) -> tuple[list[tuple[Any, int]], bool]:
        """Image dims of H¹(𝔉^λ) in the ambient, and whether every such map is injective."""
        _, ambient = self.deligne_ambient()
        levels = [deligne_level(self.f, level) for level in self.jumps]
        dims = self.stable_image_dims(ambient, levels)
        B = self._truncation_for(ambient)
        own = [self.model(K, B).h1 for K in levels]
        injective = all(d == h for d, h in zip(dims, own))
        if not injective:
            logger.warning("H¹(𝔉^λ) → H¹ is not injective: images %s, sources %s", dims, own)
        return list(zip(self.jumps, dims)), injective

    def subspaces_agree(self) -> bool:
        """
        F^λ and 𝔉^λ span the same subspace of the ambient H¹ at every jump. F^λ ⊂ 𝔉^λ as
        complexes, so the image of H¹(F^λ) lies in the image of H¹(𝔉^λ) and equal image
        dimensions give equal subspaces.
        """
        _, ambient = self.deligne_ambient()
        B = self._truncation_for(ambient)
        irregular = [irregular_level(self.f, level) for level in self.jumps]
        deligne = [deligne_level(self.f, level) for level in self.jumps]
        for level, K, L in zip(self.jumps, irregular, deligne):
            if not K.contained_in(L):
                logger.warning("λ = %s: F^λ is not a subcomplex of 𝔉^λ", level)
                return False
        first = self._image_dims(ambient, irregular, B)
        second = self._image_dims(ambient, deligne, B)
        for level, a, b in zip(self.jumps, first, second):
            if a != b:
                logger.warning("λ = %s: subspaces differ (dims %s, %s)", level, a, b)
                return False
        return True

    def toric(self) -> list[tuple[Any, int]]:
        service = TwistedDeRham(self.f)
        return [(level, service.image_dim(level, 1)) for level in self.jumps]

    def duality(self) -> CurveDualityReport:
        graded = graded_dims(self.irregular())
        dual = graded_dims(CurveEngine(-self.f, self.truncation).compact())
        mirrored = {level: dual.get(1 - level, 0) for level in self.jumps}
        passed = all(graded.get(level, 0) == mirrored[level] for level in self.jumps)
        return CurveDualityReport(graded=graded, compact_graded_dual=mirrored, passed=passed)

    def compare(self) -> CurveFiltrationReport:
        irregular = self.irregular()
        deligne, injective = self.deligne()
        toric = self.toric()
        agreement = {level: p == d == t for (level, p), (_, d), (_, t) in zip(irregular, deligne, toric)}
        M, ambient = self.deligne_ambient()
        return CurveFiltrationReport(jumps=list(self.jumps), irregular=irregular, deligne=deligne,
                                     compact=self.compact(), toric=toric, agreement=agreement,
                                     subspace_agreement=self.subspaces_agree(),
                                     deligne_injective=injective, ambient_level=M,
                                     truncation=self._truncation_for(ambient), duality=self.duality())


def paper_filtration_on_H1(f: LaurentPolynomial, truncation: Optional[int] = None) -> list[tuple[Any, int]]:
    return CurveEngine(f, truncation).irregular()


def deligne_filtration_on_H1(f: LaurentPolynomial, truncation: Optional[int] = None) -> list[tuple[Any, int]]:
    return CurveEngine(f, truncation).deligne()[0]


def compact_filtration_on_H1(f: LaurentPolynomial, truncation: Optional[int] = None) -> list[tuple[Any, int]]:
    return CurveEngine(f, truncation).compact()


def compare_filtrations(f: LaurentPolynomial, truncation: Optional[int] = None) -> CurveFiltrationReport:
    return CurveEngine(f, truncation).compare()


def duality_check_curve(f: LaurentPolynomial, truncation: Optional[int] = None) -> CurveDualityReport:
    return CurveEngine(f, truncation).duality()


def divisor_shift_invariance(f: LaurentPolynomial, E: PointDivisor, level: TwoTermComplex,
                             truncation: Optional[int] = None) -> bool:
    """Adding an effective E supported on the poles of f to both twists keeps the hypercohomology."""
    P = _require_curve(f)
    if not E.is_effective:
        raise CurveError(f"E = {E} is not effective")
    if (E.m0 and not P.m0) or (E.m_inf and not P.m_inf):
        raise CurveError(f"E = {E} is not supported on the poles of f")
    moved = level.shifted(E)
    B = truncation if truncation is not None else moved.default_truncation()
    before = cech_hypercohomology(level, B).dims
    after = cech_hypercohomology(moved, B).dims
    logger.debug("shift by %s: %s → %s", E, before, after)
    return before == after
