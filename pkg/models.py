from dataclasses import dataclass, field
from typing import Any, Optional, Union

from polytope import Face, NewtonPolytope

NOT_APPLICABLE = "not applicable"
SKIPPED = "skipped"

CheckStatus = Union[bool, str]


@dataclass(frozen=True)
class Witness:
    """
    Torus point on which a face system vanishes.
    field is 0 for a rational point, otherwise the prime p of the coordinates.
    """
    coordinates: tuple[Any, ...]
    field: int
    face_label: str

    @property
    def is_rational(self) -> bool:
        return self.field == 0


@dataclass
class FaceResult:
    """
    Face check record
    """
    face: Face
    status: str
    modular: dict[int, str] = field(default_factory=dict)
    certified: bool = False
    witness: Optional[Witness] = None


@dataclass
class NondegeneracyReport:
    """
    Nondegeneracy verdict record
    """
    verdict: str
    faces: list[FaceResult]
    primes: list[int]
    certified: bool
    witness: Optional[Witness] = None


@dataclass(frozen=True)
class HodgeSpectrum:
    """
    Jumps λ with multiplicities dim Gr^λ H^degree
    """
    degree: int
    entries: tuple[tuple[Any, int], ...]
    route: str = "euler"
    supported: bool = True

    @property
    def total(self) -> int:
        return sum(mult for _, mult in self.entries)

    def as_dict(self) -> dict[Any, int]:
        return dict(self.entries)

    def same_entries(self, other: "HodgeSpectrum") -> bool:
        return self.degree == other.degree and self.entries == other.entries


@dataclass(frozen=True)
class CheckResult:
    """
    Outcome of a consistency check: True, False, "not applicable" or "skipped"
    """
    status: CheckStatus
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status is True


@dataclass
class CurveDualityReport:
    """
    h^λ(f) against h_c^{1-λ}(-f) on the punctured line
    """
    graded: dict[Any, int]
    compact_graded_dual: dict[Any, int]
    passed: bool


@dataclass
class CurveFiltrationReport:
    """
    Dimensions of the three filtrations on H^1 at each jump
    """
    jumps: list[Any]
    irregular: list[tuple[Any, int]]
    deligne: list[tuple[Any, int]]
    compact: list[tuple[Any, int]]
    toric: list[tuple[Any, int]]
    agreement: dict[Any, bool]
    subspace_agreement: bool
    deligne_injective: bool
    ambient_level: int
    truncation: int
    duality: Optional[CurveDualityReport] = None

    @property
    def passed(self) -> bool:
        return all(self.agreement.values()) and self.subspace_agreement and self.deligne_injective


@dataclass
class AnalysisReport:
    """
    Full analysis of one Laurent polynomial
    """
    poly: str
    var_names: tuple[str, ...]
    nvars: int
    polytope: NewtonPolytope
    nvol: Optional[int] = None
    origin_interior: bool = False
    nondegeneracy: Optional[NondegeneracyReport] = None
    betti: Optional[list[int]] = None
    spectra: dict[str, HodgeSpectrum] = field(default_factory=dict)
    checks: dict[str, CheckResult] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    curve: Optional[CurveFiltrationReport] = None
    timing_ms: Optional[dict[str, int]] = None
