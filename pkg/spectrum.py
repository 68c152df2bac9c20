import time
from dataclasses import dataclass
from math import comb
from typing import Any, Optional

from sympy.polys.domains import QQ

from curve import CurveEngine
from derham import TwistedDeRham
from errors import IntegrityError
from laurent import LaurentPolynomial, format_laurent
from models import NOT_APPLICABLE, SKIPPED, AnalysisReport, CheckResult, HodgeSpectrum
from nondegen import DEGENERATE, is_nondegenerate
from polytope import contains_origin_interior, newton_polytope, normalized_volume
from settings import DEFAULT_PRIME_COUNT, create_logger, resolve_seed
from worker_pool import parallel_map

logger = create_logger(__name__)

MODES = ("euler", "rank", "both")
UNSUPPORTED = "unsupported by the degeneration theorem"


@dataclass
class AnalysisOptions:
    mode: str = "both"
    certify: bool = False
    seed: Optional[int] = None
    primes: int = DEFAULT_PRIME_COUNT
    threads: int = 1
    truncation: Optional[int] = None
    accelerated_rank: bool = False
    timing: bool = False
    checks: bool = True
    curve: bool = True

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {', '.join(MODES)}")


def _service(f: LaurentPolynomial, service: Optional[TwistedDeRham]) -> TwistedDeRham:
    return service if service is not None else TwistedDeRham(f)


def jump_candidates(f: LaurentPolynomial, service: Optional[TwistedDeRham] = None) -> list[Any]:
    """{p − w(α) : α ∈ nΔ, 0 ≤ p − w(α) ≤ n}, sorted."""
    service = _service(f, service)
    n = service.n
    candidates = {QQ(p) - w for p in range(n + 1) for w in set(service.weights())}
    return sorted(c for c in candidates if 0 <= c <= n)


def spectrum_euler(f: LaurentPolynomial, service: Optional[TwistedDeRham] = None) -> HodgeSpectrum:
    """
    h^λ = (−1)ⁿ·Σ_p (−1)^p·C(n,p)·N(p − λ), the Euler characteristic of the graded slice,
    which equals dim Gr^λ Hⁿ when the graded cohomology is concentrated in degree n.
    """
    service = _service(f, service)
    n = service.n
    entries = []
    for level in jump_candidates(f, service):
        h = (-1) ** n * sum((-1) ** p * comb(n, p) * service.count_at(QQ(p) - level) for p in range(n + 1))
        if h < 0:
            raise IntegrityError(f"negative graded dimension {h} at λ = {level}")
        if h > 0:
            entries.append((level, h))
    return HodgeSpectrum(degree=n, entries=tuple(entries), route="euler")


def spectrum_rank(f: LaurentPolynomial, degree: Optional[int] = None, service: Optional[TwistedDeRham] = None,
                  threads: int = 1) -> HodgeSpectrum:
    """Differences of filtration image dimensions between consecutive candidate jumps."""
    service = _service(f, service)
    i = service.n if degree is None else degree
    levels = jump_candidates(f, service)
    dims = parallel_map(lambda level: service.image_dim(level, i), levels, threads)
    entries = []
    for k, level in enumerate(levels):
        following = dims[k + 1] if k + 1 < len(dims) else 0
        h = dims[k] - following
        if h < 0:
            raise IntegrityError(f"filtration image dimension increases after λ = {level}")
        if h > 0:
            entries.append((level, h))
    return HodgeSpectrum(degree=i, entries=tuple(entries), route="rank")


def _format_entries(spectrum: HodgeSpectrum) -> str:
    return "{" + ", ".join(f"({level}, {mult})" for level, mult in spectrum.entries) + "}"


def check_degeneration(f: LaurentPolynomial, service: Optional[TwistedDeRham] = None,
                       euler: Optional[HodgeSpectrum] = None, rank: Optional[HodgeSpectrum] = None) -> CheckResult:
    """Both routes agree, and every graded slice has cohomology only in degree n."""
    service = _service(f, service)
    euler = euler or spectrum_euler(f, service)
    rank = rank or spectrum_rank(f, service=service)
    if not euler.same_entries(rank):
        return CheckResult(False, f"euler {_format_entries(euler)} differs from rank {_format_entries(rank)}")
    for level in jump_candidates(f, service):
        graded = service.graded_cohomology(level)
        if any(graded[:-1]):
            return CheckResult(False, f"graded cohomology at λ = {level} is {graded}, not concentrated in degree n")
    return CheckResult(True, "routes agree and graded cohomology is concentrated in degree n")


def check_symmetry(f: LaurentPolynomial, service: Optional[TwistedDeRham] = None,
                   rank: Optional[HodgeSpectrum] = None) -> CheckResult:
    """h^λ = h^{n−λ} in the proper case; also spectrum_rank(−f) = spectrum_rank(f)."""
    service = _service(f, service)
    rank = rank or spectrum_rank(f, service=service)
    if not contains_origin_interior(service.polytope):
        return CheckResult(NOT_APPLICABLE, f"0 lies on the boundary of Δ(f); spectrum {_format_entries(rank)}")
    n = service.n
    values = rank.as_dict()
    mirrored = all(values.get(n - level, 0) == mult for level, mult in rank.entries)
    if not mirrored:
        return CheckResult(False, f"spectrum {_format_entries(rank)} is not symmetric about n/2")
    negated = spectrum_rank(-f, service=TwistedDeRham(-f, service.accelerated, service.seed, service.polytope))
    if not negated.same_entries(rank):
        return CheckResult(False, f"spectrum of −f {_format_entries(negated)} differs from {_format_entries(rank)}")
    return CheckResult(True, "h^λ = h^{n−λ} at every jump")


class AnalysisService:
    """
    Runs polytope, nondegeneracy, Betti numbers, spectra and checks for one polynomial.
    """

    def __init__(self, options: Optional[AnalysisOptions] = None):
        self.options = options or AnalysisOptions()
        self.seed = resolve_seed(self.options.seed)
        self._timing: dict[str, int] = {}

    def _timed(self, stage: str, fn, *args, **kwargs):
        start = time.perf_counter()
        try:
            return fn(*args, **kwargs)
        finally:
            self._timing[stage] = int((time.perf_counter() - start) * 1000)

    def analyze(self, f: LaurentPolynomial) -> AnalysisReport:
        options = self.options
        self._timing = {}
        polytope = self._timed("polytope", newton_polytope, f)
        polytope.require_full_dimension()
        report = AnalysisReport(poly=format_laurent(f), var_names=f.var_names, nvars=f.nvars, polytope=polytope,
                                nvol=normalized_volume(polytope),
                                origin_interior=contains_origin_interior(polytope))

        report.nondegeneracy = self._timed("nondegeneracy", is_nondegenerate, f, primes=options.primes,
                                           seed=self.seed, certify=options.certify, threads=options.threads)
        degenerate = report.nondegeneracy.verdict == DEGENERATE
        if degenerate:
            report.warnings.append(f"f is degenerate: spectra are {UNSUPPORTED}")
            logger.warning("f is degenerate; rank route runs %s", UNSUPPORTED)

        service = TwistedDeRham(f, accelerated=options.accelerated_rank, seed=self.seed, polytope=polytope)
        report.betti = self._timed("betti", service.betti_numbers)
        self._check_euler_characteristic(report, degenerate)

        if options.mode in ("euler", "both") and not degenerate:
            report.spectra["euler"] = self._timed("euler", spectrum_euler, f, service)
        elif options.mode in ("euler", "both"):
            report.warnings.append("euler route suppressed: its concentration premise fails for degenerate f")
        if options.mode in ("rank", "both"):
            rank = self._timed("rank", spectrum_rank, f, service=service, threads=options.threads)
            if degenerate:
                rank = HodgeSpectrum(degree=rank.degree, entries=rank.entries, route="rank", supported=False)
            report.spectra["rank"] = rank

        if options.checks:
            report.checks = self._checks(f, service, report, degenerate)
        if options.curve and f.nvars == 1:
            self._curve(f, report)
        if options.timing:
            report.timing_ms = dict(self._timing)
        return report

    def _check_euler_characteristic(self, report: AnalysisReport, degenerate: bool) -> None:
        chi = sum((-1) ** i * h for i, h in enumerate(report.betti))
        expected = (-1) ** report.nvars * report.nvol
        if not degenerate and chi != expected:
            report.warnings.append(f"Euler characteristic {chi} differs from (−1)^n·nvol = {expected}")
            logger.warning("Euler characteristic %s differs from %s", chi, expected)

    def _checks(self, f: LaurentPolynomial, service: TwistedDeRham, report: AnalysisReport,
                degenerate: bool) -> dict[str, CheckResult]:
        euler, rank = report.spectra.get("euler"), report.spectra.get("rank")
        checks = {}
        if degenerate:
            checks["degeneration"] = CheckResult(NOT_APPLICABLE, f"f is degenerate; {UNSUPPORTED}")
        elif euler is None or rank is None:
            checks["degeneration"] = CheckResult(SKIPPED, "needs both routes (--mode both)")
        else:
            checks["degeneration"] = self._timed("degeneration", check_degeneration, f, service, euler, rank)
        if rank is None:
            checks["symmetry"] = CheckResult(SKIPPED, "needs the rank route")
        else:
            checks["symmetry"] = self._timed("symmetry", check_symmetry, f, service, rank)
        for name, check in checks.items():
            if check.status is False:
                report.warnings.append(f"{name} check failed: {check.detail}")
                logger.warning("%s check failed: %s", name, check.detail)
        return checks

    def _curve(self, f: LaurentPolynomial, report: AnalysisReport) -> None:
        engine = CurveEngine(f, self.options.truncation)
        report.curve = self._timed("curve", engine.compare)
        report.checks["curve_comparison"] = CheckResult(
            report.curve.passed, "irregular F, Deligne 𝔉 and toric filtrations on H¹")
        report.checks["curve_duality"] = CheckResult(
            report.curve.duality.passed, "h^λ(f) = h_c^{1−λ}(−f) at every jump")
        for name in ("curve_comparison", "curve_duality"):
            if report.checks[name].status is False:
                report.warnings.append(f"{name} check failed")


def analyze(f: LaurentPolynomial, options: Optional[AnalysisOptions] = None) -> AnalysisReport:
    return AnalysisService(options).analyze(f)
