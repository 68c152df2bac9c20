import itertools
import random
from dataclasses import dataclass
from math import gcd
from typing import Any, Optional, Sequence

from sympy import primerange
from sympy.polys.domains import GF, QQ
from sympy.polys.groebnertools import red_groebner, spoly
from sympy.polys.orderings import grevlex
from sympy.polys.rings import PolyElement, PolyRing

from errors import BadPrimeError, FaceError, GroebnerBudgetExceeded, PrimeExhaustionError
from exact_linalg import random_primes
from laurent import (Exponent, LaurentPolynomial, face_restriction, log_derivative, monomial_span,
                     reduce_mod_p)
from models import FaceResult, NondegeneracyReport, Witness
from polytope import Face, newton_polytope, proper_faces_excluding_origin
from settings import (DEFAULT_PRIME_COUNT, GROEBNER_PAIR_BUDGET, PRIME_ATTEMPT_FACTOR, WITNESS_LIFT_HEIGHT,
                      WITNESS_PRIME_LIMIT, WITNESS_RATIONALS, WITNESS_SEARCH_BUDGET, create_logger,
                      resolve_seed)
from worker_pool import parallel_map

logger = create_logger(__name__)

EMPTY = "empty"
NONEMPTY = "nonempty"
BUDGET_EXCEEDED = "budget-exceeded"

NONDEGENERATE = "nondegenerate"
LIKELY_NONDEGENERATE = "likely-nondegenerate"
DEGENERATE = "degenerate"


@dataclass(frozen=True)
class FaceSystem:
    """
    f_δ together with x_i·∂f_δ/∂x_i, all multiplied by x^shift so that no exponent is negative.
    """
    face: Face
    generators: tuple[LaurentPolynomial, ...]
    shift: Exponent

    @classmethod
    def build(cls, f: LaurentPolynomial, face: Face) -> "FaceSystem":
        restricted = face_restriction(f, face)
        generators = [restricted] + [log_derivative(restricted, i) for i in range(1, f.nvars + 1)]
        generators = [g for g in generators if not g.is_zero()]
        shift = tuple(-a for a in monomial_span(generators))
        return cls(face=face, generators=tuple(g.shift(shift) for g in generators), shift=shift)

    @property
    def var_names(self) -> tuple[str, ...]:
        return self.generators[0].var_names

    def saturation_ring(self, domain: Any) -> PolyRing:
        t = "t"
        while t in self.var_names:
            t = t + "_"
        return PolyRing(self.var_names + (t,), domain, grevlex)

    def ideal(self, p: Optional[int] = None) -> list[PolyElement]:
        """Generators plus t·x₁⋯xₙ − 1, over QQ or GF(p)."""
        ring = self.saturation_ring(QQ if p is None else GF(p))
        n = len(self.shift)
        polys = []
        for g in self.generators:
            terms = g.terms if p is None else _residues(g, p)
            poly = ring.from_dict({exponent + (0,): c for exponent, c in terms.items()})
            if poly:
                polys.append(poly)
        polys.append(ring.from_dict({(1,) * (n + 1): 1, (0,) * (n + 1): -1}))
        return polys

    def vanishes_at(self, point: Sequence[Any]) -> bool:
        return all(not g.evaluate(point) for g in self.generators)


def _residues(g: LaurentPolynomial, p: int) -> dict[Exponent, int]:
    reduced = reduce_mod_p(g, p)
    return {exponent: int(reduced.domain.to_int(c)) % p for exponent, c in reduced.items}


def groebner_basis(generators: Sequence[PolyElement], budget: int = GROEBNER_PAIR_BUDGET) -> list[PolyElement]:
    """
    Reduced Gröbner basis of the ideal spanned by the generators, for the order of their ring.

    Buchberger's algorithm with the normal selection strategy and the coprime leading monomial
    criterion. Returns [1] as soon as a nonzero constant shows up. Raises GroebnerBudgetExceeded
    once more than budget critical pairs have been processed.
    """
    polys = [g for g in generators if g]
    if not polys:
        raise ValueError("generators must be nonzero")
    ring = polys[0].ring
    order = ring.order
    basis = [g.monic() for g in polys]
    if any(g.is_ground for g in basis):
        return [ring.one]

    pairs = {(i, j) for j in range(len(basis)) for i in range(j)}
    processed = 0
    while pairs:
        pair = min(pairs, key=lambda ij: (order(ring.monomial_lcm(basis[ij[0]].LM, basis[ij[1]].LM)), ij))
        pairs.remove(pair)
        processed += 1
        if processed > budget:
            raise GroebnerBudgetExceeded(budget)
        i, j = pair
        lm_i, lm_j = basis[i].LM, basis[j].LM
        if ring.monomial_mul(lm_i, lm_j) == ring.monomial_lcm(lm_i, lm_j):
            continue
        h = spoly(basis[i], basis[j], ring).rem(basis)
        if not h:
            continue
        h = h.monic()
        if h.is_ground:
            return [ring.one]
        basis.append(h)
        k = len(basis) - 1
        pairs.update((m, k) for m in range(k))

    reduced = red_groebner(list(basis), ring)
    logger.debug("groebner basis of %s elements after %s pairs", len(reduced), processed)
    return sorted(reduced, key=lambda g: order(g.LM), reverse=True)


def _is_unit(basis: Sequence[PolyElement]) -> bool:
    return len(basis) == 1 and basis[0].is_ground and bool(basis[0])


def _ideal_status(system: FaceSystem, p: Optional[int], budget: int) -> str:
    try:
        basis = groebner_basis(system.ideal(p), budget)
    except GroebnerBudgetExceeded:
        logger.warning("face %s: budget exceeded over %s", system.face.label(), "QQ" if p is None else f"GF({p})")
        return BUDGET_EXCEEDED
    return EMPTY if _is_unit(basis) else NONEMPTY


def check_face(f: LaurentPolynomial, face: Face, p: Optional[int] = None,
               budget: int = GROEBNER_PAIR_BUDGET) -> str:
    """
    Torus solvability of the face system over GF(p), or exactly over QQ when p is None.
    Vertices are "empty" without computing.
    """
    if face.contains_origin:
        raise FaceError("face contains the origin")
    if face.dim == 0:
        return EMPTY
    return _ideal_status(FaceSystem.build(f, face), p, budget)


def _rational_grid() -> list[Any]:
    values = [QQ(a) for a in WITNESS_RATIONALS]
    values += [QQ(1, a) for a in WITNESS_RATIONALS if abs(a) > 1]
    return list(dict.fromkeys(values))


def _vanishes_mod(residues: list[dict[Exponent, int]], point: Sequence[int], p: int) -> bool:
    for terms in residues:
        total = 0
        for exponent, c in terms.items():
            term = c
            for v, a in zip(point, exponent):
                term = term * pow(v, a, p) % p
            total += term
        if total % p:
            return False
    return True


def _lift_candidates(residue: int, p: int) -> list[Any]:
    candidates = []
    for b in range(1, WITNESS_LIFT_HEIGHT + 1):
        if b % p == 0:
            continue
        a = residue * b % p
        for numerator in (a, a - p):
            if numerator and abs(numerator) <= WITNESS_LIFT_HEIGHT and gcd(numerator, b) == 1:
                candidates.append(QQ(numerator, b))
    return candidates


def _lift(system: FaceSystem, point: Sequence[int], p: int, budget: int) -> Optional[tuple[Any, ...]]:
    options = [_lift_candidates(v, p) for v in point]
    for tried, candidate in enumerate(itertools.product(*options)):
        if tried >= budget:
            break
        if system.vanishes_at(candidate):
            return tuple(candidate)
    return None


def find_witness(system: FaceSystem, budget: int = WITNESS_SEARCH_BUDGET) -> Optional[Witness]:
    """
    Rational grid first, then exhaustive search over (GF(p)^*)^n for small p with lifting of every
    modular zero to small rationals. A modular zero that does not lift is returned as it is.
    """
    n = len(system.shift)
    label = system.face.label()
    used = 0
    for point in itertools.product(_rational_grid(), repeat=n):
        if used >= budget:
            return None
        used += 1
        if system.vanishes_at(point):
            return Witness(coordinates=tuple(point), field=0, face_label=label)

    fallback = None
    for p in primerange(2, WITNESS_PRIME_LIMIT + 1):
        if (p - 1) ** n > budget - used:
            break
        try:
            residues = [_residues(g, p) for g in system.generators]
        except BadPrimeError:
            continue
        for point in itertools.product(range(1, p), repeat=n):
            used += 1
            if not _vanishes_mod(residues, point, p):
                continue
            lifted = _lift(system, point, p, budget - used)
            if lifted is not None:
                return Witness(coordinates=lifted, field=0, face_label=label)
            if fallback is None:
                fallback = Witness(coordinates=tuple(point), field=p, face_label=label)
    if fallback is not None:
        logger.info("face %s: only a witness over GF(%s)", label, fallback.field)
    return fallback


def _check_face_report(f: LaurentPolynomial, face: Face, primes: Sequence[int], certify: bool,
                       budget: int) -> FaceResult:
    if face.dim == 0:
        return FaceResult(face=face, status=EMPTY, certified=True)
    system = FaceSystem.build(f, face)
    modular = {p: _ideal_status(system, p, budget) for p in primes}
    logger.debug("face %s: %s", face.label(), modular)

    if modular and set(modular.values()) == {EMPTY}:
        if not certify:
            return FaceResult(face=face, status=EMPTY, modular=modular)
        exact = _ideal_status(system, None, budget)
        if exact != NONEMPTY:
            return FaceResult(face=face, status=exact, modular=modular, certified=exact == EMPTY)
        witness = find_witness(system)
        return FaceResult(face=face, status=NONEMPTY, modular=modular, certified=True, witness=witness)
    if EMPTY in modular.values():
        logger.info("face %s: primes disagree %s, deciding over QQ", face.label(), modular)

    witness = find_witness(system)
    if witness is not None and witness.is_rational:
        return FaceResult(face=face, status=NONEMPTY, modular=modular, certified=True, witness=witness)
    exact = _ideal_status(system, None, budget)
    if exact == EMPTY:
        return FaceResult(face=face, status=EMPTY, modular=modular, certified=True)
    if exact == BUDGET_EXCEEDED:
        if witness is None:
            return FaceResult(face=face, status=BUDGET_EXCEEDED, modular=modular)
        logger.warning("face %s: exact check over budget, keeping the witness over GF(%s)", face.label(),
                       witness.field)
        return FaceResult(face=face, status=NONEMPTY, modular=modular, witness=witness)
    return FaceResult(face=face, status=NONEMPTY, modular=modular, certified=True, witness=witness)


def _good_primes(f: LaurentPolynomial, count: int, rng: random.Random) -> list[int]:
    primes: list[int] = []
    rejected: list[int] = []
    for _ in range(max(count, 1) * PRIME_ATTEMPT_FACTOR):
        if len(primes) == count:
            break
        p = random_primes(1, rng, exclude=primes + rejected)[0]
        try:
            reduce_mod_p(f, p)
        except BadPrimeError:
            rejected.append(p)
            continue
        primes.append(p)
    if len(primes) < count:
        raise PrimeExhaustionError(f"prime exhaustion: {len(rejected)} random primes divide a denominator")
    return primes


def _verdict(results: list[FaceResult], primes: list[int]) -> NondegeneracyReport:
    degenerate = [r for r in results if r.status == NONEMPTY]
    if degenerate:
        first = min(degenerate, key=lambda r: (not r.certified, r.witness is None))
        return NondegeneracyReport(verdict=DEGENERATE, faces=results, primes=primes, certified=first.certified,
                                   witness=first.witness)
    if any(r.status == BUDGET_EXCEEDED for r in results):
        return NondegeneracyReport(verdict=BUDGET_EXCEEDED, faces=results, primes=primes, certified=False)
    if all(r.certified for r in results):
        return NondegeneracyReport(verdict=NONDEGENERATE, faces=results, primes=primes, certified=True)
    return NondegeneracyReport(verdict=LIKELY_NONDEGENERATE, faces=results, primes=primes, certified=False)


def is_nondegenerate(f: LaurentPolynomial, primes: int = DEFAULT_PRIME_COUNT, seed: Optional[int] = None,
                     certify: bool = False, threads: int = 1,
                     budget: int = GROEBNER_PAIR_BUDGET) -> NondegeneracyReport:
    polytope = newton_polytope(f)
    polytope.require_full_dimension()
    rng = random.Random(resolve_seed(seed))
    faces = proper_faces_excluding_origin(polytope)
    chosen = _good_primes(f, primes, rng) if any(face.dim > 0 for face in faces) else []
    logger.info("checking %s faces with primes %s", len(faces), chosen)
    results = parallel_map(lambda face: _check_face_report(f, face, chosen, certify, budget), faces, threads)
    report = _verdict(results, chosen)
    logger.info("nondegeneracy verdict: %s", report.verdict)
    return report
