import random
from typing import Any, Iterable, Mapping, Optional, Sequence

from sympy import nextprime
from sympy.polys.domains import GF, QQ
from sympy.polys.matrices import DomainMatrix

from settings import MODULAR_RANK_PRIMES, PRIME_RANGE, create_logger
from worker_pool import parallel_map

logger = create_logger(__name__)


def random_primes(count: int, rng: random.Random, exclude: Iterable[int] = ()) -> list[int]:
    low, high = PRIME_RANGE
    seen = set(exclude)
    primes = []
    while len(primes) < count:
        p = int(nextprime(rng.randrange(low, high)))
        if p < high and p not in seen:
            seen.add(p)
            primes.append(p)
    return primes


def from_entries(entries: Mapping[tuple[int, int], Any], shape: tuple[int, int]) -> DomainMatrix:
    """Sparse QQ matrix from {(row, col): value}; zero values are dropped."""
    rows: dict[int, dict[int, Any]] = {}
    for (r, c), value in entries.items():
        value = QQ.convert(value)
        if value:
            rows.setdefault(r, {})[c] = value
    return DomainMatrix(rows, shape, QQ)


def to_dod(M: DomainMatrix) -> dict[int, dict[int, Any]]:
    return {r: dict(row) for r, row in M.to_sparse().rep.items() if row}


def is_zero(M: DomainMatrix) -> bool:
    return not to_dod(M)


def extract_rows(M: DomainMatrix, rows: Sequence[int]) -> DomainMatrix:
    dod = to_dod(M)
    picked = {i: dod[r] for i, r in enumerate(rows) if r in dod}
    return DomainMatrix(picked, (len(rows), M.shape[1]), M.domain)


def extract_columns(M: DomainMatrix, cols: Sequence[int]) -> DomainMatrix:
    position = {c: j for j, c in enumerate(cols)}
    picked = {}
    for r, row in to_dod(M).items():
        kept = {position[c]: v for c, v in row.items() if c in position}
        if kept:
            picked[r] = kept
    return DomainMatrix(picked, (M.shape[0], len(cols)), M.domain)


def hstack(*matrices: DomainMatrix, rows: Optional[int] = None) -> DomainMatrix:
    if rows is None:
        rows = matrices[0].shape[0]
    stacked: dict[int, dict[int, Any]] = {}
    offset = 0
    for M in matrices:
        if M.shape[0] != rows:
            raise ValueError("row counts differ")
        for r, row in to_dod(M).items():
            target = stacked.setdefault(r, {})
            for c, v in row.items():
                target[c + offset] = QQ.convert(v)
        offset += M.shape[1]
    return DomainMatrix(stacked, (rows, offset), QQ)


def _fraction_free_pivots(Mz: DomainMatrix) -> list[int]:
    _, _, pivots = Mz.rref_den()
    return list(pivots)


def _integral(M: DomainMatrix) -> DomainMatrix:
    _, Mz = M.convert_to(QQ).clear_denoms(convert=True)
    return Mz


def _modular_probe(args: tuple[DomainMatrix, int]) -> tuple[int, list[int], list[int]]:
    Mz, p = args
    Mp = Mz.convert_to(GF(p))
    _, cols = Mp.rref()
    _, rows = Mp.transpose().rref()
    return p, list(rows), list(cols)


def exact_rank(M: DomainMatrix, accelerated: bool = False, seed: Optional[int] = None,
               threads: int = 1) -> int:
    """
    Rank over QQ. The default path clears denominators and runs sparse fraction-free
    Gauss-Jordan over ZZ. The accelerated path takes the best rank modulo several random
    primes and confirms it by exact elimination on the pivot submatrix.
    """
    rows, cols = M.shape
    if rows == 0 or cols == 0 or is_zero(M):
        return 0
    Mz = _integral(M)
    if not accelerated:
        return len(_fraction_free_pivots(Mz))
    rng = random.Random(seed)
    probes = parallel_map(_modular_probe, [(Mz, p) for p in random_primes(MODULAR_RANK_PRIMES, rng)], threads)
    p, pivot_rows, pivot_cols = max(probes, key=lambda probe: len(probe[2]))
    candidate = len(pivot_cols)
    if not _certify(Mz.convert_to(QQ), pivot_rows, pivot_cols):
        logger.warning("modular rank %s (p=%s) not certified, falling back to exact elimination", candidate, p)
        return len(_fraction_free_pivots(Mz))
    logger.debug("rank %s certified on a %sx%s pivot block (p=%s)", candidate, candidate, candidate, p)
    return candidate


def _certify(Mq: DomainMatrix, pivot_rows: Sequence[int], pivot_cols: Sequence[int]) -> bool:
    """
    rank Mq = r for r pivot rows and columns: the pivot block is nonsingular and every
    other row is the combination of the pivot rows its pivot columns dictate.
    """
    if not pivot_cols:
        return is_zero(Mq)
    block = extract_columns(extract_rows(Mq, pivot_rows), pivot_cols)
    if len(_fraction_free_pivots(_integral(block))) != len(pivot_cols):
        return False
    chosen = set(pivot_rows)
    others = [r for r in range(Mq.shape[0]) if r not in chosen]
    if not others:
        return True
    coefficients = block.to_sparse().lu_solve(extract_rows(Mq, pivot_rows).to_sparse())
    rest = extract_rows(Mq, others).to_sparse()
    predicted = extract_columns(rest, pivot_cols).to_sparse() * coefficients.to_sparse()
    return is_zero(rest - predicted.to_sparse())


def kernel_basis(M: DomainMatrix) -> DomainMatrix:
    """Columns of the result span ker M over QQ."""
    rows, cols = M.shape
    if cols == 0:
        return DomainMatrix({}, (0, 0), QQ)
    dod: dict[int, dict[int, Any]] = {}
    if rows == 0 or is_zero(M):
        free = list(range(cols))
        pivots: list[int] = []
        reduced: dict[int, dict[int, Any]] = {}
    else:
        R, pivots = M.convert_to(QQ).rref()
        pivots = list(pivots)
        reduced = to_dod(R)
        free = [c for c in range(cols) if c not in set(pivots)]
    for j, c in enumerate(free):
        dod.setdefault(c, {})[j] = QQ.one
        for i, pivot in enumerate(pivots):
            value = reduced.get(i, {}).get(c)
            if value:
                dod.setdefault(pivot, {})[j] = -value
    return DomainMatrix(dod, (cols, len(free)), QQ)


def subcomplex_image_dim(sub_dim: int, sub_rank_out: int, ambient_in: DomainMatrix,
                         kept_rows: Sequence[int], accelerated: bool = False,
                         seed: Optional[int] = None) -> int:
    """
    dim Image{H^i(K') → H^i(K)} for a subcomplex K' ⊂ K whose degree-i term is spanned by the
    basis vectors kept_rows of K^i and whose differential is the restriction of K's.
    Uses dim Z' − dim(Z' ∩ B) with dim(Z' ∩ B) = rank d − rank(d projected off K'^i).
    """
    kept = set(kept_rows)
    outside = [r for r in range(ambient_in.shape[0]) if r not in kept]
    rank_in = exact_rank(ambient_in, accelerated, seed)
    rank_outside = exact_rank(extract_rows(ambient_in, outside), accelerated, seed) if outside else 0
    return sub_dim - sub_rank_out - rank_in + rank_outside


def dump_matrix(M: DomainMatrix) -> str:
    """Plain-text triplets: header "rows cols", then "row col numerator/denominator"."""
    lines = [f"{M.shape[0]} {M.shape[1]}"]
    for r, row in sorted(to_dod(M).items()):
        for c, value in sorted(row.items()):
            value = QQ.convert(value)
            lines.append(f"{r} {c} {value.numerator}/{value.denominator}")
    return "\n".join(lines) + "\n"
