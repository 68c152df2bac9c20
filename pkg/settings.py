import logging
import os
from typing import Optional

from errors import ExpHodgeError

DEFAULT_SEED = 20240601
SEED_ENV_VAR = "EXPHODGE_SEED"

# nondegeneracy
DEFAULT_PRIME_COUNT = 3
PRIME_RANGE = (2 ** 30, 2 ** 31)
PRIME_ATTEMPT_FACTOR = 10
WITNESS_PRIME_LIMIT = 101
WITNESS_SEARCH_BUDGET = 200_000
WITNESS_RATIONALS = (1, -1, 2, -2, 3, -3)
WITNESS_LIFT_HEIGHT = 10
GROEBNER_PAIR_BUDGET = 20_000

# exact linear algebra
MODULAR_RANK_PRIMES = 3

# curve engine
TRUNCATION_STEP = 5
DELIGNE_LEVELS = (2, 4, 8, 16, 32)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def create_logger(name: str) -> logging.Logger:
    return logging.getLogger(name)


def configure_logging(verbosity: int = 0) -> None:
    if verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = logging.WARNING
    # stdout stays reserved for reports
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)


def resolve_seed(explicit: Optional[int] = None) -> int:
    if explicit is not None:
        return explicit
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None or raw.strip() == "":
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError as e:
        raise ExpHodgeError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from e
