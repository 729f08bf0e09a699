"""Exact and Monte-Carlo experiments on lacunary sums ``sum f(n_k x)``."""

__version__ = "0.1.0"

from .dyadic import DyadicPoint, frac_part_mul  # noqa: E402
from .errors import (  # noqa: E402
    DegenerateWeights,
    InvalidCase,
    LacunaryError,
    NotIncreasing,
    PairBudgetExceeded,
    TowerOverflow,
    UsageError,
    WeightsNotNormalized,
)
from .sequence import (  # noqa: E402
    ConstructionParams,
    ErdosFortet,
    ExplicitSequence,
    Geometric,
    PaperSequence,
    TowerSpec,
    sequence_prefix,
    term_value,
)
from .trigsums import TrigPoly  # noqa: E402
