"""Computations on Beurling generalized number systems."""

from .arithmetic import (
    MeasureValues,
    PrimePowerFunction,
    dirichlet_convolve,
    evaluate,
    exp_star,
    measure,
    mobius,
    preset,
    rankin_bound,
    summatory,
)
from .bell import bell_f_from_g, bell_g_from_f, complete_bell, partial_bell
from .config import RunConfig, parse_config
from .counting import diagnostics, integer_counts, l1_deviation, prime_counts
from .errors import (
    BeurlingError,
    ConfigError,
    DomainError,
    HypothesisWarning,
    NumericalError,
    RangeError,
    ResourceError,
)
from .meanvalue import compare, criterion, find_alpha, predict_halasz, wirsing
from .system import (
    GeneralizedInteger,
    GeneralizedPrimeSystem,
    IntegerTable,
    SystemSpec,
    build_system,
    divisors,
    enumerate_integers,
)
from .transforms import ContourSpec, F_of, equivalence_report, mellin, perron_check, zeta, zeta_residue_scan

__version__ = "0.1.0"
