"""Desk-scale variational analysis: conjugates, epi-limits, integral functionals."""

from .epilimit import (
    BUILTIN_FAMILIES,
    EpiLimitReport,
    FunctionSequence,
    builtin_family,
    epi_converges,
    lower_epilimit,
    seq_lower_epilimit,
    upper_epilimit,
    verify_conjugate_identity,
)
from .extreal import INF, ExtRealError, Grid, GridFunction, InputError, indicator, sublevel, upper_sum
from .legendre import (
    ConjugateResult,
    biconjugate,
    conjugate_bruteforce,
    conjugate_fast_1d,
    infconv,
)
from .measure import (
    AtomSequence,
    Integrand,
    MeasureSpace,
    Refusal,
    SimpleFunction,
    delta_plus_bruteforce,
    delta_plus_greedy,
    integral_functional,
    uniform_integrability_test,
    young_from_ui,
)
from .subdiff import (
    Certificate,
    frechet_certificate,
    global_lower_bound_checks,
    growth_certificate,
    hadamard_directional_subderivate,
    ioffe_criterion,
    lcp_check,
)
from .tails import Tail

__version__ = "0.1.0"
