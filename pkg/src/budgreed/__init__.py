"""Greedy algorithms for budgeted monotone submodular maximization.

Submodules: ``core`` (oracles, instances), ``greedy`` (algorithms),
``exact`` (brute force, ratio experiments), ``bound`` and ``rational``
(certified ratio bound), ``analytic`` (z, p helpers), ``adversarial``
(hard instance), ``kernels`` (numba / numpy hot loops).
"""

from ._accel import backend
from .core import (
    CoverageOracle,
    DomainError,
    InfeasibleGuessError,
    Instance,
    InstanceFormatError,
    ModularOracle,
    PreconditionError,
    ResidualOracle,
    SetValue,
    ValueOracle,
    density,
    eval_set,
    load_instance,
    marginal,
    residual,
    validate_oracle,
)
from .greedy import (
    AlgorithmResult,
    GuessConfig,
    ParameterError,
    Trajectory,
    delta_g,
    g_of,
    greedy,
    greedy_plus,
    k_guess,
    plain_greedy,
    run_algorithm,
    threshold_greedy,
    threshold_greedy_plus,
    threshold_plain_greedy,
)
from .rational import NonNegRational, lb_div, lb_round

__version__ = "0.1.0"
