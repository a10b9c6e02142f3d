"""Heavy-tailed walk simulation and nonlocal solvers with cross-validation.

The package builds scaled random walks whose waiting times carry exact
power tails with position- and time-dependent exponents, solves the
matching terminal-value problem with a nonlocal time derivative on a grid,
evaluates the time-change representation by quadrature, and ships analytic
references (Mittag-Leffler profiles, one-sided stable laws) so every route
can be checked against an independent one.
"""

from . import (
    ctrw,
    errors,
    kernels,
    model,
    oracles,
    solver,
    streams,
    subordination,
    waiting,
)
from .ctrw import (
    ChainState,
    DensityGrid,
    MCEstimate,
    empirical_transition_density,
    estimate_functional,
    run_to_horizon,
    step_chain,
)
from .kernels import (
    JumpDistribution,
    apply_approx_generator,
    diffusion_kernel,
    generator_residual,
    kernel_family,
    stable_kernel,
)
from .model import Model, gamma_at, make_model
from .oracles import constant_order_solution, mittag_leffler, subordinator_cdf
from .solver import (
    Field,
    Grid,
    TimeWeights,
    apply_right_derivative,
    build_spatial_operator,
    build_time_weights,
    solve_terminal_problem,
)
from .subordination import (
    discrete_subordinated_expectation,
    subordinated_density,
    subordinated_expectation,
    theta_tail,
)
from .waiting import (
    RateReport,
    RateTestFunction,
    WaitingLaw,
    build_waiting_law,
    check_rate,
    discretize_waiting_law,
    sample_waiting,
    tail_prob,
)

__version__ = "0.1.0"
