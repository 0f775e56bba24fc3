"""Continuous DeGroot opinion dynamics on DiKernels.

Interval partitions, block and grid kernels, discrete-continuous
transforms, cut-norm error bounds, consensus computation, and the
two-lobby influence game.
"""

from .errors import (
    BudgetError,
    ContractError,
    DikernelError,
    DomainError,
    InvalidArgumentError,
    NonConvergenceError,
    NotApplicableError,
    ShapeError,
)
from .partition import IntervalPartition, common_refinement, from_weights, uniform
from .kernels import (
    AnalyticKernel,
    BlockKernel,
    GridKernel,
    LipschitzMeta,
    OpinionFunction,
    apply,
    catalog,
    check_row_stochastic,
    gamma_mixing,
    iterate,
    kernel_from_json,
    kernel_product,
    refine_block,
)
from .transform import (
    WeightedDeGrootModel,
    block_to_model,
    default_partition,
    discretize_kernel,
    lift,
    lift_opinions,
    project_opinions,
    reduce_dimension,
)
from .metrics import (
    BoundReport,
    SignedBlockKernel,
    block_difference,
    bound_discounted,
    bound_dynamic,
    bound_one_step,
    bound_partition,
    bound_two_kernel_discounted,
    cut_norm_exact,
    cut_norm_heuristic,
    l1_distance,
    min_partition_size,
)
from .dynamics import (
    ConsensusReport,
    StationaryDensity,
    consensus,
    discounted_utility,
    stage_utility,
    stationary_density,
)
from .game import (
    EquilibriumReport,
    GameSpec,
    Strategy,
    compete_additive,
    compete_weighted,
    discretize_game,
    epsilon_residual,
    lobby_utility,
    reduce_to_unitype,
    solve_nash,
    solve_unitype_nash,
    two_player_transform,
    unitype_best_response,
)

__version__ = "0.1.0"
