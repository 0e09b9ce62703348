"""Multiple-goal heuristic search with marginal-utility inference."""

from .core import (
    AnytimeTrace,
    InvalidParameterError,
    InvalidProblemError,
    ResourceMeter,
    SearchError,
    SearchGraph,
    SearchOutcome,
    SearchProblem,
    StateSpace,
    UndefinedStatisticsError,
)
from .search import (
    BestFirstSearch,
    ConstantScorer,
    Scorer,
    StateScorer,
    astar_epsilon_multigoal,
    backtracking_multigoal,
    best_first_multigoal,
    hill_climbing_multigoal,
)
from .distance import (
    GoalList,
    ManhattanDistance,
    MinDistanceScorer,
    PenalizedScorer,
    ProgressScorer,
    SumScorer,
    h_min_dist,
    h_progress,
    h_sum,
)
from .utility import BudgetPolicy, MarginalUtility, MUScorer, SupportThreshold
from .induction import CombinedScorer, DepthModels, InductionScorer, KNNRegressor, SiblingSource

__version__ = "0.1.0"
