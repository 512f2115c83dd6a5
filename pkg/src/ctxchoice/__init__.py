"""Context-dependent choice engine.

Items carry a stand-alone utility plus per-item cross gains from other
items offered alongside them, arranged in a square conditional-utility
matrix. On top of that model: prediction and explanation of preference
reversals caused by adding or removing items, constraint-based
learning of the matrix from observed choices, heuristics that flag
undesirable choice behaviour, and interventions (typed warnings and
adaptively composed choice sets). Exposed as a library, a CLI
(``ctxchoice``), and an HTTP session service with a web console.
"""

from .config import DEFAULT_CONFIG, EngineConfig
from .detector import (
    Flag,
    PairwiseStats,
    SuspectReport,
    flag_inconsistency,
    pairwise_stats,
    regret_risk,
    suspect_items,
)
from .errors import EngineError
from .fixtures import load_fixture
from .intervention import (
    AdaptationPlan,
    DetectorContext,
    Warning,
    adapt_choice_set,
    compose_warning,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .learner import (
    ChoiceLog,
    LinearConstraint,
    MatrixEstimate,
    Observation,
    constraints_from_log,
    constraints_from_observation,
    estimate_matrix,
    frequency_equalities,
    ingest_rating,
    predict_choice,
)
from .model import (
    Catalog,
    UtilityMatrix,
    additive_gains,
    best_choice,
    contextual_utility,
    full_method_utility,
    scale_matrix,
    utility_table,
)
from .reversal import (
    Gap,
    ItemDelta,
    OutcomeClass,
    TippingBase,
    classify_outcome,
    gap,
    greedy_tipping_set,
    max_gap_augmentation,
    minimal_tipping_sets,
    positive_d_items,
    reversal_report,
)
from .simulate import (
    ChooserModel,
    DetectorPlant,
    ExperimentReport,
    evaluate_detector,
    evaluate_learner,
    sample_matrix,
    simulate_session,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptationPlan",
    "Catalog",
    "ChoiceLog",
    "ChooserModel",
    "DEFAULT_CONFIG",
    "DetectorContext",
    "DetectorPlant",
    "EngineConfig",
    "EngineError",
    "ExperimentReport",
    "Flag",
    "Gap",
    "ItemDelta",
    "KERNEL_BACKEND",
    "LinearConstraint",
    "MatrixEstimate",
    "Observation",
    "OutcomeClass",
    "PairwiseStats",
    "SuspectReport",
    "TippingBase",
    "UtilityMatrix",
    "Warning",
    "adapt_choice_set",
    "additive_gains",
    "best_choice",
    "classify_outcome",
    "compose_warning",
    "constraints_from_log",
    "constraints_from_observation",
    "contextual_utility",
    "estimate_matrix",
    "evaluate_detector",
    "evaluate_learner",
    "flag_inconsistency",
    "frequency_equalities",
    "full_method_utility",
    "gap",
    "greedy_tipping_set",
    "ingest_rating",
    "load_fixture",
    "max_gap_augmentation",
    "minimal_tipping_sets",
    "pairwise_stats",
    "positive_d_items",
    "predict_choice",
    "regret_risk",
    "reversal_report",
    "sample_matrix",
    "scale_matrix",
    "simulate_session",
    "suspect_items",
    "utility_table",
]
