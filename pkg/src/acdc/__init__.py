"""Alpha-carving decision chains for risk stratification on imbalanced data.

The library trains an ordered chain of decision rules that sequentially
carves pure majority-class subsets out of a binary-labeled table, leaving a
high-risk remainder, plus a fixed-alpha tree baseline and rule-annotated
ROC/Lift evaluation.
"""

from .alpha_tree import TreeNode, smoothed_score, train_tree, tree_leaves, tree_score, tree_score_batch
from .carving import (
    EXACT_ROOT,
    PEAK_FALLBACK,
    CarvingConfig,
    CarvingSolution,
    az_factor_slope,
    omega_y,
    solve_alpha,
)
from .chain import (
    FINAL,
    MODEL_FORMAT,
    ChainConfig,
    ChainStage,
    DecisionChain,
    FeasibleSplit,
    deserialize,
    feasible_splits,
    rule_for_terminal,
    score,
    score_batch,
    serialize,
    train_chain,
)
from .criterion import (
    CriterionDecomposition,
    CriterionValue,
    acdc_divergence,
    az_factor,
    criterion_limit_alpha1,
    divergence_values,
    select_split,
    weighted_gini,
)
from .dataset import (
    CATEGORICAL,
    NUMERIC,
    Dataset,
    FeatureColumn,
    SplitPredicate,
    SplitStats,
    candidate_splits,
    enumerate_split_stats,
    generate_synthetic,
    load_csv,
    load_features_csv,
    tabulate,
)
from .errors import (
    AcdcError,
    CarvingRangeError,
    DataError,
    DegenerateSplitError,
    FeatureMismatchError,
    ModelFormatError,
    SingleClassError,
)
from .metrics import (
    AnnotatedPoint,
    EvaluationCurve,
    annotate_chain_curve,
    annotate_tree_curve,
    concordance,
    lift_chart,
    read_curve_csv,
    roc_curve,
    write_curve_csv,
    write_curve_svg,
)

__version__ = "0.1.0"
