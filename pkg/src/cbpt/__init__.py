"""Cost-sensitive boosting over weakest-link-pruned decision trees."""

from .dataset import Dataset, SplitPlan, load_csv, make_folds, save_csv, stratified_split
from .estimators import CBPTClassifier, DiscreteAdaBoostClassifier
from .evaluation import (
    CurvePoint,
    EvalReport,
    convergence_curve,
    cross_validate,
    evaluate,
    learning_curve,
)
from .exceptions import (
    CBPTError,
    ParseError,
    SchemaError,
    TrainingError,
    ValidationError,
    WeakLearnerError,
)
from .model_io import load_model, save_model
from .pruning import PruneSequence, best_pruned_tree, prune_sequence, weighted_test_error
from .tree import Tree, TreeNode, grow_full_tree, regularized_cost, tree_cost, weighted_gini

__version__ = "0.1.0"

__all__ = [
    "CBPTClassifier",
    "CBPTError",
    "CurvePoint",
    "Dataset",
    "DiscreteAdaBoostClassifier",
    "EvalReport",
    "ParseError",
    "PruneSequence",
    "SchemaError",
    "SplitPlan",
    "TrainingError",
    "Tree",
    "TreeNode",
    "ValidationError",
    "WeakLearnerError",
    "best_pruned_tree",
    "convergence_curve",
    "cross_validate",
    "evaluate",
    "grow_full_tree",
    "learning_curve",
    "load_csv",
    "load_model",
    "make_folds",
    "prune_sequence",
    "regularized_cost",
    "save_csv",
    "save_model",
    "stratified_split",
    "tree_cost",
    "weighted_gini",
    "weighted_test_error",
    "__version__",
]
