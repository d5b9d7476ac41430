"""Learning rules (functions) and their estimator wrappers."""
from .estimators import (
    AdaptiveAgnosticClassifier,
    AdaptiveRelaxedClassifier,
    AgnosticCompressionClassifier,
    AlphaBoostClassifier,
    ConfidenceBoostedClassifier,
    DAClassifier,
    ERMClassifier,
    ERMInvClassifier,
    OneInclusionClassifier,
    check_instances,
    check_sample,
)
from .rules import (
    adaptive_agnostic,
    adaptive_relaxed,
    agnostic_compress,
    alpha_boost,
    confidence_boost,
    da,
    erm,
    erm_index,
    erm_inv,
    invariance_buckets,
    largest_realizable_submultiset,
    oig_agnostic_weak,
    oig_eta_predict,
    oig_invariant_predict,
    oig_predict,
    oig_relaxed_predict,
    transductive_predictor,
)
from .spec import KINDS, LearnerSpec
from ..core import invariance_indicator

__all__ = [name for name in dir() if not name.startswith("_")]
