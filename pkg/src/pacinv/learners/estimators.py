"""scikit-learn style wrappers around the learning rules.

``X`` is an array of instance indices and ``y`` their 0/1 labels. ``fit``
stores the learned total function in ``model_``; ``predict`` evaluates it.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, clone
from sklearn.utils.validation import check_is_fitted

from ..core import Predictor, Problem, Sample, check_rng
from . import rules


def check_instances(X, n_instances: int) -> np.ndarray:
    """Validate an array of instance indices; accepts shape (n,) or (n, 1)."""
    X = np.asarray(X)
    if X.ndim == 2 and X.shape[1] == 1:
        X = X[:, 0]
    if X.ndim != 1:
        raise ValueError(f"expected a 1-d array of instance indices, got shape {X.shape}")
    if X.size and not np.issubdtype(X.dtype, np.integer):
        if not np.all(np.equal(np.mod(X, 1), 0)):
            raise ValueError("instance indices must be integers")
    X = X.astype(np.int64)
    if X.size and (X.min() < 0 or X.max() >= n_instances):
        raise ValueError(f"instance indices must lie in [0, {n_instances})")
    return X


def check_sample(X, y, n_instances: int) -> Sample:
    X = check_instances(X, n_instances)
    y = np.asarray(y).reshape(-1)
    if len(y) != len(X):
        raise ValueError("X and y have different lengths")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0/1")
    return Sample(X, y)


class _ProblemClassifier(ClassifierMixin, BaseEstimator):
    """Shared fit/predict plumbing; subclasses implement ``_fit_sample``."""

    def fit(self, X, y):
        S = check_sample(X, y, self.problem.n_instances)
        self.sample_ = S
        self.classes_ = np.array([0, 1])
        self.model_ = self._fit_sample(S)
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = check_instances(X, self.problem.n_instances)
        return np.asarray(self.model_(X), dtype=np.uint8) if len(X) else np.zeros(0, dtype=np.uint8)

    def _rng(self):
        return check_rng(self.random_state)


class ERMClassifier(_ProblemClassifier):
    def __init__(self, problem: Problem, tie_rule: str = "first_index", random_state=None):
        self.problem = problem
        self.tie_rule = tie_rule
        self.random_state = random_state

    def _fit_sample(self, S):
        idx = rules.erm_index(S, self.problem, self.tie_rule, self._rng())
        self.hypothesis_index_ = idx
        return Predictor(self.problem.table[idx], {"hypothesis_index": idx})


class DAClassifier(_ProblemClassifier):
    """ERM over the augmented training multiset."""

    def __init__(self, problem: Problem, tie_rule: str = "first_index", random_state=None):
        self.problem = problem
        self.tie_rule = tie_rule
        self.random_state = random_state

    def _fit_sample(self, S):
        from ..core import augment

        idx = rules.erm_index(augment(S, self.problem), self.problem, self.tie_rule, self._rng())
        self.hypothesis_index_ = idx
        return Predictor(self.problem.table[idx], {"hypothesis_index": idx})


class ERMInvClassifier(_ProblemClassifier):
    def __init__(self, problem: Problem, tie_rule: str = "first_index", random_state=None):
        self.problem = problem
        self.tie_rule = tie_rule
        self.random_state = random_state

    def _fit_sample(self, S):
        return rules.erm_inv(S, self.problem, self.tie_rule, self._rng())


class OneInclusionClassifier(_ProblemClassifier):
    """Transductive graph predictor; ``restriction`` is "invariant", "orbit"
    or "eta" (the latter with threshold ``eta``)."""

    def __init__(self, problem: Problem, restriction: str = "invariant", eta: float | None = None):
        self.problem = problem
        self.restriction = restriction
        self.eta = eta

    def _fit_sample(self, S):
        if self.restriction not in ("invariant", "orbit", "eta"):
            raise ValueError(f"unknown restriction {self.restriction!r}")
        if self.restriction == "eta" and self.eta is None:
            raise ValueError("eta restriction needs a threshold")
        return rules.transductive_predictor(S, self.problem, self.restriction, self.eta)


class ConfidenceBoostedClassifier(_ProblemClassifier):
    """Fits clones of ``estimator`` on disjoint chunks and keeps the one with
    the lowest error on a trailing validation chunk."""

    def __init__(self, estimator, n_rounds: int = 1, round_size: int | None = None,
                 validation_size: int = 0):
        self.estimator = estimator
        self.n_rounds = n_rounds
        self.round_size = round_size
        self.validation_size = validation_size

    @property
    def problem(self):
        return self.estimator.problem

    def _fit_sample(self, S):
        def learn(chunk):
            est = clone(self.estimator).fit(chunk.xs, chunk.ys)
            return est.model_

        model, meta = rules.confidence_boost(learn, S, self.n_rounds, self.round_size, self.validation_size)
        self.boost_info_ = meta
        return model


class AlphaBoostClassifier(_ProblemClassifier):
    """Boosted orbit-consistent graph predictor; expects a realizable sample."""

    def __init__(self, problem: Problem, k: int | None = None, rounds_cap: int | None = None,
                 random_state=None):
        self.problem = problem
        self.k = k
        self.rounds_cap = rounds_cap
        self.random_state = random_state

    def _fit_sample(self, S):
        from ..dims import vc_ao

        if len(S) == 0:
            return Predictor(np.zeros(self.problem.n_instances, dtype=np.uint8))
        k = self.k if self.k is not None else max(1, 3 * vc_ao(self.problem))

        def weak(sub):
            return rules.transductive_predictor(sub, self.problem, "orbit")

        return rules.alpha_boost(weak, S, k, self.problem.n_instances, self.rounds_cap, self._rng())


class AgnosticCompressionClassifier(_ProblemClassifier):
    def __init__(self, problem: Problem, k: int | None = None, rounds_cap: int | None = None,
                 random_state=None):
        self.problem = problem
        self.k = k
        self.rounds_cap = rounds_cap
        self.random_state = random_state

    def _fit_sample(self, S):
        return rules.agnostic_compress(S, self.problem, self.k, self.rounds_cap, self._rng())


class AdaptiveRelaxedClassifier(_ProblemClassifier):
    def __init__(self, problem: Problem, delta: float | None = None, split=None, n_rounds: int = 1,
                 validation_size: int = 0, random_state=None):
        self.problem = problem
        self.delta = delta
        self.split = split
        self.n_rounds = n_rounds
        self.validation_size = validation_size
        self.random_state = random_state

    def _fit_sample(self, S):
        return rules.adaptive_relaxed(S, self.problem, self.delta, self.split, self.n_rounds,
                                      self.validation_size, self._rng())


class AdaptiveAgnosticClassifier(_ProblemClassifier):
    """``fit`` takes the unlabeled multiset as ``X_unlabeled``; without it the
    training instances are reused."""

    def __init__(self, problem: Problem, delta: float | None = None, split=None, k: int | None = None,
                 random_state=None):
        self.problem = problem
        self.delta = delta
        self.split = split
        self.k = k
        self.random_state = random_state

    def fit(self, X, y, X_unlabeled=None):
        self._unlabeled = X if X_unlabeled is None else X_unlabeled
        return super().fit(X, y)

    def _fit_sample(self, S):
        U = check_instances(self._unlabeled, self.problem.n_instances)
        return rules.adaptive_agnostic(S, U, self.problem, self.delta, self.split, self.k, self._rng())
