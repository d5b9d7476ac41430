import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st
from sklearn.base import clone

from pacinv.constructions import example_3_2, random_problem, theorem_4_2
from pacinv.core import GroupAction, Problem, Sample, augment, err_sample, sample
from pacinv.exceptions import InsufficientSamples, OrbitLabelConflict, ParamOutOfRange
from pacinv.learners import (
    AdaptiveAgnosticClassifier, AdaptiveRelaxedClassifier, AgnosticCompressionClassifier,
    AlphaBoostClassifier, ConfidenceBoostedClassifier, DAClassifier, ERMClassifier, ERMInvClassifier,
    LearnerSpec, OneInclusionClassifier,
)
from pacinv.learners import rules


def realizable_sample(seed, size=None):
    r = np.random.default_rng(seed)
    problem = random_problem(r, int(r.integers(3, 8)), int(r.integers(4, 20)), 1, 3)
    h = problem.table[r.integers(len(problem.table))]
    xs = r.integers(0, problem.n_instances, size=size or int(r.integers(1, 30)))
    return problem, Sample(xs, h[xs]), r


# inductive rules ----------------------------------------------------------------

def test_erm_tie_rules():
    p = Problem([[0, 1], [0, 0], [1, 1]])
    S = Sample(np.array([0]), np.array([0]))
    assert rules.erm_index(S, p) == 0
    picks = {rules.erm_index(S, p, "uniform_random", np.random.default_rng(s)) for s in range(30)}
    assert picks == {0, 1}
    with pytest.raises(ParamOutOfRange):
        rules.erm_index(S, p, "nearest")


@given(st.integers(0, 10**6))
def test_da_is_erm_on_augmented_data(seed):
    problem, S, _ = realizable_sample(seed)
    assert np.array_equal(rules.da(S, problem), rules.erm(augment(S, problem), problem))


@given(st.integers(0, 10**6))
def test_erm_inv_uses_training_labels_on_orbits(seed):
    problem, S, _ = realizable_sample(seed)
    try:
        h = rules.erm_inv(S, problem)
    except OrbitLabelConflict:
        return
    for x, y in S.pairs():
        orbit = problem.partition.orbits[problem.orbit_id[x]]
        assert (h.labels[list(orbit)] == y).all()


def test_erm_inv_conflict():
    p = Problem([[0, 1]], GroupAction(2, [[1, 0]]))
    with pytest.raises(OrbitLabelConflict):
        rules.erm_inv(Sample(np.array([0, 1]), np.array([0, 1])), p)


# graph predictors ---------------------------------------------------------------

@given(st.integers(0, 10**6))
def test_graph_predictor_reproduces_training_labels(seed):
    problem, S, _ = realizable_sample(seed, 6)
    h = rules.transductive_predictor(S, problem, "orbit")
    for x, y in S.pairs():
        assert h(x) == y


def test_graph_predictor_invariant_on_sign_flip():
    c = example_3_2(3)
    t = c.sample_target(0)
    S = sample(t.D, 4, np.random.default_rng(0))
    h = rules.transductive_predictor(S, t.problem, "invariant").materialize()
    assert h.labels.shape == (t.problem.n_instances,)
    assert rules.oig_predict(S, int(S.xs[0]), t.problem, "eta", 0.0) == S.ys[0]


def test_empty_class_falls_back_to_zero():
    p = Problem([[0, 1]], GroupAction(2, [[1, 0]]))
    assert rules.oig_invariant_predict(Sample(np.array([0]), np.array([0])), 1, p) == 0


# boosting and compression -------------------------------------------------------

def test_confidence_boost_selects_best_round():
    S = Sample(np.array([0, 1, 2, 3]), np.array([0, 1, 1, 1]))
    outputs = iter([np.array([0, 0, 0, 0]), np.array([1, 1, 1, 1])])
    h, meta = rules.confidence_boost(lambda sub: next(outputs), S, 2, 1, 2)
    assert meta["selected_round"] == 1 and meta["round_errors"] == [1.0, 0.0]
    with pytest.raises(InsufficientSamples):
        rules.confidence_boost(lambda sub: None, S, 3, 2, 0)


@given(st.integers(0, 10**6))
def test_alpha_boost_consistent(seed):
    problem, S, r = realizable_sample(seed)
    h = AlphaBoostClassifier(problem, random_state=seed).fit(S.xs, S.ys)
    assert np.array_equal(h.predict(S.xs), S.ys)
    assert h.model_.meta["rounds"] == len(h.model_.meta["compression_indices"])


def brute_largest_realizable(S, problem):
    for size in range(len(S), -1, -1):
        for idx in itertools.combinations(range(len(S)), size):
            idx = list(idx)
            if (problem.table[:, S.xs[idx]] == S.ys[idx]).all(axis=1).any():
                return size
    return 0


@given(st.integers(0, 10**6))
def test_largest_realizable_submultiset_is_maximum(seed):
    r = np.random.default_rng(seed)
    problem = random_problem(r, 4, int(r.integers(1, 8)), 1, 2)
    xs = r.integers(0, 4, size=int(r.integers(1, 9)))
    S = Sample(xs, r.integers(0, 2, size=len(xs)))
    R, h = rules.largest_realizable_submultiset(S, problem)
    assert len(R) == brute_largest_realizable(S, problem)
    assert np.array_equal(problem.table[h][R.xs], R.ys)


@given(st.integers(0, 10**6))
def test_agnostic_compression_guarantee(seed):
    r = np.random.default_rng(seed)
    problem = random_problem(r, int(r.integers(3, 7)), int(r.integers(3, 15)), 1, 3)
    xs = r.integers(0, problem.n_instances, size=int(r.integers(1, 30)))
    S = Sample(xs, r.integers(0, 2, size=len(xs)))
    h = rules.agnostic_compress(S, problem, rng=r)
    best = min(err_sample(row, S) for row in problem.table)
    assert err_sample(h, S) <= best + 1e-12


# adaptive -----------------------------------------------------------------------

def test_default_split_and_delta():
    assert rules.default_split(32) == 7
    assert rules.default_split(2) == 1
    assert rules.default_delta(7) == pytest.approx(np.sqrt(np.log(8) / 16))
    with pytest.raises(InsufficientSamples):
        rules.default_split(1)


def test_invariance_buckets():
    stat = np.array([0.0, 0.05, 0.2, 0.21, 1.0])
    assert rules.invariance_buckets(stat, 0.1).tolist() == [0, 1, 1, 2, 5]


def test_adaptive_relaxed_zero_threshold_first():
    c = theorem_4_2(4, 1 / 64)
    t = c.sample_target(0)
    S = sample(t.D, 32, np.random.default_rng(1))
    est = AdaptiveRelaxedClassifier(t.problem, random_state=2).fit(S.xs, S.ys)
    meta = est.model_.meta
    assert meta["thresholds"][0] == 0.0 and meta["thresholds"][-1] == 1.0
    assert len(meta["validation_errors"]) == len(meta["thresholds"])


def test_adaptive_agnostic_on_invariant_target():
    c = theorem_4_2(3, 1 / 64)
    t = c.sample_target(0)
    r = np.random.default_rng(3)
    S = sample(t.D, 32, r)
    U = sample(t.D, 32, r).xs
    est = AdaptiveAgnosticClassifier(t.problem, random_state=4).fit(S.xs, S.ys, X_unlabeled=U)
    assert est.model_.meta["selected_bucket"] == 0


# estimator API --------------------------------------------------------------------

@pytest.mark.parametrize("make", [
    lambda p: ERMClassifier(p),
    lambda p: DAClassifier(p, "uniform_random", 0),
    lambda p: ERMInvClassifier(p),
    lambda p: OneInclusionClassifier(p, "orbit"),
    lambda p: AlphaBoostClassifier(p, random_state=0),
    lambda p: AgnosticCompressionClassifier(p, random_state=0),
    lambda p: ConfidenceBoostedClassifier(OneInclusionClassifier(p), n_rounds=2, validation_size=2),
])
def test_estimators_fit_predict_clone(make):
    p = Problem(np.array([[0, 0, 1, 1], [0, 1, 0, 1], [1, 1, 0, 0]]), GroupAction(4, [[1, 0, 2, 3]]))
    est = make(p)
    X, y = np.array([0, 2, 3, 0, 2, 3]), np.array([0, 1, 1, 0, 1, 1])
    fitted = est.fit(X, y)
    assert fitted is est
    assert est.predict(np.arange(4)).shape == (4,)
    assert est.score(X, y) >= 0.5
    assert type(clone(est)) is type(est)
    with pytest.raises(ValueError):
        est.predict(np.array([9]))


def test_learner_spec_round_trip():
    spec = LearnerSpec.from_dict({"kind": "DA", "tie_rule": "uniform_random"})
    assert spec.name == "DA[uniform_random]"
    assert LearnerSpec.from_dict(spec.to_dict()) == spec
    with pytest.raises(ParamOutOfRange):
        LearnerSpec("NOPE")
    inner = {"kind": "CONF_BOOSTED", "inner": {"kind": "OIG_INVARIANT"}, "n_rounds": 1}
    p = Problem(np.eye(3, dtype=int))
    assert isinstance(LearnerSpec.from_dict(inner).build(p), ConfidenceBoostedClassifier)
