"""Learning rules as plain functions over ``Sample`` and ``Problem``.

Inductive rules return a hypothesis row or a ``Predictor``. Transductive
rules take ``(S, x)`` and return a label; ``transductive_predictor`` wraps
one into a lazily evaluated total function.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from ..core import (
    LazyPredictor,
    Predictor,
    Problem,
    Sample,
    augment,
    check_rng,
    err_sample,
    labels_at,
)
from ..dims import restrict, vc_ao
from ..exceptions import (
    AllSubclassesEmpty,
    InsufficientSamples,
    NoConsistentVertex,
    OrbitLabelConflict,
    ParamOutOfRange,
    RoundsCapExceeded,
    WeakLearnerStuck,
)
from ..oig import build_graph, orient, predict_Q

TIE_RULES = ("first_index", "uniform_random")
FALLBACK_LABEL = 0

ALPHA = 0.5 * math.log(2.0)
WEAK_TARGET = 1.0 / 3.0
WEAK_RETRIES = 64
ROUNDS_CONSTANT = 16


def _pick(candidates: np.ndarray, tie_rule: str, rng) -> int:
    if tie_rule == "first_index":
        return int(candidates[0])
    if tie_rule == "uniform_random":
        if rng is None:
            raise ParamOutOfRange("uniform_random ties need a random stream")
        return int(candidates[rng.integers(len(candidates))])
    raise ParamOutOfRange(f"unknown tie rule {tie_rule!r}")


def erm_index(S: Sample, problem: Problem, tie_rule: str = "first_index", rng=None) -> int:
    table = problem.table
    losses = (table[:, S.xs] != S.ys).sum(axis=1) if len(S) else np.zeros(len(table), dtype=int)
    return _pick(np.flatnonzero(losses == losses.min()), tie_rule, rng)


def erm(S: Sample, problem: Problem, tie_rule: str = "first_index", rng=None) -> np.ndarray:
    """A hypothesis of minimal empirical error."""
    return problem.table[erm_index(S, problem, tie_rule, rng)]


def da(S: Sample, problem: Problem, tie_rule: str = "first_index", rng=None) -> np.ndarray:
    """ERM over the augmented multiset, 0-1 loss, unit weight per element."""
    return erm(augment(S, problem), problem, tie_rule, rng)


def orbit_labels(S: Sample, problem: Problem) -> dict:
    """Training label of every orbit touched by S."""
    oid = problem.orbit_id
    out: dict = {}
    for x, y in zip(S.xs.tolist(), S.ys.tolist()):
        o = int(oid[x])
        if out.setdefault(o, y) != y:
            raise OrbitLabelConflict(f"orbit {o} carries both labels in the sample")
    return out


def erm_inv(S: Sample, problem: Problem, tie_rule: str = "first_index", rng=None) -> Predictor:
    """ERM on the original data, overridden by the training label on every
    observed orbit."""
    fixed = orbit_labels(S, problem)
    labels = erm(S, problem, tie_rule, rng).copy()
    for o, y in fixed.items():
        labels[problem.partition.orbits[o]] = y
    return Predictor(labels, {"observed_orbits": sorted(fixed)})


# ------------------------------------------------------- graph predictors

def oig_predict(S: Sample, x: int, problem: Problem, kind: str, eta: float | None = None) -> int:
    """Graph predictor on X_S plus x with the requested restriction.

    kind is "invariant", "orbit" or "eta". Empty restricted classes and
    samples no labeling agrees with fall back to label 0.
    """
    x = int(x)
    hit = np.flatnonzero(S.xs == x)
    if len(hit):
        return int(S.ys[hit[0]])
    if kind == "eta":
        X = np.append(S.xs, x)
    else:
        X = np.unique(np.append(S.xs, x))
    cls = restrict(problem, X, kind, eta)
    if cls.empty:
        return FALLBACK_LABEL
    graph = build_graph(cls)
    try:
        return predict_Q(graph, orient(graph), S, x)
    except NoConsistentVertex:
        return FALLBACK_LABEL


def oig_invariant_predict(S: Sample, x: int, problem: Problem) -> int:
    return oig_predict(S, x, problem, "invariant")


def oig_relaxed_predict(S: Sample, x: int, problem: Problem) -> int:
    return oig_predict(S, x, problem, "orbit")


def oig_agnostic_weak(S: Sample, x: int, problem: Problem) -> int:
    return oig_predict(S, x, problem, "orbit")


def oig_eta_predict(S: Sample, x: int, problem: Problem, eta: float) -> int:
    return oig_predict(S, x, problem, "eta", eta)


def transductive_predictor(S: Sample, problem: Problem, kind: str, eta: float | None = None,
                           meta: dict | None = None) -> LazyPredictor:
    def fn(xs):
        return [oig_predict(S, x, problem, kind, eta) for x in xs]

    return LazyPredictor(problem.n_instances, fn, meta)


# ---------------------------------------------------------------- boosting

def confidence_boost(learn: Callable[[Sample], object], S: Sample, k_rounds: int,
                     n: int | None = None, validation_size: int = 0):
    """Train on k_rounds disjoint chunks of n examples and keep the output
    with the fewest mistakes on the next validation_size examples."""
    if k_rounds < 1:
        raise ParamOutOfRange("k_rounds must be >= 1")
    if n is None:
        n = (len(S) - validation_size) // k_rounds
    need = k_rounds * n + validation_size
    if n < 0 or need > len(S):
        raise InsufficientSamples(f"need {need} examples, have {len(S)}")
    outputs = [learn(S[r * n:(r + 1) * n]) for r in range(k_rounds)]
    val = S[k_rounds * n:need]
    errors = [err_sample(h, val) if len(val) else 0.0 for h in outputs]
    best = int(np.argmin(errors))
    return outputs[best], {"round_errors": errors, "selected_round": best}


def majority_predictor(n: int, voters: list, meta: dict | None = None) -> LazyPredictor:
    """Label 1 where strictly more than half of the voters say 1."""

    def fn(xs):
        votes = np.zeros(len(xs), dtype=int)
        for h in voters:
            votes += labels_at(h, xs)
        return (2 * votes > len(voters)).astype(np.uint8)

    return LazyPredictor(n, fn, meta)


def alpha_boost(weak: Callable[[Sample], object], R: Sample, k: int, n_instances: int,
                rounds_cap: int | None = None, rng=None, alpha: float = ALPHA,
                target: float = WEAK_TARGET, retries: int = WEAK_RETRIES) -> LazyPredictor:
    """Multiplicative-weights boosting of ``weak`` until the majority vote is
    consistent with every example of R.

    Each round draws up to ``retries`` multisets of size k from the current
    weights and keeps the first whose output errs on at most ``target`` of
    the weight; misclassified examples are then scaled by exp(alpha).
    """
    if k < 1:
        raise ParamOutOfRange("subsample size k must be >= 1")
    rng = check_rng(rng)
    n = len(R)
    if rounds_cap is None:
        rounds_cap = math.ceil(ROUNDS_CONSTANT * math.log(max(n, 2)))
    weights = np.full(n, 1.0 / n)
    voters, subsamples = [], []
    votes = np.zeros(n, dtype=int)
    while True:
        for _ in range(retries):
            idx = rng.choice(n, size=k, p=weights)
            h = weak(R[idx])
            wrong = labels_at(h, R.xs) != R.ys
            if weights[wrong].sum() <= target + 1e-12:
                break
        else:
            raise WeakLearnerStuck(f"no subsample reached weighted error {target:.3f}")
        voters.append(h)
        subsamples.append(idx)
        votes += (labels_at(h, R.xs) == 1)
        majority = (2 * votes > len(voters)).astype(np.uint8)
        if np.array_equal(majority, R.ys):
            break
        if len(voters) >= rounds_cap:
            raise RoundsCapExceeded(f"majority still inconsistent after {rounds_cap} rounds")
        weights = weights * np.exp(alpha * wrong)
        weights /= weights.sum()
    meta = {"rounds": len(voters), "subsample_size": k,
            "compression_indices": [s.tolist() for s in subsamples]}
    return majority_predictor(n_instances, voters, meta)


def largest_realizable_submultiset(S: Sample, problem: Problem) -> tuple[Sample, int]:
    """Largest submultiset of S some hypothesis labels correctly.

    A realizable submultiset is contained in the agreement set of a
    hypothesis realizing it, so maximizing agreement over H is exact.
    """
    agree = problem.table[:, S.xs] == S.ys
    best = int(np.argmax(agree.sum(axis=1)))
    return S[agree[best]], best


def agnostic_compress(S: Sample, problem: Problem, k: int | None = None, rounds_cap: int | None = None,
                      rng=None) -> LazyPredictor:
    """Boosted graph predictor trained on the largest realizable part of S."""
    n = problem.n_instances
    if len(S) == 0:
        return LazyPredictor(n, lambda xs: np.zeros(len(xs), dtype=np.uint8), {"realizable_size": 0})
    R, h_idx = largest_realizable_submultiset(S, problem)
    if len(R) == 0:
        return LazyPredictor(n, lambda xs: np.zeros(len(xs), dtype=np.uint8), {"realizable_size": 0})
    if k is None:
        k = max(1, 3 * vc_ao(problem))

    def weak(sub):
        return transductive_predictor(sub, problem, "orbit")

    h = alpha_boost(weak, R, k, n, rounds_cap, rng)
    h.meta["realizable_size"] = len(R)
    best_err = 1.0 - len(R) / len(S)
    if err_sample(h, S) > best_err + 1e-9:
        raise RuntimeError("compression output worse than the best hypothesis on S")
    return h


# ---------------------------------------------------------------- adaptive

def default_delta(n: int) -> float:
    return math.sqrt(math.log(n + 1) / (2 * (n + 1)))


def default_split(m: int) -> int:
    """Size of the training part: floor(m / (ln m + 1)), at least 1."""
    if m < 2:
        raise InsufficientSamples("need at least two examples to split")
    m1 = int(math.floor(m / (math.log(m) + 1.0)))
    return min(max(m1, 1), m - 1)


def _split(S: Sample, split, rng) -> tuple[Sample, Sample]:
    m = len(S)
    if split is None:
        m1 = default_split(m)
    elif isinstance(split, float) and 0 < split < 1:
        m1 = int(math.floor(split * m))
    else:
        m1 = int(split)
    if m1 < 1 or m - m1 < 1:
        raise InsufficientSamples(f"split {m1}/{m - m1} leaves an empty part")
    perm = rng.permutation(m)
    return S[perm[:m1]], S[perm[m1:]]


def _argmin_validation(candidates: list, S2: Sample) -> tuple[int, list]:
    errors = [err_sample(h, S2) for h in candidates]
    return int(np.argmin(errors)), errors


def adaptive_relaxed(S: Sample, problem: Problem, delta: float | None = None, split=None,
                     k_rounds: int = 1, validation_size: int = 0, rng=None) -> LazyPredictor:
    """Grid search over invariance levels with held-out selection.

    Candidate i is the eta-restricted graph predictor at threshold 2*i*delta
    (clipped to 1), confidence-boosted on the first part of the sample; the
    candidate with the fewest mistakes on the second part is returned.
    """
    rng = check_rng(rng)
    S1, S2 = _split(S, split, rng)
    n = (len(S1) - validation_size) // k_rounds
    if n < 0:
        raise InsufficientSamples("training part smaller than the validation budget")
    if delta is None:
        delta = default_delta(n)
    if not 0 < delta <= 1:
        raise ParamOutOfRange("delta must lie in (0, 1]")
    grid = math.ceil(1 / (2 * delta) - 1e-12)
    thresholds = [min(1.0, 2 * i * delta) for i in range(grid + 1)]
    candidates, boost_meta = [], []
    for thr in thresholds:
        h, meta = confidence_boost(
            lambda sub, thr=thr: transductive_predictor(sub, problem, "eta", thr),
            S1, k_rounds, n, validation_size)
        candidates.append(h)
        boost_meta.append(meta)
    best, errors = _argmin_validation(candidates, S2)
    out = candidates[best]
    out.meta.update({"thresholds": thresholds, "validation_errors": errors, "selected": best,
                     "delta": delta, "train_size": len(S1), "boosting": boost_meta})
    return out


def adaptive_agnostic(S: Sample, U, problem: Problem, delta: float | None = None, split=None,
                      k: int | None = None, rng=None) -> LazyPredictor:
    """Bucket H by its empirical invariance statistic on U, run the
    compression learner inside every nonempty bucket and select on
    held-out data. Bucket 0 holds the hypotheses with statistic exactly 0;
    bucket i >= 1 holds those in (2(i-1)delta, 2i delta]."""
    rng = check_rng(rng)
    U = np.asarray(U, dtype=np.int64)
    if len(U) == 0:
        raise ParamOutOfRange("unlabeled set must be nonempty")
    S1, S2 = _split(S, split, rng)
    if delta is None:
        delta = default_delta(len(S1))
    if not 0 < delta <= 1:
        raise ParamOutOfRange("delta must lie in (0, 1]")
    stat = problem.iota[:, U].mean(axis=1)
    bucket = invariance_buckets(stat, delta)
    K = math.ceil(1 / (2 * delta) - 1e-12)
    candidates, labels, sizes = [], [], []
    for i in range(K + 1):
        rows = np.flatnonzero(bucket == i)
        sizes.append(len(rows))
        if len(rows) == 0:
            continue
        candidates.append(agnostic_compress(S1, problem.subproblem(rows), k=k, rng=rng))
        labels.append(i)
    if not candidates:
        raise AllSubclassesEmpty("every bucket is empty")
    best, errors = _argmin_validation(candidates, S2)
    out = candidates[best]
    out.meta.update({"buckets": labels, "bucket_sizes": sizes, "validation_errors": errors,
                     "selected_bucket": labels[best], "delta": delta, "train_size": len(S1)})
    return out


def invariance_buckets(stat: np.ndarray, delta: float) -> np.ndarray:
    """Bucket index per hypothesis: 0 for a zero statistic, otherwise the
    i >= 1 with stat in (2(i-1)delta, 2i delta]."""
    stat = np.asarray(stat, dtype=float)
    out = np.ceil(stat / (2 * delta) - 1e-12).astype(int)
    out[stat <= 1e-12] = 0
    return np.maximum(out, np.where(stat > 1e-12, 1, 0))
