"""Finite instance spaces, permutation group actions, hypothesis tables,
labeled distributions and samples.

Everything is index based: an instance is a position in ``[0, N)``, a group
element is a permutation array of length ``N`` and a hypothesis is a 0/1
vector of length ``N``.
"""
from __future__ import annotations

import enum
import json
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Sequence

import numpy as np

from .exceptions import (
    EmptySample,
    NotGInvariant,
    ParamOutOfRange,
    SizeLimitExceeded,
)

PROB_TOL = 1e-12
ERR_TOL = 1e-9
CLOSURE_CAP = 10**6


def check_rng(random_state=None) -> np.random.Generator:
    """Turn ``None``, an int seed or a Generator into a Generator."""
    if isinstance(random_state, np.random.Generator):
        return random_state
    return np.random.default_rng(random_state)


@dataclass(frozen=True)
class InstanceSpace:
    instances: tuple

    def __post_init__(self):
        if len(self.instances) < 1:
            raise ParamOutOfRange("instance space must be nonempty")
        if len(set(self.instances)) != len(self.instances):
            raise ParamOutOfRange("instance identifiers must be unique")

    @classmethod
    def of_size(cls, n: int) -> InstanceSpace:
        return cls(tuple(range(n)))

    def __len__(self):
        return len(self.instances)

    @cached_property
    def index(self) -> dict:
        return {ident: i for i, ident in enumerate(self.instances)}


@dataclass(frozen=True)
class OrbitPartition:
    orbit_id: np.ndarray
    orbits: tuple  # tuple of sorted int arrays

    @property
    def n_orbits(self) -> int:
        return len(self.orbits)


class GroupAction:
    """A finite group given by permutation generators on ``[0, N)``."""

    def __init__(self, n: int, generators: Sequence[Sequence[int]] = ()):
        self.n = int(n)
        gens = []
        for g in generators:
            g = np.asarray(g, dtype=np.int64)
            if g.shape != (self.n,) or not np.array_equal(np.sort(g), np.arange(self.n)):
                raise ParamOutOfRange("generator is not a permutation of [N]")
            gens.append(g)
        self.generators = tuple(gens)
        for g in self.generators:
            g.setflags(write=False)

    @classmethod
    def identity(cls, n: int) -> GroupAction:
        return cls(n, [])

    def __repr__(self):
        return f"GroupAction(n={self.n}, n_generators={len(self.generators)})"

    def closure(self, cap: int = CLOSURE_CAP) -> list:
        return close_group(self, cap)

    @cached_property
    def orbit_partition(self) -> OrbitPartition:
        return orbits(self)


def close_group(action: GroupAction, cap: int = CLOSURE_CAP) -> list:
    """All elements of the generated group (identity first), by BFS."""
    ident = np.arange(action.n)
    seen = {ident.tobytes()}
    out = [ident]
    queue = deque([ident])
    while queue:
        g = queue.popleft()
        for s in action.generators:
            h = s[g]
            key = h.tobytes()
            if key not in seen:
                seen.add(key)
                out.append(h)
                queue.append(h)
                if len(out) > cap:
                    raise SizeLimitExceeded(f"group closure exceeds {cap} elements")
    return out


def orbits(action: GroupAction) -> OrbitPartition:
    """Connected components of the graph with edges x -- g(x)."""
    parent = np.arange(action.n)

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for g in action.generators:
        for x in range(action.n):
            ra, rb = find(x), find(int(g[x]))
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    roots = np.array([find(x) for x in range(action.n)])
    # number orbits by their smallest member
    _, orbit_id = np.unique(roots, return_inverse=True)
    orbit_id = orbit_id.astype(np.int64)
    members = tuple(np.flatnonzero(orbit_id == k) for k in range(orbit_id.max() + 1))
    return OrbitPartition(orbit_id=orbit_id, orbits=members)


class HypothesisClass:
    """Deduplicated finite table of 0/1 labelings, one row per hypothesis."""

    def __init__(self, table):
        table = np.atleast_2d(np.asarray(table))
        if table.size == 0 or table.shape[0] < 1:
            raise ParamOutOfRange("hypothesis class must be nonempty")
        if not np.isin(table, (0, 1)).all():
            raise ParamOutOfRange("hypothesis labels must be 0/1")
        table = table.astype(np.uint8)
        # keep first occurrence order
        _, first = np.unique(table, axis=0, return_index=True)
        self.table = table[np.sort(first)]
        self.table.setflags(write=False)

    def __len__(self):
        return self.table.shape[0]

    @property
    def n_instances(self) -> int:
        return self.table.shape[1]

    def __getitem__(self, i):
        return self.table[i]

    def __repr__(self):
        return f"HypothesisClass(M={len(self)}, N={self.n_instances})"


@dataclass(frozen=True)
class LabeledDistribution:
    """Finite-support distribution with deterministic labels."""

    xs: np.ndarray
    ys: np.ndarray
    ps: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=np.int64)
        ys = np.asarray(self.ys, dtype=np.uint8)
        ps = np.asarray(self.ps, dtype=float)
        if not (xs.shape == ys.shape == ps.shape) or xs.ndim != 1 or len(xs) == 0:
            raise ParamOutOfRange("atoms must be nonempty parallel 1-d arrays")
        if np.any(ps < 0) or abs(math.fsum(ps) - 1.0) > PROB_TOL:
            raise ParamOutOfRange("probabilities must be nonnegative and sum to 1")
        if not np.isin(ys, (0, 1)).all():
            raise ParamOutOfRange("labels must be 0/1")
        keep = ps > 0
        xs, ys, ps = xs[keep], ys[keep], ps[keep]
        # merge repeated atoms, reject label clashes
        merged: dict = {}
        for x, y, p in zip(xs.tolist(), ys.tolist(), ps.tolist()):
            if x in merged:
                if merged[x][0] != y:
                    raise ParamOutOfRange(f"instance {x} carries both labels")
                merged[x][1].append(p)
            else:
                merged[x] = (y, [p])
        order = sorted(merged)
        object.__setattr__(self, "xs", np.array(order, dtype=np.int64))
        object.__setattr__(self, "ys", np.array([merged[x][0] for x in order], dtype=np.uint8))
        object.__setattr__(self, "ps", np.array([math.fsum(merged[x][1]) for x in order]))

    @classmethod
    def uniform(cls, xs, ys) -> LabeledDistribution:
        xs = np.asarray(xs)
        return cls(xs, ys, np.full(len(xs), 1.0 / len(xs)))

    @property
    def support(self) -> np.ndarray:
        return self.xs

    def __len__(self):
        return len(self.xs)


@dataclass(frozen=True)
class Sample:
    """Ordered multiset of (instance, label) pairs."""

    xs: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    ys: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.uint8))

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=np.int64).reshape(-1)
        ys = np.asarray(self.ys).reshape(-1)
        if xs.shape != ys.shape:
            raise ParamOutOfRange("xs and ys must have equal length")
        if not np.isin(ys, (0, 1)).all():
            raise ParamOutOfRange("labels must be 0/1")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys.astype(np.uint8))

    @classmethod
    def from_pairs(cls, pairs) -> Sample:
        pairs = list(pairs)
        if not pairs:
            return cls()
        xs, ys = zip(*pairs)
        return cls(np.array(xs), np.array(ys))

    def pairs(self) -> list:
        return list(zip(self.xs.tolist(), self.ys.tolist()))

    def __len__(self):
        return len(self.xs)

    def __getitem__(self, idx) -> Sample:
        return Sample(self.xs[idx], self.ys[idx])

    def __add__(self, other: Sample) -> Sample:
        return Sample(np.concatenate([self.xs, other.xs]), np.concatenate([self.ys, other.ys]))


@dataclass(frozen=True)
class Predictor:
    """A materialized total function on the instance space."""

    labels: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        labels = np.asarray(self.labels).astype(np.uint8)
        if not np.isin(labels, (0, 1)).all():
            raise ParamOutOfRange("predictor labels must be 0/1")
        object.__setattr__(self, "labels", labels)

    def __call__(self, x):
        return self.labels[x]


class LazyPredictor:
    """A total function evaluated on demand and memoized per instance.

    ``fn`` maps an array of instance indices to their labels. Transductive
    learners use this so that a graph is built only for queried points.
    """

    def __init__(self, n: int, fn, meta: dict | None = None):
        self.n = int(n)
        self._fn = fn
        self._cache = np.full(self.n, 255, dtype=np.uint8)
        self.meta = meta if meta is not None else {}

    def __call__(self, x):
        xs = np.asarray(x, dtype=np.int64)
        flat = xs.reshape(-1)
        todo = np.unique(flat[self._cache[flat] == 255])
        if len(todo):
            self._cache[todo] = np.asarray(self._fn(todo), dtype=np.uint8)
        out = self._cache[flat]
        return out.reshape(xs.shape) if xs.ndim else out[0]

    @property
    def labels(self) -> np.ndarray:
        return self(np.arange(self.n))

    def materialize(self) -> Predictor:
        return Predictor(self.labels, dict(self.meta))


def labels_at(h, xs) -> np.ndarray:
    """Labels of a hypothesis vector or predictor at the given instances."""
    if isinstance(h, (Predictor, LazyPredictor)):
        return np.asarray(h(np.asarray(xs, dtype=np.int64)))
    return np.asarray(h)[xs]


class Setting(enum.Enum):
    INVARIANTLY_REALIZABLE = "InvariantlyRealizable"
    RELAXED_REALIZABLE = "RelaxedRealizable"
    AGNOSTIC = "Agnostic"


class Problem:
    """An instance space together with a group action and a hypothesis class.

    Caches the orbit partition and per-hypothesis orbit statistics, which
    every restriction and learner needs.
    """

    def __init__(self, hypotheses, group: GroupAction | None = None, space: InstanceSpace | None = None):
        if not isinstance(hypotheses, HypothesisClass):
            hypotheses = HypothesisClass(hypotheses)
        n = hypotheses.n_instances
        self.hypotheses = hypotheses
        self.group = group if group is not None else GroupAction.identity(n)
        self.space = space if space is not None else InstanceSpace.of_size(n)
        if self.group.n != n or len(self.space) != n:
            raise ParamOutOfRange("hypotheses, group and space disagree on N")

    def __repr__(self):
        return f"Problem(N={self.n_instances}, M={len(self.hypotheses)}, orbits={self.partition.n_orbits})"

    @property
    def n_instances(self) -> int:
        return self.hypotheses.n_instances

    @property
    def table(self) -> np.ndarray:
        return self.hypotheses.table

    @property
    def partition(self) -> OrbitPartition:
        return self.group.orbit_partition

    @property
    def orbit_id(self) -> np.ndarray:
        return self.partition.orbit_id

    @cached_property
    def orbit_constant(self) -> np.ndarray:
        """Boolean (M, n_orbits): hypothesis is constant on the orbit."""
        t = self.table
        cols = []
        for members in self.partition.orbits:
            block = t[:, members]
            cols.append((block == block[:, :1]).all(axis=1))
        return np.stack(cols, axis=1)

    @cached_property
    def iota(self) -> np.ndarray:
        """(M, N) invariance indicators: 1 where h splits the orbit of x."""
        return (~self.orbit_constant[:, self.orbit_id]).astype(np.uint8)

    def subproblem(self, rows) -> Problem:
        """Same space and group with a subset of hypotheses."""
        return Problem(self.table[np.asarray(rows)], self.group, self.space)


def augment(sample: Sample, action: GroupAction | Problem) -> Sample:
    """Replace every pair (x, y) by (gx, y) for each distinct image gx."""
    part = action.partition if isinstance(action, Problem) else action.orbit_partition
    xs, ys = [], []
    for x, y in zip(sample.xs, sample.ys):
        members = part.orbits[part.orbit_id[x]]
        xs.append(members)
        ys.append(np.full(len(members), y, dtype=np.uint8))
    if not xs:
        return Sample()
    return Sample(np.concatenate(xs), np.concatenate(ys))


def is_g_invariant_distribution(D: LabeledDistribution, action: GroupAction) -> bool:
    """True iff support points sharing an orbit carry the same label."""
    oid = action.orbit_partition.orbit_id
    seen: dict = {}
    for x, y in zip(D.xs.tolist(), D.ys.tolist()):
        if seen.setdefault(int(oid[x]), y) != y:
            return False
    return True


def err(h, D: LabeledDistribution) -> float:
    return math.fsum(D.ps[labels_at(h, D.xs) != D.ys])


def err_sample(h, S: Sample) -> float:
    if len(S) == 0:
        raise EmptySample("empirical error of an empty sample")
    return float(np.count_nonzero(labels_at(h, S.xs) != S.ys)) / len(S)


def invariance_indicator(h, action: GroupAction) -> np.ndarray:
    """Per-instance 0/1 vector: h is not constant on the orbit of x."""
    h = np.asarray(h)
    part = action.orbit_partition
    out = np.zeros(len(h), dtype=np.uint8)
    for members in part.orbits:
        vals = h[members]
        if vals.min() != vals.max():
            out[members] = 1
    return out


def invariance_parameter(h, D: LabeledDistribution, action: GroupAction) -> float:
    ind = invariance_indicator(h, action)
    return math.fsum(D.ps[ind[D.xs] == 1])


def classify_setting(D: LabeledDistribution, problem: Problem) -> Setting:
    if not is_g_invariant_distribution(D, problem.group):
        raise NotGInvariant("labels differ within an orbit of the support")
    t = problem.table
    zero_err = (t[:, D.xs] == D.ys).all(axis=1)
    if not zero_err.any():
        return Setting.AGNOSTIC
    support_orbits = np.unique(problem.orbit_id[D.xs])
    invariant = problem.orbit_constant[:, support_orbits].all(axis=1)
    if (zero_err & invariant).any():
        return Setting.INVARIANTLY_REALIZABLE
    return Setting.RELAXED_REALIZABLE


def sample(D: LabeledDistribution, m: int, rng) -> Sample:
    """m i.i.d. draws from D."""
    if m < 0:
        raise ParamOutOfRange("m must be nonnegative")
    rng = check_rng(rng)
    idx = rng.choice(len(D), size=m, p=D.ps)
    return Sample(D.xs[idx], D.ys[idx])


# ---------------------------------------------------------------- JSON I/O

def problem_from_dict(doc: dict) -> tuple[Problem, LabeledDistribution | None]:
    """Parse the ``problem.json`` layout."""
    ids = list(doc["instances"])
    space = InstanceSpace(tuple(ids))
    group = GroupAction(len(ids), doc.get("group_generators", []))
    problem = Problem(HypothesisClass(doc["hypotheses"]), group, space)
    D = None
    if doc.get("distribution"):
        atoms = doc["distribution"]
        D = LabeledDistribution(
            np.array([space.index[a["x"]] for a in atoms]),
            np.array([a["y"] for a in atoms]),
            np.array([a["p"] for a in atoms], dtype=float),
        )
    return problem, D


def problem_to_dict(problem: Problem, D: LabeledDistribution | None = None) -> dict:
    ids = list(problem.space.instances)
    doc: dict[str, Any] = {
        "instances": ids,
        "group_generators": [g.tolist() for g in problem.group.generators],
        "hypotheses": problem.table.tolist(),
    }
    if D is not None:
        doc["distribution"] = [
            {"x": ids[x], "y": int(y), "p": float(p)} for x, y, p in zip(D.xs, D.ys, D.ps)
        ]
    return doc


def load_problem(path) -> tuple[Problem, LabeledDistribution | None]:
    with open(path) as fh:
        return problem_from_dict(json.load(fh))


def save_problem(path, problem: Problem, D: LabeledDistribution | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(problem_to_dict(problem, D), fh)
