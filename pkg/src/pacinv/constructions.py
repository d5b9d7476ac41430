"""Generators for the benchmark problems and their target distributions.

Every construction exposes a fixed ``problem`` (when the group does not depend
on the target) and ``sample_target(rng)`` returning a ``Target`` with the
problem, the target labeling and the labeled distribution for one trial.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .core import GroupAction, InstanceSpace, LabeledDistribution, Problem, check_rng
from .exceptions import ParamOutOfRange


class Target(NamedTuple):
    problem: Problem
    h_star: np.ndarray | None
    D: LabeledDistribution


@dataclass
class Construction:
    name: str
    params: dict
    problem: Problem | None
    sampler: Callable = field(repr=False)
    claims: dict = field(default_factory=dict)

    def sample_target(self, rng=None) -> Target:
        return self.sampler(check_rng(rng))


def _perm_from_pairs(n: int, pairs) -> list:
    perm = list(range(n))
    for a, b in pairs:
        perm[a], perm[b] = b, a
    return perm


def _sign_flip(ids: list) -> list:
    """Permutation swapping every id v with -v (ids closed under negation)."""
    pos = {v: i for i, v in enumerate(ids)}
    return [pos[-v] for v in ids]


def example_2_2(variant: str = "zero") -> Construction:
    """X = {-2,-1,1,2} with the sign flip and D uniform on (1,0), (2,0).

    ``variant`` picks the one-hypothesis class: "zero" (constant 0), "neg"
    (1 on negatives) or "pos" (1 on positives).
    """
    ids = [-2, -1, 1, 2]
    rules = {"zero": lambda v: 0, "neg": lambda v: int(v < 0), "pos": lambda v: int(v > 0)}
    if variant not in rules:
        raise ParamOutOfRange(f"unknown variant {variant!r}")
    table = [[rules[variant](v) for v in ids]]
    problem = Problem(table, GroupAction(4, [_sign_flip(ids)]), InstanceSpace(tuple(ids)))
    D = LabeledDistribution.uniform([2, 3], [0, 0])
    return Construction("example_2_2", {"variant": variant}, problem,
                        lambda rng: Target(problem, None, D))


def example_3_2(d: int) -> Construction:
    """X = {+-1..+-2d}, sign flip, H = indicators of d-subsets of the positives."""
    if not 1 <= d <= 12:
        raise ParamOutOfRange("d must lie in [1, 12]")
    ids = [s * i for i in range(1, 2 * d + 1) for s in (1, -1)]
    pos = {v: j for j, v in enumerate(ids)}
    rows = []
    for A in itertools.combinations(range(1, 2 * d + 1), d):
        row = np.zeros(len(ids), dtype=np.uint8)
        row[[pos[a] for a in A]] = 1
        rows.append(row)
    problem = Problem(np.array(rows), GroupAction(len(ids), [_sign_flip(ids)]), InstanceSpace(tuple(ids)))
    positives = np.array([pos[i] for i in range(1, 2 * d + 1)])

    def sampler(rng):
        h = problem.table[rng.integers(len(problem.table))]
        return Target(problem, h, LabeledDistribution.uniform(positives, h[positives]))

    return Construction("example_3_2", {"d": d}, problem, sampler,
                        {"vcdim": d, "vc_ao": d, "vc_o": 0})


def example_3_4(n: int = 4, k: int = 2, variant: str = "full") -> Construction:
    """k images, each with n rotated copies forming one cyclic orbit.

    "full" is the class of all labelings. "prime" keeps the labelings that
    give each upright copy (rotation 0) and its upside-down copy (rotation
    n/2) different labels.
    """
    if n * k > 14 or n < 2 or k < 1:
        raise ParamOutOfRange("need n >= 2, k >= 1 and n*k <= 14")
    N = n * k
    ids = [f"img{j}_rot{r}" for j in range(k) for r in range(n)]
    rot = [j * n + (r + 1) % n for j in range(k) for r in range(n)]
    table = np.array(list(itertools.product((0, 1), repeat=N)), dtype=np.uint8)
    claims = {"vcdim": N, "vc_o": k, "vc_ao": k}
    if variant == "prime":
        if n % 2:
            raise ParamOutOfRange("the upside-down copy needs n even")
        keep = np.ones(len(table), dtype=bool)
        for j in range(k):
            keep &= table[:, j * n] != table[:, j * n + n // 2]
        table = table[keep]
        claims = {"vcdim": (n - 1) * k, "vc_o": 0, "vc_ao": k}
    elif variant != "full":
        raise ParamOutOfRange(f"unknown variant {variant!r}")
    problem = Problem(table, GroupAction(N, [rot]), InstanceSpace(tuple(ids)))

    def sampler(rng):
        h = problem.table[rng.integers(len(problem.table))]
        upright = np.arange(0, N, n)
        return Target(problem, h, LabeledDistribution.uniform(upright, h[upright]))

    return Construction("example_3_4", {"n": n, "k": k, "variant": variant}, problem, sampler, claims)


def theorem_4_2(d: int, eps: float) -> Construction:
    """X = {0, +-1..+-2d} with the sign flip on nonzero points.

    h_u labels 0, all negatives and the points of u as 1 and the rest of
    [2d] as 0, for every d-subset u. The target u* is uniform; D puts
    1 - 16 eps on 0 and 16 eps / d on each point of u*.
    """
    if not 1 <= d <= 12:
        raise ParamOutOfRange("d must lie in [1, 12]")
    if not 0 < 16 * eps <= 1:
        raise ParamOutOfRange("eps must lie in (0, 1/16]")
    ids = [0] + [s * i for i in range(1, 2 * d + 1) for s in (1, -1)]
    pos = {v: j for j, v in enumerate(ids)}
    rows = []
    for u in itertools.combinations(range(1, 2 * d + 1), d):
        row = np.ones(len(ids), dtype=np.uint8)
        row[[pos[i] for i in range(1, 2 * d + 1) if i not in u]] = 0
        rows.append(row)
    problem = Problem(np.array(rows), GroupAction(len(ids), [_sign_flip(ids)]), InstanceSpace(tuple(ids)))
    M = len(problem.table)

    def sampler(rng):
        h = problem.table[rng.integers(M)]
        support = [0] + [pos[i] for i in range(1, 2 * d + 1) if h[pos[i]] == 1]
        ps = [1 - 16 * eps] + [16 * eps / d] * d
        return Target(problem, h, LabeledDistribution(np.array(support), np.ones(d + 1), np.array(ps)))

    return Construction("theorem_4_2", {"d": d, "eps": eps}, problem, sampler, {"vc_ao": d, "vc_o": 0})


def theorem_4_3(d: int, eps: float = 1 / 16) -> Construction:
    """d points shattered by the class of all labelings; per trial a random
    A* inside the first d-1 points defines the group of permutations
    preserving A* and its complement, with target the indicator of A*.
    D puts 1 - 16 eps on the last point and spreads 16 eps over the rest.
    """
    if not 2 <= d <= 12:
        raise ParamOutOfRange("d must lie in [2, 12]")
    if not 0 < 16 * eps <= 1:
        raise ParamOutOfRange("eps must lie in (0, 1/16]")
    table = np.array(list(itertools.product((0, 1), repeat=d)), dtype=np.uint8)
    hyps = table  # shared across trials
    space = InstanceSpace(tuple(f"x{i}" for i in range(1, d + 1)))
    base = Problem(hyps, GroupAction.identity(d), space)

    def group_for(A):
        gens = []
        for block in (sorted(A), sorted(set(range(d - 1)) - set(A))):
            for a, b in zip(block, block[1:]):
                gens.append(_perm_from_pairs(d, [(a, b)]))
        return GroupAction(d, gens)

    def sampler(rng):
        A = [i for i in range(d - 1) if rng.random() < 0.5]
        problem = Problem(base.hypotheses, group_for(A), space)
        h = np.zeros(d, dtype=np.uint8)
        h[A] = 1
        ps = np.full(d, 16 * eps / (d - 1))
        ps[d - 1] = 1 - 16 * eps
        return Target(problem, h, LabeledDistribution(np.arange(d), h, ps))

    return Construction("theorem_4_3", {"d": d, "eps": eps}, None, sampler, {"vcdim": d})


def example_5_3(d: int, target: str = "random") -> Construction:
    """X = {+-1} x {e_1..e_2d}; the group flips the sign of the first
    coordinate; H = {x_1 > 0, x_1 <= 0}.

    With ``target="random"`` each trial draws f uniformly from {0,1}^(2d)
    and puts uniform mass on the witness sequence x_f with labels f: the
    point of orbit i is (2 f_i - 1, e_i) when f has odd weight and
    (1 - 2 f_i, e_i) otherwise. ``target="natural"`` fixes D uniform over
    the points (1, e_i) labeled 1.
    """
    if not 1 <= d <= 12:
        raise ParamOutOfRange("d must lie in [1, 12]")
    k = 2 * d
    ids = [f"({s:+d},e{i})" for i in range(1, k + 1) for s in (1, -1)]
    flip = _perm_from_pairs(2 * k, [(2 * i, 2 * i + 1) for i in range(k)])
    h1 = np.array([1, 0] * k, dtype=np.uint8)
    problem = Problem(np.stack([h1, 1 - h1]), GroupAction(2 * k, [flip]), InstanceSpace(tuple(ids)))

    def point(i, sign):
        return 2 * i + (0 if sign > 0 else 1)

    def sampler(rng):
        if target == "natural":
            xs = np.array([point(i, 1) for i in range(k)])
            return Target(problem, h1, LabeledDistribution.uniform(xs, np.ones(k)))
        f = rng.integers(0, 2, size=k)
        odd = int(f.sum()) % 2 == 1
        xs = np.array([point(i, (2 * f[i] - 1) if odd else (1 - 2 * f[i])) for i in range(k)])
        h = h1 if odd else 1 - h1
        return Target(problem, h, LabeledDistribution.uniform(xs, f))

    if target not in ("random", "natural"):
        raise ParamOutOfRange(f"unknown target {target!r}")
    return Construction("example_5_3", {"d": d, "target": target}, problem, sampler,
                        {"vcdim": 1, "dim_hg": k})


def agnostic_set_shatter(d: int, size: int = 8, majority: int | None = None) -> Construction:
    """d blocks of ``size`` points, each point paired with a mirror copy by
    the group; H labels block i by y_i for every y in {0,1}^d and mirrors 0.

    Per trial, block i gets a random majority label b_i carried by
    ``majority`` of its points (the rest get 1 - b_i); D is uniform over
    all block points, so no hypothesis is error free.
    """
    if not 1 <= d <= 10 or size < 2:
        raise ParamOutOfRange("need 1 <= d <= 10 and size >= 2")
    majority = size // 2 + 1 if majority is None else majority
    if not size // 2 < majority < size:
        raise ParamOutOfRange("majority must exceed half the block and leave a minority")
    n = d * size
    ids = [f"A{i}_{j}" for i in range(d) for j in range(size)] + \
          [f"A{i}_{j}'" for i in range(d) for j in range(size)]
    mirror = _perm_from_pairs(2 * n, [(p, n + p) for p in range(n)])
    rows = []
    for y in itertools.product((0, 1), repeat=d):
        rows.append(np.concatenate([np.repeat(y, size), np.zeros(n, dtype=int)]))
    problem = Problem(np.array(rows), GroupAction(2 * n, [mirror]), InstanceSpace(tuple(ids)))

    def sampler(rng):
        b = rng.integers(0, 2, size=d)
        ys = np.empty(n, dtype=np.uint8)
        for i in range(d):
            block = np.full(size, b[i])
            block[majority:] = 1 - b[i]
            ys[i * size:(i + 1) * size] = block
        h = np.concatenate([np.repeat(b, size), np.zeros(n, dtype=int)])
        return Target(problem, h.astype(np.uint8), LabeledDistribution.uniform(np.arange(n), ys))

    return Construction("agnostic_set_shatter", {"d": d, "size": size, "majority": majority},
                        problem, sampler, {"vc_ao": d})


def random_problem(rng, n_instances: int = 6, n_hypotheses: int = 12, n_generators: int = 1,
                   max_cycle: int = 3) -> Problem:
    """Random class and a group generated by random disjoint short cycles."""
    rng = check_rng(rng)
    gens = []
    for _ in range(n_generators):
        perm = np.arange(n_instances)
        pts = rng.permutation(n_instances)
        pos = 0
        while pos < n_instances:
            L = int(rng.integers(1, max_cycle + 1))
            cyc = pts[pos:pos + L]
            if len(cyc) > 1:
                perm[cyc] = np.roll(cyc, -1)
            pos += L
        gens.append(perm)
    table = rng.integers(0, 2, size=(n_hypotheses, n_instances))
    return Problem(table, GroupAction(n_instances, gens))


def invariant_target(problem: Problem, rng, support_size: int | None = None,
                     realizable: bool = True) -> Target:
    """G-invariant distribution on random support points.

    Labels come from a random hypothesis; support points sharing an orbit
    with a different label are dropped. With ``realizable=False`` one label
    is flipped when possible so that no hypothesis is error free.
    """
    rng = check_rng(rng)
    N = problem.n_instances
    h = problem.table[rng.integers(len(problem.table))].copy()
    size = support_size or int(rng.integers(1, N + 1))
    pts = rng.choice(N, size=min(size, N), replace=False)
    keep, seen = [], {}
    for x in pts:
        o = int(problem.orbit_id[x])
        if seen.setdefault(o, int(h[x])) == h[x]:
            keep.append(int(x))
    xs = np.array(sorted(keep))
    ys = h[xs].copy()
    if not realizable:
        # flip orbit labels until no hypothesis fits
        for _ in range(4 * N):
            if not (problem.table[:, xs] == ys).all(axis=1).any():
                break
            o = problem.orbit_id[xs[rng.integers(len(xs))]]
            ys[problem.orbit_id[xs] == o] ^= 1
    ps = rng.random(len(xs)) + 0.1
    return Target(problem, h if realizable else None, LabeledDistribution(xs, ys, ps / ps.sum()))


REGISTRY = {
    "example_2_2": example_2_2,
    "example_3_2": example_3_2,
    "example_3_4": example_3_4,
    "theorem_4_2": theorem_4_2,
    "theorem_4_3": theorem_4_3,
    "example_5_3": example_5_3,
    "agnostic_set_shatter": agnostic_set_shatter,
}


def generate(name: str, params: dict | None = None, verify: bool = False) -> Construction:
    """Build a construction by name; ``verify`` recomputes the claimed
    dimension values (only sensible for small parameters)."""
    if name not in REGISTRY:
        raise ParamOutOfRange(f"unknown construction {name!r}")
    c = REGISTRY[name](**(params or {}))
    if verify and c.problem is not None:
        from . import dims

        measures = {"vcdim": lambda p: dims.vcdim(p), "vc_o": dims.vc_o, "vc_ao": dims.vc_ao,
                    "dim_hg": dims.dim_hg}
        for key, want in c.claims.items():
            got = measures[key](c.problem)
            if got != want:
                raise AssertionError(f"{name}: {key} = {got}, expected {want}")
    return c
