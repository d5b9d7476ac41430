"""Exact combinatorial dimensions and restricted hypothesis classes.

All searches are exhaustive with pruning, meant for desk-scale problems.
Shattered sets are closed under taking subsets, so every search grows a set
one element at a time and abandons a branch as soon as shattering fails.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import LabeledDistribution, Problem, check_rng
from .exceptions import SearchBudgetExceeded

NODE_BUDGET = 10**7


def _as_table(H) -> np.ndarray:
    if isinstance(H, Problem):
        return H.table
    if hasattr(H, "labelings"):
        return H.labelings
    if hasattr(H, "table"):
        return H.table
    return np.atleast_2d(np.asarray(H, dtype=np.uint8))


def _n_distinct(codes: np.ndarray) -> int:
    return len(np.unique(codes))


def vcdim(H) -> int:
    """VC dimension of a finite label table (rows are labelings)."""
    table = _as_table(H).astype(np.int64)
    m, n = table.shape
    if m == 0:
        return 0
    cap = int(math.floor(math.log2(m)))
    best = 0

    def extend(codes, size, start):
        nonlocal best
        best = max(best, size)
        if best >= cap:
            return
        for j in range(start, n):
            if size + (n - j) <= best:
                return
            new = codes * 2 + table[:, j]
            if _n_distinct(new) == 2 ** (size + 1):
                extend(new, size + 1, j + 1)
                if best >= cap:
                    return

    extend(np.zeros(m, dtype=np.int64), 0, 0)
    return best


def vc_o(problem: Problem) -> int:
    """Largest number of distinct orbits shattered by hypotheses that are
    constant on every chosen orbit.

    With one representative per orbit only orbit-constant hypotheses count,
    so the search runs over orbits and the representative is irrelevant.
    """
    const = problem.orbit_constant
    table = problem.table
    reps = [members[0] for members in problem.partition.orbits]
    vals = table[:, reps].astype(np.int64)
    n_orb = len(reps)
    best = 0

    def extend(rows, codes, size, start):
        nonlocal best
        best = max(best, size)
        for o in range(start, n_orb):
            if size + (n_orb - o) <= best:
                return
            keep = const[rows, o]
            r2 = rows[keep]
            if len(r2) < 2 ** (size + 1):
                continue
            new = codes[keep] * 2 + vals[r2, o]
            if _n_distinct(new) == 2 ** (size + 1):
                extend(r2, new, size + 1, o + 1)

    extend(np.arange(len(table)), np.zeros(len(table), dtype=np.int64), 0, 0)
    return best


def vc_ao(problem: Problem) -> int:
    """Largest shattered set whose points lie in pairwise distinct orbits."""
    table = problem.table.astype(np.int64)
    m = len(table)
    oid = problem.orbit_id
    # instances grouped by orbit; a set uses orbits in increasing order
    order = np.argsort(oid, kind="stable")
    n_orb = problem.partition.n_orbits
    cap = int(math.floor(math.log2(m)))
    best = 0

    def extend(codes, size, start):
        nonlocal best
        best = max(best, size)
        if best >= cap:
            return
        for pos in range(start, len(order)):
            x = order[pos]
            if size + (n_orb - oid[x]) <= best:
                return
            new = codes * 2 + table[:, x]
            if _n_distinct(new) == 2 ** (size + 1):
                # skip the remaining members of this orbit
                nxt = pos + 1
                while nxt < len(order) and oid[order[nxt]] == oid[x]:
                    nxt += 1
                extend(new, size + 1, nxt)
                if best >= cap:
                    return

    extend(np.zeros(m, dtype=np.int64), 0, 0)
    return best


# ------------------------------------------------------------------ dim(H,G)

def _witness_family(U: dict, k: int, counter: list, budget: int):
    """Pick x_f in U[f] for every f in {0,1}^k such that XOR-neighbours
    f, f^e_i agree on coordinate i. Returns {f: sequence} or None.

    Labelings are integer codes (bit i is coordinate i). Variables are
    visited in Gray-code order with forward checking on neighbour domains.
    """
    L = 1 << k
    order = [j ^ (j >> 1) for j in range(L)]
    posof = {f: p for p, f in enumerate(order)}
    domain = {f: np.ones(len(U[f]), dtype=bool) for f in order}
    chosen = {}
    cand = [None] * L
    choice = [-1] * L
    trail = [None] * L
    pos = 0
    while 0 <= pos < L:
        f = order[pos]
        if trail[pos]:
            for nb, old in trail[pos]:
                domain[nb] = old
            trail[pos] = None
        if cand[pos] is None:
            cand[pos] = np.flatnonzero(domain[f])
            choice[pos] = -1
        choice[pos] += 1
        if choice[pos] >= len(cand[pos]):
            cand[pos] = None
            pos -= 1
            continue
        counter[0] += 1
        if counter[0] > budget:
            raise SearchBudgetExceeded("node budget exhausted", lower_bound=None)
        s = U[f][cand[pos][choice[pos]]]
        changes = []
        ok = True
        for i in range(k):
            nb = f ^ (1 << i)
            if posof[nb] <= pos:
                continue
            old = domain[nb]
            new = old & (U[nb][:, i] == s[i])
            if not np.array_equal(new, old):
                changes.append((nb, old))
                domain[nb] = new
            if not new.any():
                ok = False
                break
        trail[pos] = changes
        if ok:
            chosen[f] = s
            pos += 1
    if pos < 0:
        return None
    return {f: chosen[f] for f in order}


def dim_witness(problem: Problem, phi, node_budget: int = NODE_BUDGET, counter=None):
    """Witness family for a tuple of distinct orbits, or None."""
    from .mugame import enumerate_candidates

    k = len(phi)
    cands = enumerate_candidates(problem, phi)
    if len(cands.Pi) < (1 << k):
        return None
    U = {}
    for f, seqs in cands.U.items():
        code = sum(int(b) << i for i, b in enumerate(f))
        U[code] = np.asarray(seqs, dtype=np.int64)
    counter = counter if counter is not None else [0]
    return _witness_family(U, k, counter, node_budget)


def dim_hg(problem: Problem, k_max: int | None = None, node_budget: int = NODE_BUDGET) -> int:
    """Largest k admitting k distinct orbits that H labels in every way,
    together with an XOR-consistent witness family.

    The property is inherited by sub-tuples, so k grows until it fails.
    Raises SearchBudgetExceeded (with ``lower_bound``) when the node budget
    runs out or when ``k_max`` stops the search while larger tuples remain.
    """
    n_orb = problem.partition.n_orbits
    limit = n_orb if k_max is None else min(k_max, n_orb)
    counter = [0]
    best = 0
    for k in range(1, limit + 1):
        found = False
        for phi in itertools.combinations(range(n_orb), k):
            try:
                fam = dim_witness(problem, phi, node_budget, counter)
            except SearchBudgetExceeded as exc:
                raise SearchBudgetExceeded(str(exc), lower_bound=best) from None
            if fam is not None:
                found = True
                break
        if not found:
            return best
        best = k
    if best == limit < n_orb:
        raise SearchBudgetExceeded(f"k_max={k_max} reached", lower_bound=best)
    return best


# ------------------------------------------------------- restricted classes

@dataclass(frozen=True)
class RestrictedClass:
    base_instances: np.ndarray  # distinct instance indices, sorted
    labelings: np.ndarray  # (V, t) unique rows
    kind: str  # "invariant" | "orbit" | "eta" | "raw"
    eta: float | None = None

    @property
    def empty(self) -> bool:
        return len(self.labelings) == 0

    def __len__(self):
        return len(self.labelings)


def _project(problem: Problem, mask: np.ndarray, base: np.ndarray, kind: str, eta=None) -> RestrictedClass:
    rows = problem.table[mask][:, base]
    if len(rows):
        rows = np.unique(rows, axis=0)
    else:
        rows = np.zeros((0, len(base)), dtype=np.uint8)
    return RestrictedClass(base, rows, kind, eta)


def _orbit_consistent_mask(problem: Problem, base: np.ndarray) -> np.ndarray:
    table = problem.table
    mask = np.ones(len(table), dtype=bool)
    oid = problem.orbit_id[base]
    for o in np.unique(oid):
        pts = base[oid == o]
        if len(pts) > 1:
            block = table[:, pts]
            mask &= (block == block[:, :1]).all(axis=1)
    return mask


def restrict_raw(problem: Problem, X) -> RestrictedClass:
    base = np.unique(np.asarray(X, dtype=np.int64))
    return _project(problem, np.ones(len(problem.table), dtype=bool), base, "raw")


def restrict_invariant(problem: Problem, X) -> RestrictedClass:
    """Projections onto X of hypotheses constant on the orbit of every x in X."""
    base = np.unique(np.asarray(X, dtype=np.int64))
    orbs = np.unique(problem.orbit_id[base])
    mask = problem.orbit_constant[:, orbs].all(axis=1)
    return _project(problem, mask, base, "invariant")


def restrict_orbit_consistent(problem: Problem, X) -> RestrictedClass:
    """Projections onto X of hypotheses that agree on points of X sharing an orbit."""
    base = np.unique(np.asarray(X, dtype=np.int64))
    return _project(problem, _orbit_consistent_mask(problem, base), base, "orbit")


def restrict_eta(problem: Problem, X, eta: float) -> RestrictedClass:
    """Like ``restrict_orbit_consistent`` with the extra requirement that the
    fraction of the multiset X lying on orbits split by h is at most eta."""
    X = np.asarray(X, dtype=np.int64)
    base = np.unique(X)
    frac = problem.iota[:, X].mean(axis=1) if len(X) else np.zeros(len(problem.table))
    mask = (frac <= eta + 1e-12) & _orbit_consistent_mask(problem, base)
    return _project(problem, mask, base, "eta", eta)


def restrict(problem: Problem, X, kind: str, eta: float | None = None) -> RestrictedClass:
    if kind == "invariant":
        return restrict_invariant(problem, X)
    if kind == "orbit":
        return restrict_orbit_consistent(problem, X)
    if kind == "eta":
        return restrict_eta(problem, X, eta)
    if kind == "raw":
        return restrict_raw(problem, X)
    raise ValueError(f"unknown restriction kind {kind!r}")


class EtaEstimate(NamedTuple):
    estimate: float
    conditioning_rate: float
    trials: int


def vco_eta_estimate(problem: Problem, D: LabeledDistribution, h_star, m: int, eta: float,
                     trials: int, rng=None) -> EtaEstimate:
    """Monte-Carlo conditional mean of VCdim of the eta-restricted class on
    X ~ D_X^(m+1), given that the target's projection survives."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = check_rng(rng)
    h_star = np.asarray(h_star)
    total, hits = 0.0, 0
    for _ in range(trials):
        X = D.xs[rng.choice(len(D), size=m + 1, p=D.ps)]
        rc = restrict_eta(problem, X, eta)
        target = h_star[rc.base_instances]
        if len(rc) and (rc.labelings == target).all(axis=1).any():
            hits += 1
            total += vcdim(rc.labelings)
    if hits == 0:
        return EtaEstimate(0.0, 0.0, trials)
    return EtaEstimate(total / hits, hits / trials, trials)
