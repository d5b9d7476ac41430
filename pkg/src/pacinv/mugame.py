"""Augmented-orbit graphs and their zero-sum game value.

For a multiset of orbits ``phi`` the candidates are pairs ``(f, x)``: an
instance sequence ``x`` with ``x_i`` in orbit ``phi_i`` and a labeling ``f``
that some hypothesis assigns to ``x``, such that two chosen points in the
same orbit never receive different labels. Vertices of the graph are pairs
``(f, z)`` with ``z`` a coordinate of a candidate sequence for ``f``; an edge
joins ``(f, z)`` and ``(g, z)`` when ``f`` and ``g`` differ only at the
coordinate holding ``z`` and that orbit occurs once in ``phi``.

The game: a randomized orientation ``w`` charges ``w(e, f)`` to ``f`` on each
edge, with ``w(e, f) + w(e, g) = 1``. A row ``(f, x)`` pays the sum of its
charges over the edges at ``(f, x_1), ..., (f, x_t)``. The value is
``min_w max_rows``, solved as a linear program; the dual gives the
maximizing distribution over rows.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .core import Problem
from .exceptions import NumericalFailure, SearchBudgetExceeded, SizeLimitExceeded

SEQUENCE_CAP = 10**6
ROW_CAP = 10**5


@dataclass(frozen=True)
class LabelingCandidates:
    phi: tuple  # orbit indices, repeats allowed
    Pi: np.ndarray  # (n_labelings, t) realizable labelings, sorted by code
    U: dict  # labeling tuple -> (n, t) array of witness sequences
    B_f: np.ndarray  # (|B|, t) labeling of each row
    B_x: np.ndarray  # (|B|, t) sequence of each row

    def __len__(self):
        return len(self.B_f)


def enumerate_candidates(problem: Problem, phi, cap: int = SEQUENCE_CAP, row_cap: int = ROW_CAP) -> LabelingCandidates:
    phi = tuple(int(o) for o in phi)
    t = len(phi)
    members = [problem.partition.orbits[o] for o in phi]
    n_seq = math.prod(len(m) for m in members)
    if n_seq > cap:
        raise SizeLimitExceeded(f"{n_seq} instance sequences exceed cap {cap}")
    if t == 0:
        empty = np.zeros((1, 0), dtype=np.int64)
        return LabelingCandidates(phi, empty.astype(np.uint8), {(): empty}, empty.astype(np.uint8), empty)
    seqs = np.array(list(itertools.product(*members)), dtype=np.int64).reshape(n_seq, t)
    same = [(i, j) for i in range(t) for j in range(i + 1, t) if phi[i] == phi[j]]
    weights = (1 << np.arange(t, dtype=np.int64))
    table = problem.table
    chunk = max(1, 10**7 // max(1, n_seq * t))
    keys = []
    for start in range(0, len(table), chunk):
        lab = table[start:start + chunk][:, seqs]  # (m, n_seq, t)
        ok = np.ones(lab.shape[:2], dtype=bool)
        for i, j in same:
            ok &= lab[:, :, i] == lab[:, :, j]
        codes = lab.astype(np.int64) @ weights  # (m, n_seq)
        seq_idx = np.broadcast_to(np.arange(n_seq), codes.shape)
        keys.append(np.unique(codes[ok] * n_seq + seq_idx[ok]))
    keys = np.unique(np.concatenate(keys)) if keys else np.zeros(0, dtype=np.int64)
    if len(keys) > row_cap:
        raise SizeLimitExceeded(f"{len(keys)} candidate pairs exceed cap {row_cap}")
    f_codes, s_idx = np.divmod(keys, n_seq)
    bits = ((f_codes[:, None] >> np.arange(t)) & 1).astype(np.uint8)
    B_x = seqs[s_idx]
    U: dict = {}
    for f, x in zip(map(tuple, bits.tolist()), B_x):
        U.setdefault(f, []).append(x)
    U = {f: np.array(v, dtype=np.int64) for f, v in U.items()}
    uniq_codes = np.unique(f_codes)
    Pi = ((uniq_codes[:, None] >> np.arange(t)) & 1).astype(np.uint8)
    return LabelingCandidates(phi, Pi, U, bits, B_x)


@dataclass(frozen=True)
class AugmentedOrbitGraph:
    phi: tuple
    vertices: frozenset  # {(f tuple, instance)}
    edges: list  # (f_lo tuple, f_hi tuple, instance, coordinate); f_lo has 0 there

    def edge_index(self) -> dict:
        return {(e[0], e[3], e[2]): k for k, e in enumerate(self.edges)}


def build_augmented_graph(cands: LabelingCandidates) -> AugmentedOrbitGraph:
    phi = cands.phi
    t = len(phi)
    mult = Counter(phi)
    vertices = set()
    for f, x in zip(map(tuple, cands.B_f.tolist()), cands.B_x.tolist()):
        for z in x:
            vertices.add((f, z))
    pi = set(map(tuple, cands.Pi.tolist()))
    edges = []
    for f in sorted(pi):
        for i in range(t):
            if mult[phi[i]] != 1 or f[i] != 0:
                continue
            g = f[:i] + (1,) + f[i + 1:]
            if g not in pi:
                continue
            zs = sorted({int(x[i]) for x in cands.U[f]} & {int(x[i]) for x in cands.U[g]})
            for z in zs:
                edges.append((f, g, z, i))
    return AugmentedOrbitGraph(phi, frozenset(vertices), edges)


@dataclass
class MuGame:
    """Loss matrix of the game: row loss = c + A @ w, w in [0,1]^E, where
    w[e] is the charge to the endpoint labeling the shared point 0."""

    cands: LabelingCandidates
    graph: AugmentedOrbitGraph
    A: sparse.csr_matrix
    c: np.ndarray

    def row_losses(self, w) -> np.ndarray:
        return self.c + self.A @ np.asarray(w, dtype=float)

    def value_at(self, w) -> float:
        if len(self.c) == 0:
            return 0.0
        return float(self.row_losses(w).max())


def build_game(problem: Problem, phi) -> MuGame:
    cands = enumerate_candidates(problem, phi)
    graph = build_augmented_graph(cands)
    index = graph.edge_index()
    rows, cols, vals = [], [], []
    c = np.zeros(len(cands))
    t = len(phi)
    for r, (f, x) in enumerate(zip(map(tuple, cands.B_f.tolist()), cands.B_x.tolist())):
        for i in range(t):
            lo = f[:i] + (0,) + f[i + 1:]
            e = index.get((lo, i, x[i]))
            if e is None:
                continue
            rows.append(r)
            cols.append(e)
            if f[i] == 0:
                vals.append(1.0)
            else:
                vals.append(-1.0)
                c[r] += 1.0
    A = sparse.csr_matrix((vals, (rows, cols)), shape=(len(cands), len(graph.edges)))
    return MuGame(cands, graph, A, c)


def mu_given_P(game: MuGame, P) -> float:
    """min over w of the expected row loss under the row distribution P."""
    P = np.asarray(P, dtype=float)
    lin = game.A.T @ P
    return float(P @ game.c + np.minimum(lin, 0.0).sum())


class GameSolution(NamedTuple):
    mu: float
    w_star: np.ndarray  # (E, 2): charge to (f_lo, f_hi) on each edge
    P_star: np.ndarray  # distribution over the rows of B
    duality_gap: float
    game: MuGame


def solve_mu(problem: Problem, phi, tolerance: float = 1e-6) -> GameSolution:
    game = build_game(problem, phi)
    n_rows, n_edges = game.A.shape
    if n_edges == 0:
        P = np.zeros(n_rows)
        if n_rows:
            P[0] = 1.0
        return GameSolution(0.0, np.zeros((0, 2)), P, 0.0, game)
    # variables: w_1..w_E, v ; minimize v s.t. c + A w <= v
    obj = np.zeros(n_edges + 1)
    obj[-1] = 1.0
    A_ub = sparse.hstack([game.A, -sparse.csr_matrix(np.ones((n_rows, 1)))]).tocsr()
    bounds = [(0.0, 1.0)] * n_edges + [(None, None)]
    res = linprog(obj, A_ub=A_ub, b_ub=-game.c, bounds=bounds, method="highs")
    if res.status != 0:
        raise NumericalFailure(f"LP solver failed: {res.message}")
    w = np.clip(res.x[:n_edges], 0.0, 1.0)
    primal = game.value_at(w)
    P = np.clip(-np.asarray(res.ineqlin.marginals), 0.0, None)
    if P.sum() <= 0:
        raise NumericalFailure("LP returned no dual weights")
    P = P / P.sum()
    dual = mu_given_P(game, P)
    gap = max(0.0, primal - dual)
    if gap > tolerance:
        raise NumericalFailure(f"duality gap {gap:.3g} exceeds tolerance {tolerance}")
    w_star = np.column_stack([w, 1.0 - w])
    return GameSolution(primal, w_star, P, gap, game)


class TupleValue(NamedTuple):
    value: float
    phi: tuple


def mu_over_tuples(problem: Problem, t: int, budget: int = 10**4, tolerance: float = 1e-6) -> TupleValue:
    """Maximum game value over all multisets of t orbits.

    Raises SearchBudgetExceeded (with the best value so far as
    ``lower_bound``) when more than ``budget`` multisets exist or a
    candidate set exceeds the enumeration caps.
    """
    n_orb = problem.partition.n_orbits
    best = TupleValue(0.0, ())
    for count, phi in enumerate(itertools.combinations_with_replacement(range(n_orb), t)):
        if count >= budget:
            raise SearchBudgetExceeded("orbit multiset budget exhausted", lower_bound=best)
        try:
            sol = solve_mu(problem, phi, tolerance)
        except SizeLimitExceeded:
            raise SearchBudgetExceeded(f"candidate caps exceeded at {phi}", lower_bound=best) from None
        if sol.mu > best.value + 1e-12 or not best.phi:
            best = TupleValue(sol.mu, phi)
    return best
