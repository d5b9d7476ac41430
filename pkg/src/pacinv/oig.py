"""One-inclusion graphs, minimum max-loss orientations and the transductive
predictor built on them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import maximum_flow

from .core import Sample
from .dims import RestrictedClass, vcdim
from .exceptions import EmptyClass, FlowInfeasible, NoConsistentVertex, NotRealizable


@dataclass(frozen=True)
class OneInclusionGraph:
    base_instances: np.ndarray  # (t,) instance indices
    vertices: np.ndarray  # (V, t) labelings
    edges: np.ndarray  # (E, 3) rows (a, b, i): a has 0 at i, b has 1

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges[:, :2].ravel(), minlength=self.n_vertices)


@dataclass(frozen=True)
class Orientation:
    winner: np.ndarray  # (E,) vertex index winning each edge
    bound: int

    def losses(self, graph: OneInclusionGraph) -> np.ndarray:
        a, b = graph.edges[:, 0], graph.edges[:, 1]
        loser = np.where(self.winner == a, b, a)
        return np.bincount(loser, minlength=graph.n_vertices)


def build_graph(cls: RestrictedClass) -> OneInclusionGraph:
    if cls.empty:
        raise EmptyClass("cannot build a graph on an empty class")
    V = np.asarray(cls.labelings, dtype=np.int64)
    t = V.shape[1]
    codes = V @ (1 << np.arange(t, dtype=np.int64))
    where = {int(c): k for k, c in enumerate(codes)}
    edges = []
    for i in range(t):
        for a in np.flatnonzero(V[:, i] == 0):
            b = where.get(int(codes[a]) | (1 << i))
            if b is not None:
                edges.append((a, b, i))
    edges = np.array(edges, dtype=np.int64).reshape(-1, 3)
    return OneInclusionGraph(np.asarray(cls.base_instances), cls.labelings, edges)


def _flow_orientation(graph: OneInclusionGraph, k: int):
    """Orientation with every vertex losing at most k edges, or None.

    Network: source -> edge node (cap 1) -> both endpoints (cap 1) ->
    sink (cap k). The endpoint receiving an edge's unit of flow loses it.
    """
    E, V = len(graph.edges), graph.n_vertices
    src, sink = 0, E + V + 1
    e_nodes = np.arange(1, E + 1)
    a_nodes = graph.edges[:, 0] + E + 1
    b_nodes = graph.edges[:, 1] + E + 1
    v_nodes = np.arange(E + 1, E + V + 1)
    rows = np.concatenate([np.zeros(E, dtype=np.int64), e_nodes, e_nodes, v_nodes])
    cols = np.concatenate([e_nodes, a_nodes, b_nodes, np.full(V, sink)])
    caps = np.concatenate([np.ones(3 * E, dtype=np.int32), np.full(V, k, dtype=np.int32)])
    n = E + V + 2
    cap = sparse.csr_matrix((caps, (rows, cols)), shape=(n, n), dtype=np.int32)
    res = maximum_flow(cap, src, sink)
    if res.flow_value < E:
        return None
    flow = res.flow.tocsr()
    to_a = np.asarray(flow[e_nodes, a_nodes]).ravel()
    # the endpoint that absorbs the unit loses; the other one wins
    return np.where(to_a > 0, graph.edges[:, 1], graph.edges[:, 0])


def orient(graph: OneInclusionGraph, check: bool = True) -> Orientation:
    """Orientation minimising the largest number of edges any vertex loses.

    Binary search on the bound with a flow feasibility test. When ``check``
    is set, the achieved bound is compared against the VC dimension of the
    vertex set, which always admits a feasible orientation.
    """
    E, V = len(graph.edges), graph.n_vertices
    if E == 0:
        return Orientation(np.zeros(0, dtype=np.int64), 0)
    lo = -(-E // V)  # some vertex must lose at least the average
    hi = int(graph.degrees().max())
    best = _flow_orientation(graph, hi)
    if best is None:
        raise FlowInfeasible("orientation infeasible at the maximum degree")
    while lo < hi:
        mid = (lo + hi) // 2
        w = _flow_orientation(graph, mid)
        if w is None:
            lo = mid + 1
        else:
            hi, best = mid, w
    orientation = Orientation(best, hi)
    if check:
        d = vcdim(graph.vertices)
        if hi > d:
            raise FlowInfeasible(f"achieved bound {hi} exceeds VC dimension {d}")
    return orientation


def predict_Q(graph: OneInclusionGraph, orientation: Orientation, S: Sample, x: int) -> int:
    """Label of ``x`` given the labeled points ``S`` of the other coordinates."""
    hit = np.flatnonzero(S.xs == x)
    if len(hit):
        return int(S.ys[hit[0]])
    base = list(graph.base_instances)
    col = {inst: j for j, inst in enumerate(base)}
    if x not in col:
        raise ValueError(f"instance {x} is not in the graph's base set")
    V = graph.vertices
    ok = np.ones(len(V), dtype=bool)
    for xi, yi in zip(S.xs.tolist(), S.ys.tolist()):
        if xi not in col:
            raise ValueError(f"sample instance {xi} is not in the graph's base set")
        ok &= V[:, col[xi]] == yi
    consistent = np.flatnonzero(ok)
    j = col[x]
    if len(consistent) == 0:
        raise NoConsistentVertex("no labeling agrees with the sample")
    if len(consistent) == 1:
        return int(V[consistent[0], j])
    if len(consistent) == 2:
        a, b = sorted(consistent)
        if V[a, j] == 1:
            a, b = b, a
        sel = np.flatnonzero((graph.edges[:, 0] == a) & (graph.edges[:, 1] == b) & (graph.edges[:, 2] == j))
        if len(sel) == 1:
            return int(V[orientation.winner[sel[0]], j])
    raise ValueError("sample leaves more than the held-out coordinate free")


def loo_error(cls: RestrictedClass, S: Sample, check: bool = True) -> float:
    """Exact average over held-out positions of the graph predictor's error.

    The predictor only sees the unordered remainder, so averaging over
    permutations reduces to averaging over which element is held out.
    """
    if len(S) == 0:
        return 0.0
    graph = build_graph(cls)
    base = list(graph.base_instances)
    if sorted(set(S.xs.tolist())) != sorted(base):
        raise ValueError("sample must cover exactly the base instances")
    col = {inst: j for j, inst in enumerate(base)}
    truth = np.zeros(len(base), dtype=np.uint8)
    for xi, yi in zip(S.xs.tolist(), S.ys.tolist()):
        truth[col[xi]] = yi
    labels_ok = all(truth[col[xi]] == yi for xi, yi in zip(S.xs.tolist(), S.ys.tolist()))
    if not labels_ok or not (cls.labelings == truth).all(axis=1).any():
        raise NotRealizable("sample is not realized by the class")
    orientation = orient(graph, check=check)
    mistakes = 0
    for pos in range(len(S)):
        rest = np.ones(len(S), dtype=bool)
        rest[pos] = False
        if predict_Q(graph, orientation, S[rest], int(S.xs[pos])) != S.ys[pos]:
            mistakes += 1
    value = mistakes / len(S)
    if check:
        d = vcdim(cls.labelings)
        if value > d / len(S) + 1e-12:
            raise FlowInfeasible(f"leave-one-out error {value} exceeds {d}/{len(S)}")
    return value
