import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pacinv.core import Problem, Sample
from pacinv.dims import RestrictedClass, restrict_raw, vcdim
from pacinv.exceptions import EmptyClass, NoConsistentVertex, NotRealizable
from pacinv.oig import build_graph, loo_error, orient, predict_Q


def raw_class(labelings):
    V = np.unique(np.asarray(labelings, dtype=np.uint8), axis=0)
    return RestrictedClass(np.arange(V.shape[1]), V, "raw")


def random_class(seed, t_max=5, v_max=20):
    r = np.random.default_rng(seed)
    t = int(r.integers(1, t_max + 1))
    codes = r.choice(2 ** t, size=min(int(r.integers(1, v_max + 1)), 2 ** t), replace=False)
    return raw_class([[(c >> i) & 1 for i in range(t)] for c in codes])


def brute_min_bound(graph):
    best = None
    E = len(graph.edges)
    for bits in itertools.product((0, 1), repeat=E):
        loss = np.zeros(graph.n_vertices, dtype=int)
        for (a, b, _), w in zip(graph.edges, bits):
            loss[b if w else a] += 1
        m = int(loss.max())
        best = m if best is None else min(best, m)
    return best or 0


def test_full_cube_edges_and_bound():
    cls = raw_class(list(itertools.product((0, 1), repeat=3)))
    g = build_graph(cls)
    assert len(g.edges) == 12
    o = orient(g)
    assert o.bound == 2
    assert o.losses(g).max() == 2


def test_star_graph_bound_one():
    cls = raw_class([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]])
    g = build_graph(cls)
    assert len(g.edges) == 3
    assert orient(g).bound == 1


def test_empty_class_raises():
    with pytest.raises(EmptyClass):
        build_graph(RestrictedClass(np.arange(2), np.zeros((0, 2), dtype=np.uint8), "raw"))


@given(st.integers(0, 10**6))
def test_orientation_is_minimal_and_within_vcdim(seed):
    cls = random_class(seed, t_max=4, v_max=10)
    g = build_graph(cls)
    o = orient(g)
    assert int(o.losses(g).max(initial=0)) == o.bound
    assert o.bound <= vcdim(cls.labelings)
    if len(g.edges) <= 12:
        assert o.bound == brute_min_bound(g)


@given(st.integers(0, 10**6))
def test_leave_one_out_bound(seed):
    cls = random_class(seed)
    r = np.random.default_rng(seed)
    truth = cls.labelings[r.integers(len(cls.labelings))]
    S = Sample(cls.base_instances.copy(), truth.copy())
    assert loo_error(cls, S) <= vcdim(cls.labelings) / len(S) + 1e-12


@given(st.integers(0, 10**6))
def test_prediction_ignores_sample_order(seed):
    cls = random_class(seed)
    g = build_graph(cls)
    o = orient(g)
    r = np.random.default_rng(seed)
    truth = cls.labelings[r.integers(len(cls.labelings))]
    t = len(truth)
    j = int(r.integers(t))
    rest = np.array([i for i in range(t) if i != j], dtype=np.int64)
    perm = r.permutation(len(rest))
    a = predict_Q(g, o, Sample(rest, truth[rest]), j)
    b = predict_Q(g, o, Sample(rest[perm], truth[rest][perm]), j)
    assert a == b


def test_predict_single_consistent_vertex_and_training_label():
    cls = raw_class([[0, 0], [1, 1]])
    g = build_graph(cls)
    o = orient(g)
    assert predict_Q(g, o, Sample(np.array([0]), np.array([1])), 1) == 1
    assert predict_Q(g, o, Sample(np.array([1]), np.array([0])), 1) == 0
    with pytest.raises(NoConsistentVertex):
        predict_Q(build_graph(raw_class([[0, 0], [0, 1]])), o, Sample(np.array([0]), np.array([1])), 1)


def test_edge_prediction_follows_orientation():
    cls = raw_class([[0, 0], [0, 1]])
    g = build_graph(cls)
    o = orient(g)
    winner = g.vertices[o.winner[0]]
    assert predict_Q(g, o, Sample(np.array([0]), np.array([0])), 1) == winner[1]


def test_loo_rejects_unrealizable_sample():
    cls = raw_class([[0, 0], [1, 1]])
    with pytest.raises(NotRealizable):
        loo_error(cls, Sample(np.array([0, 1]), np.array([0, 1])))


def test_loo_on_problem_projection():
    p = Problem(np.array([[0, 0, 1], [1, 0, 1], [1, 1, 0]]))
    cls = restrict_raw(p, [0, 1, 2])
    S = Sample(np.array([0, 1, 2]), np.array([1, 0, 1]))
    assert loo_error(cls, S) <= vcdim(cls.labelings) / 3
