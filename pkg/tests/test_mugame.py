import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import grid_game_value
from pacinv.constructions import example_5_3, random_problem
from pacinv.core import GroupAction, Problem
from pacinv.exceptions import SearchBudgetExceeded
from pacinv.mugame import (
    build_augmented_graph, build_game, enumerate_candidates, mu_given_P, mu_over_tuples, solve_mu,
)


def random_game_problem(seed):
    r = np.random.default_rng(seed)
    p = random_problem(r, int(r.integers(2, 6)), int(r.integers(1, 10)), 1, 3)
    t = int(r.integers(1, 4))
    phi = tuple(sorted(r.integers(0, p.partition.n_orbits, size=t).tolist()))
    return p, phi


def test_candidates_respect_orbits():
    p = Problem([[0, 1, 1], [1, 0, 0]], GroupAction(3, [[1, 0, 2]]))
    cands = enumerate_candidates(p, (0, 1))
    for f, xs in zip(cands.B_f.tolist(), cands.B_x.tolist()):
        assert p.orbit_id[xs[0]] == 0 and p.orbit_id[xs[1]] == 1
        assert any(list(h[xs]) == f for h in p.table)


def test_repeated_orbit_coordinates_share_labels():
    p = Problem([[0, 1], [1, 1]], GroupAction(2, [[1, 0]]))
    cands = enumerate_candidates(p, (0, 0))
    for f, xs in zip(cands.B_f.tolist(), cands.B_x.tolist()):
        assert f[0] == f[1] or xs[0] != xs[1]


def test_edges_join_labelings_differing_at_one_coordinate():
    p = example_5_3(1).problem
    g = build_augmented_graph(enumerate_candidates(p, (0, 1)))
    assert g.edges
    for f_lo, f_hi, z, i in g.edges:
        assert f_lo[i] == 0 and f_hi[i] == 1
        assert sum(a != b for a, b in zip(f_lo, f_hi)) == 1


@pytest.mark.parametrize("d", [1, 2, 3])
def test_parity_example_value(d):
    p = example_5_3(d).problem
    sol = solve_mu(p, tuple(range(2 * d)))
    assert sol.mu >= d - 1e-6
    assert sol.duality_gap <= 1e-6
    uniform = np.full(len(sol.game.c), 1 / len(sol.game.c))
    assert mu_given_P(sol.game, uniform) == pytest.approx(d)


@given(st.integers(0, 10**6))
def test_weak_duality_and_certificate(seed):
    p, phi = random_game_problem(seed)
    sol = solve_mu(p, phi)
    g = sol.game
    r = np.random.default_rng(seed)
    for _ in range(5):
        if g.A.shape[1]:
            assert g.value_at(r.random(g.A.shape[1])) >= sol.mu - 1e-9
        P = r.random(len(g.c))
        assert mu_given_P(g, P / P.sum()) <= sol.mu + 1e-9
    assert mu_given_P(g, sol.P_star) == pytest.approx(sol.mu, abs=1e-6)
    assert np.allclose(sol.w_star.sum(axis=1), 1.0)


@given(st.integers(0, 10**6))
def test_matches_grid_oracle(seed):
    p, phi = random_game_problem(seed)
    g = build_game(p, phi)
    if len(g.c) > 12 or g.A.shape[1] > 12:
        return
    assert abs(solve_mu(p, phi).mu - grid_game_value(g.A, g.c)) <= 1 / 32


def test_mu_over_tuples_and_budget():
    p = example_5_3(1).problem
    best = mu_over_tuples(p, 2)
    assert best.value >= 1 - 1e-6
    with pytest.raises(SearchBudgetExceeded) as info:
        mu_over_tuples(p, 2, budget=1)
    assert info.value.lower_bound.phi == (0, 0)


def test_no_edges_value_zero():
    p = Problem([[0, 0]], GroupAction(2, [[1, 0]]))
    assert solve_mu(p, (0,)).mu == 0.0
