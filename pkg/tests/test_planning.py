import re

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lookahead_rl.distributions import (JointFiniteDistribution,
                                        categorical_marginal, point_marginal)
from lookahead_rl.envs import make_random_mdp
from lookahead_rl.mdp import TabularLookaheadMdp
from lookahead_rl.oracles import (best_markov_values, oracle_extended_reward,
                                  oracle_extended_transition,
                                  rank_hit_by_enumeration)
from lookahead_rl.planning import (CapacityError, ListPolicy, RankedList,
                                   build_ranked_list,
                                   evaluate_lookahead_policy,
                                   plan_no_lookahead, plan_reward_lookahead,
                                   plan_transition_lookahead,
                                   rank_hit_distribution)


def test_ranked_list_order_and_ties():
    ranked = build_ranked_list([[1.0, 0.5], [4.0, 3.0]])
    pairs = list(zip(ranked.next_states, ranked.actions))
    assert pairs == [(1, 0), (1, 1), (0, 0), (0, 1)]
    np.testing.assert_allclose(ranked.scores, [4.0, 3.0, 1.0, 0.5])
    # all-equal scores fall back to (state, action) ascending
    tied = build_ranked_list(np.zeros((2, 2)))
    assert list(zip(tied.next_states, tied.actions)) == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_rank_hit_worked_example():
    ranked = build_ranked_list([[1.0, 0.5], [4.0, 3.0]])
    marg = np.array([[0.3, 0.7], [0.6, 0.4]])
    mu = rank_hit_distribution(ranked, marg)
    np.testing.assert_allclose(mu, [0.7, 0.12, 0.18, 0.0], atol=1e-12)
    ref = rank_hit_by_enumeration(ranked, marg)
    np.testing.assert_allclose(mu, ref, atol=1e-12)


@st.composite
def _marginals_and_scores(draw):
    A = draw(st.integers(2, 3))
    S = draw(st.integers(2, 4))
    raw = draw(arrays(np.float64, (A, S), elements=st.floats(0.01, 1.0)))
    scores = draw(arrays(np.float64, (S, A), elements=st.floats(0.0, 5.0)))
    return raw / raw.sum(axis=1, keepdims=True), scores


@given(_marginals_and_scores())
@settings(max_examples=80, deadline=None)
def test_rank_hit_matches_enumeration(case):
    marg, scores = case
    ranked = build_ranked_list(scores)
    mu = rank_hit_distribution(ranked, marg)
    np.testing.assert_allclose(mu, rank_hit_by_enumeration(ranked, marg),
                               atol=1e-12)
    assert abs(mu.sum() - 1.0) < 1e-12


def test_rank_hit_rejects_excess_mass():
    ranked = build_ranked_list(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        rank_hit_distribution(ranked, np.array([[0.9, 0.9], [0.5, 0.5]]))


def test_no_lookahead_matches_policy_enumeration():
    mdp = make_random_mdp(2, 2, 2, seed=3)
    table, policy = plan_no_lookahead(mdp)
    np.testing.assert_allclose(table.values[0], best_markov_values(mdp),
                               atol=1e-12)
    evaluated = evaluate_lookahead_policy(mdp, policy)
    np.testing.assert_allclose(evaluated.values, table.values, atol=1e-12)


def test_reward_lookahead_hand_instance():
    # one state, one step: reward joint 0.5 -> (1, 0), 0.5 -> (0, 0.5).
    # Seeing the vector earns 0.5*1 + 0.5*0.5 = 0.75; acting blind only 0.5.
    rewards = [[JointFiniteDistribution.explicit(
        [0.5, 0.5], [[1.0, 0.0], [0.0, 0.5]], "reward")]]
    transitions = [[JointFiniteDistribution.product(
        [point_marginal(0)] * 2, "state", num_values=1)]]
    mdp = TabularLookaheadMdp(1, 2, 1, rewards, transitions)
    table, policy = plan_reward_lookahead(mdp)
    assert table.values[0, 0] == pytest.approx(0.75, abs=1e-12)
    assert plan_no_lookahead(mdp)[0].values[0, 0] == pytest.approx(0.5, abs=1e-12)
    assert evaluate_lookahead_policy(mdp, policy).values[0, 0] == pytest.approx(
        0.75, abs=1e-12)


def test_transition_lookahead_hand_instance():
    # two steps: from state 0 both actions move uniformly to {0, 1}; state 1
    # pays 1 at the second step.  Seeing the next-state vector first gives
    # P(some action reaches 1) = 3/4 against 1/2 blind.
    uniform = categorical_marginal([0.5, 0.5])
    zero = JointFiniteDistribution.product([point_marginal(0.0)] * 2, "reward")
    one = JointFiniteDistribution.product([point_marginal(1.0)] * 2, "reward")
    stay = JointFiniteDistribution.product(
        [point_marginal(0)] * 2, "state", num_values=2)
    rewards = [[zero, zero], [zero, one]]
    transitions = [[JointFiniteDistribution.product(
        [uniform, uniform], "state", num_values=2), stay], [stay, stay]]
    mdp = TabularLookaheadMdp(2, 2, 2, rewards, transitions)
    for method in ("exact-list", "exact-joint"):
        table, policy = plan_transition_lookahead(mdp, method=method)
        assert table.values[0, 0] == pytest.approx(0.75, abs=1e-12)
    assert plan_no_lookahead(mdp)[0].values[0, 0] == pytest.approx(0.5, abs=1e-12)
    np.testing.assert_allclose(evaluate_lookahead_policy(mdp, policy).values,
                               table.values, atol=1e-12)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_planners_agree_with_extended_oracles_independent(seed):
    mdp = make_random_mdp(3, 3, 3, seed=seed)
    rt, rpol = plan_reward_lookahead(mdp)
    np.testing.assert_allclose(rt.values, oracle_extended_reward(mdp).values,
                               atol=1e-12)
    np.testing.assert_allclose(evaluate_lookahead_policy(mdp, rpol).values,
                               rt.values, atol=1e-12)
    tl, tpol = plan_transition_lookahead(mdp, method="exact-list")
    tj, _ = plan_transition_lookahead(mdp, method="exact-joint")
    np.testing.assert_allclose(tl.values, tj.values, atol=1e-12)
    np.testing.assert_allclose(tl.values,
                               oracle_extended_transition(mdp).values, atol=1e-12)
    np.testing.assert_allclose(evaluate_lookahead_policy(mdp, tpol).values,
                               tl.values, atol=1e-12)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_correlated_joint_matches_oracle(seed):
    mdp = make_random_mdp(3, 2, 3, seed=seed, independent=False)
    tj, tpol = plan_transition_lookahead(mdp, method="exact-joint")
    np.testing.assert_allclose(tj.values,
                               oracle_extended_transition(mdp).values, atol=1e-12)
    np.testing.assert_allclose(evaluate_lookahead_policy(mdp, tpol).values,
                               tj.values, atol=1e-12)
    with pytest.raises(ValueError):
        plan_transition_lookahead(mdp, method="exact-list")


def test_sample_method_converges():
    mdp = make_random_mdp(3, 3, 3, seed=7)
    exact = plan_reward_lookahead(mdp)[0].values
    err = {}
    for n in (100, 10000):
        got = plan_reward_lookahead(mdp, method="sample", samples=n, seed=1)[0].values
        err[n] = np.abs(got - exact).mean()
    assert err[100] / err[10000] >= 3.0
    t_exact = plan_transition_lookahead(mdp)[0].values
    t_got = plan_transition_lookahead(mdp, method="sample", samples=20000,
                                      seed=1)[0].values
    assert np.abs(t_got - t_exact).mean() < 0.02


def test_sample_method_argument_validation():
    mdp = make_random_mdp(2, 2, 2, seed=0)
    with pytest.raises(ValueError):
        plan_reward_lookahead(mdp, method="sample")
    with pytest.raises(ValueError):
        plan_reward_lookahead(mdp, method="montecarlo")
    with pytest.raises(ValueError):
        plan_transition_lookahead(mdp, method="guess")


def test_capacity_error_names_the_cell():
    mdp = make_random_mdp(2, 3, 2, seed=4)  # Bernoulli rewards: support 8
    with pytest.raises(CapacityError, match=re.escape("(h=1, s=")):
        plan_reward_lookahead(mdp, support_cap=4)
    with pytest.raises(CapacityError):
        plan_transition_lookahead(mdp, method="exact-joint", support_cap=2)


def test_list_policy_must_cover():
    full = build_ranked_list(np.zeros((2, 2)))
    short = RankedList(next_states=full.next_states[:1],
                       actions=full.actions[:1], scores=full.scores[:1])
    policy = ListPolicy([[short]])
    with pytest.raises(RuntimeError):
        policy.act(0, 0, np.array([1, 1]))
    assert policy.act(0, 0, np.array([0, 1])) == 0


def test_lookahead_orders_values():
    # lookahead can only help: V_none <= V_reward and V_none <= V_transition
    for seed in range(5):
        mdp = make_random_mdp(3, 3, 4, seed=seed)
        v0 = plan_no_lookahead(mdp)[0].values
        vr = plan_reward_lookahead(mdp)[0].values
        vt = plan_transition_lookahead(mdp)[0].values
        assert np.all(vr >= v0 - 1e-12)
        assert np.all(vt >= v0 - 1e-12)
