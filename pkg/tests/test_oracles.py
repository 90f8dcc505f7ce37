import numpy as np
import pytest

from lookahead_rl.envs import (make_fig1_prophet, make_prophet_chain,
                               make_random_mdp)
from lookahead_rl.distributions import bernoulli_marginal
from lookahead_rl.oracles import (EXTENDED_STATE_CAP, best_markov_values,
                                  oracle_extended_reward,
                                  oracle_extended_transition,
                                  rank_hit_by_enumeration)
from lookahead_rl.planning import CapacityError, build_ranked_list


def test_extended_reward_oracle_fig1_closed_forms():
    # small prophet instance solved in closed form by hand: blind value is
    # p = 1/((A-1)H), lookahead value 1 - (1-p)^{(A-1)H}
    A, H = 3, 4
    mdp = make_fig1_prophet(A, H)
    p = 1.0 / ((A - 1) * H)
    v = oracle_extended_reward(mdp).values
    assert v[0, 0] == pytest.approx(1.0 - (1.0 - p) ** ((A - 1) * H), abs=1e-10)
    assert v[0, 1] == 0.0
    np.testing.assert_allclose(best_markov_values(mdp)[0], p, atol=1e-12)


def test_extended_transition_oracle_prophet_chain():
    # two Bernoulli(1/2) offers: collect the first 1 seen, worth 3/4...
    # except offers live in rewards, so transition lookahead is useless here
    # and the extended oracle must agree with the blind value 1/2.
    mdp = make_prophet_chain([bernoulli_marginal(0.5)] * 2)
    v = oracle_extended_transition(mdp).values
    assert v[0, 0] == pytest.approx(0.5, abs=1e-12)
    # and the reward oracle recovers the prophet value
    assert oracle_extended_reward(mdp).values[0, 0] == pytest.approx(0.75, abs=1e-12)


def test_extended_state_cap_raises():
    mdp = make_random_mdp(3, 3, 3, seed=0)
    with pytest.raises(CapacityError):
        oracle_extended_reward(mdp, max_states=10)
    with pytest.raises(CapacityError):
        oracle_extended_transition(mdp, max_states=10)
    assert EXTENDED_STATE_CAP >= 10_000


def test_best_markov_policy_cap():
    mdp = make_random_mdp(3, 3, 4, seed=0)  # 3^12 policies
    with pytest.raises(CapacityError):
        best_markov_values(mdp, max_policies=1000)


def test_rank_hit_enumeration_worked_example():
    ranked = build_ranked_list([[1.0, 0.5], [4.0, 3.0]])
    marg = np.array([[0.3, 0.7], [0.6, 0.4]])
    mu = rank_hit_by_enumeration(ranked, marg)
    np.testing.assert_allclose(mu, [0.7, 0.12, 0.18, 0.0], atol=1e-12)


def test_rank_hit_enumeration_cap():
    ranked = build_ranked_list(np.zeros((6, 6)))
    with pytest.raises(CapacityError):
        rank_hit_by_enumeration(ranked, np.full((6, 6), 1.0 / 6),
                                max_outcomes=100)
