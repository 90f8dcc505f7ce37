"""Environment constructors: lookahead separation instances and random MDPs.

make_fig1_prophet: two states; waiting is free, each leaving action pays a
rare Bernoulli bonus.  Without lookahead any policy earns 1/((A-1)H); seeing
the realized rewards first lifts the value to 1-(1-1/((A-1)H))^{(A-1)H},
which is at least 1-1/e for every (A, H).

make_transition_chain: a chain of H/2 states where forward moves are risky
(failure resets to the head) unless the agent can see which actions move
forward this step.  Transition lookahead removes all reset risk.

make_prophet_chain: the classic prophet setting as an MDP: n stages, one
fresh offer per stage, advance forfeits the current offer.
"""

import numpy as np

from .distributions import (
    JointFiniteDistribution,
    bernoulli_marginal,
    categorical_marginal,
    point_marginal,
)
from .mdp import TabularLookaheadMdp, substream

RANDOM_MAX_STATES = 10
RANDOM_MAX_ACTIONS = 6


def _point_states(targets, num_states):
    """Deterministic transition joint sending action a to targets[a]."""
    return JointFiniteDistribution.product(
        [point_marginal(int(t)) for t in targets], "state", num_values=num_states)


def _zero_rewards(num_actions):
    return JointFiniteDistribution.product(
        [point_marginal(0.0)] * num_actions, "reward")


def make_fig1_prophet(num_actions, horizon):
    """Two-state prophet instance: wait at state 0 or cash a rare bonus.

    Action 0 stays at state 0 with reward 0; actions 1..A-1 pay independent
    Bernoulli(1/((A-1)H)) and absorb into state 1.  State 1 is worthless.
    """
    if num_actions < 2 or horizon < 1:
        raise ValueError("need num_actions >= 2 and horizon >= 1")
    A, H = num_actions, horizon
    p = 1.0 / ((A - 1) * H)
    reward_home = JointFiniteDistribution.product(
        [point_marginal(0.0)] + [bernoulli_marginal(p)] * (A - 1), "reward")
    reward_sink = _zero_rewards(A)
    trans_home = _point_states([0] + [1] * (A - 1), 2)
    trans_sink = _point_states([1] * A, 2)
    rewards = [[reward_home, reward_sink] for _ in range(H)]
    transitions = [[trans_home, trans_sink] for _ in range(H)]
    return TabularLookaheadMdp(2, A, H, rewards, transitions, initial_states=(0,))


def make_transition_chain(num_actions, horizon):
    """Chain of N = H/2 states plus a terminal; forward moves succeed w.p. 1/A.

    At chain states action 0 stays put; each other action independently moves
    one state forward with probability 1/A and otherwise resets to the head.
    The last chain state pays 1 under every action and absorbs.  All rewards
    elsewhere are 0.
    """
    if num_actions < 2 or horizon < 2 or horizon % 2:
        raise ValueError("need num_actions >= 2 and an even horizon >= 2")
    A, H = num_actions, horizon
    N = H // 2
    S = N + 1  # chain states 0..N-1, terminal N
    forward = 1.0 / A
    rewards = []
    transitions = []
    for _ in range(H):
        rew_row = []
        tr_row = []
        for s in range(S):
            if s == N - 1:
                rew_row.append(JointFiniteDistribution.product(
                    [point_marginal(1.0)] * A, "reward"))
                tr_row.append(_point_states([N] * A, S))
            elif s == N:
                rew_row.append(_zero_rewards(A))
                tr_row.append(_point_states([N] * A, S))
            else:
                rew_row.append(_zero_rewards(A))
                move = np.zeros(S)
                move[s + 1] = forward
                move[0] += 1.0 - forward
                marginals = [point_marginal(s)] + [categorical_marginal(move)] * (A - 1)
                tr_row.append(JointFiniteDistribution.product(
                    marginals, "state", num_values=S))
        rewards.append(rew_row)
        transitions.append(tr_row)
    return TabularLookaheadMdp(S, A, H, rewards, transitions, initial_states=(0,))


def make_prophet_chain(stage_marginals):
    """n-stage prophet MDP: advance (reward 0) or collect the stage offer.

    stage_marginals is a list of n reward marginals (values, probs); stage i
    lives at state i, collecting moves to the terminal state n.  Horizon n,
    two actions (0 = advance, 1 = collect).
    """
    n = len(stage_marginals)
    if n < 1:
        raise ValueError("need at least one stage")
    S, A, H = n + 1, 2, n
    rewards = []
    transitions = []
    for _ in range(H):
        rew_row = []
        tr_row = []
        for s in range(S):
            if s < n:
                rew_row.append(JointFiniteDistribution.product(
                    [point_marginal(0.0), stage_marginals[s]], "reward"))
                advance_to = s + 1 if s < n - 1 else n
                tr_row.append(_point_states([advance_to, n], S))
            else:
                rew_row.append(_zero_rewards(A))
                tr_row.append(_point_states([n, n], S))
        rewards.append(rew_row)
        transitions.append(tr_row)
    return TabularLookaheadMdp(S, A, H, rewards, transitions, initial_states=(0,))


def make_random_mdp(num_states, num_actions, horizon, seed, independent=True,
                    max_joint_atoms=6):
    """Random instance: Bernoulli rewards, Dirichlet(1) transition marginals.

    With independent=False the transition law at each (h, s) is a correlated
    explicit joint: a few random outcome vectors with Dirichlet weights.
    Sizes are capped to keep exact planning and the oracles cheap.
    """
    if not 1 <= num_states <= RANDOM_MAX_STATES:
        raise ValueError(f"num_states must lie in [1, {RANDOM_MAX_STATES}]")
    if not 1 <= num_actions <= RANDOM_MAX_ACTIONS:
        raise ValueError(f"num_actions must lie in [1, {RANDOM_MAX_ACTIONS}]")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    S, A, H = num_states, num_actions, horizon
    rng = substream(seed, "random-mdp")
    rewards = []
    transitions = []
    for _ in range(H):
        rew_row = []
        tr_row = []
        for _ in range(S):
            means = rng.random(A)
            rew_row.append(JointFiniteDistribution.product(
                [bernoulli_marginal(float(p)) for p in means], "reward"))
            if independent:
                marginals = [categorical_marginal(rng.dirichlet(np.ones(S)))
                             for _ in range(A)]
                tr_row.append(JointFiniteDistribution.product(
                    marginals, "state", num_values=S))
            else:
                m = int(rng.integers(2, max_joint_atoms + 1))
                outcomes = rng.integers(0, S, size=(m, A))
                weights = rng.dirichlet(np.ones(m))
                tr_row.append(JointFiniteDistribution.explicit(
                    weights, outcomes, "state", num_values=S))
        rewards.append(rew_row)
        transitions.append(tr_row)
    return TabularLookaheadMdp(S, A, H, rewards, transitions, initial_states=(0,))


def make_env(family, **params):
    """Build an environment by family name; used by the CLI and configs."""
    if family == "fig1-prophet":
        return make_fig1_prophet(params["num_actions"], params["horizon"])
    if family == "transition-chain":
        return make_transition_chain(params["num_actions"], params["horizon"])
    if family == "prophet-chain":
        if "bernoulli_means" in params:
            stages = [bernoulli_marginal(p) for p in params["bernoulli_means"]]
        elif "point_values" in params:
            stages = [point_marginal(float(v)) for v in params["point_values"]]
        else:
            raise ValueError("prophet-chain needs bernoulli_means or point_values")
        return make_prophet_chain(stages)
    if family == "random":
        return make_random_mdp(params["num_states"], params["num_actions"],
                               params["horizon"], params.get("seed", 0),
                               independent=params.get("independent", True))
    raise ValueError(f"unknown environment family {family!r}")
