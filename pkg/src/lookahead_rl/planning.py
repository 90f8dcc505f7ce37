"""Exact planning with and without one-step lookahead, and policy evaluation.

Without lookahead the optimal values satisfy the usual Bellman backup
(max over actions of expected reward plus continuation).  With reward
lookahead the max moves inside the expectation over the reward vector; with
transition lookahead it moves inside the expectation over the next-state
vector.  For independent transition marginals the transition-lookahead backup
has an equivalent list form: rank all (next_state, action) pairs by
r(s,a) + V(next_state) and play the highest-ranked realized pair; the chance
that pair i is the first realized one has a closed form used here.
"""

from dataclasses import dataclass

import numpy as np

from .mdp import substream

SUPPORT_CAP = 4096  # default cap on enumerated joint supports per (h, s)


class CapacityError(ValueError):
    """A joint support or extended state space exceeded the configured cap."""


@dataclass
class ValueTable:
    """Optimal or policy values per (step, state); values[H] is the zero tail."""

    values: np.ndarray  # (H+1, S)
    regime: str


@dataclass
class RankedList:
    """(next_state, action) pairs sorted by score, ties by (state, action)."""

    next_states: np.ndarray  # (S*A,) int
    actions: np.ndarray      # (S*A,) int
    scores: np.ndarray       # (S*A,) float, non-increasing

    def __len__(self):
        return self.scores.size


def build_ranked_list(pair_scores):
    """Rank all (next_state, action) pairs by score, descending.

    pair_scores has shape (S, A): score of landing in next_state s' after
    playing a.  Ties break toward the lowest (state, action) pair so the
    ordering is a deterministic function of the scores.
    """
    pair_scores = np.asarray(pair_scores, dtype=float)
    S, A = pair_scores.shape
    s_idx = np.repeat(np.arange(S), A)
    a_idx = np.tile(np.arange(A), S)
    flat = pair_scores.ravel()
    order = np.lexsort((a_idx, s_idx, -flat))
    return RankedList(next_states=s_idx[order], actions=a_idx[order],
                      scores=flat[order])


def rank_hit_distribution(ranked, marginals):
    """Probability that each list element is the first realized one.

    marginals has shape (A, S): independent per-action next-state laws.
    Element i = (s'_i, a_i) is hit when action a_i lands on s'_i and no other
    action lands on one of its own higher-ranked pairs; independence gives
    mu_i = P(s'_i | a_i) * prod_{a != a_i} (1 - sum_{j<i, a_j=a} P(s'_j | a)).
    """
    marginals = np.asarray(marginals, dtype=float)
    A = marginals.shape[0]
    n = len(ranked)
    p_pair = marginals[ranked.actions, ranked.next_states]
    # blocked[i, a]: own mass action a has claimed strictly before rank i
    claimed = np.zeros((n, A))
    claimed[np.arange(n), ranked.actions] = p_pair
    blocked = np.cumsum(claimed, axis=0) - claimed
    free = 1.0 - blocked
    if np.any(free < -1e-9):
        raise ValueError("marginal mass exceeds 1; corrupted marginals")
    free = np.clip(free, 0.0, None)
    free[np.arange(n), ranked.actions] = 1.0  # product excludes own action
    return p_pair * np.prod(free, axis=1)


# -- policies ---------------------------------------------------------------


@dataclass
class ThresholdPolicy:
    """Reward-lookahead rule: play argmax_a observed_reward[a] + offsets[h,s,a].

    offsets is (H, S, A); for the optimal policy it is the expected
    continuation value of each action.  Ties go to the lowest action index.
    """

    offsets: np.ndarray
    regime: str = "reward"

    def act(self, h, s, observation):
        return int(np.argmax(np.asarray(observation) + self.offsets[h, s]))


@dataclass
class ListPolicy:
    """Transition-lookahead rule: play the highest-ranked realized pair."""

    lists: list  # lists[h][s] -> RankedList
    regime: str = "transition"

    def act(self, h, s, observation):
        ranked = self.lists[h][s]
        obs = np.asarray(observation)
        for i in range(len(ranked)):
            a = ranked.actions[i]
            if obs[a] == ranked.next_states[i]:
                return int(a)
        raise RuntimeError("ranked list did not cover the realized outcomes")


@dataclass
class MarkovPolicy:
    """State-only deterministic rule; ignores any observation shown."""

    actions: np.ndarray  # (H, S) int
    regime: str = "none"

    def act(self, h, s, observation):
        return int(self.actions[h, s])


# -- planners ---------------------------------------------------------------


def plan_no_lookahead(mdp):
    """Optimal values and greedy policy without lookahead."""
    H, S = mdp.horizon, mdp.num_states
    r = mdp.mean_rewards()
    P = mdp.transition_kernels()
    V = np.zeros((H + 1, S))
    greedy = np.zeros((H, S), dtype=int)
    for h in reversed(range(H)):
        Q = r[h] + np.einsum("saj,j->sa", P[h], V[h + 1])
        greedy[h] = np.argmax(Q, axis=1)
        V[h] = Q[np.arange(S), greedy[h]]
    return ValueTable(V, "none"), MarkovPolicy(greedy)


def plan_reward_lookahead(mdp, method="exact", samples=None, seed=0,
                          support_cap=SUPPORT_CAP):
    """Optimal values under one-step reward lookahead.

    method "exact" enumerates each reward joint's support (capped);
    method "sample" averages over `samples` fresh draws per (h, s), one fixed
    draw set reused for that cell's backup.  Also returns the optimal
    threshold policy, whose offsets are the expected continuation values.
    """
    if method not in ("exact", "sample"):
        raise ValueError(f"unknown method {method!r}")
    if method == "sample" and not samples:
        raise ValueError("sample method needs a positive sample count")
    H, S = mdp.horizon, mdp.num_states
    P = mdp.transition_kernels()
    V = np.zeros((H + 1, S))
    offsets = np.zeros((H, S, mdp.num_actions))
    for h in reversed(range(H)):
        pv = np.einsum("saj,j->sa", P[h], V[h + 1])
        offsets[h] = pv
        for s in range(S):
            d = mdp.reward_model[h][s]
            if method == "exact":
                if d.support_size > support_cap:
                    raise CapacityError(
                        f"reward joint at (h={h}, s={s}) has support "
                        f"{d.support_size} > cap {support_cap}")
                w, x = d.support()
            else:
                x = d.sample_many(substream(seed, h, s, "plan-reward"), samples)
                w = np.full(x.shape[0], 1.0 / x.shape[0])
            V[h, s] = w @ np.max(x + pv[s], axis=1)
    return ValueTable(V, "reward"), ThresholdPolicy(offsets)


def plan_transition_lookahead(mdp, method="exact-list", samples=None, seed=0,
                              support_cap=SUPPORT_CAP):
    """Optimal values under one-step transition lookahead.

    method "exact-list" uses the ranked-list closed form (independent
    marginals only); "exact-joint" enumerates the transition joint's support;
    "sample" averages over fresh next-state vector draws.  Always returns the
    optimal list policy built from scores r(s,a) + V(next_state).
    """
    if method not in ("exact-list", "exact-joint", "sample"):
        raise ValueError(f"unknown method {method!r}")
    if method == "sample" and not samples:
        raise ValueError("sample method needs a positive sample count")
    H, S, A = mdp.horizon, mdp.num_states, mdp.num_actions
    r = mdp.mean_rewards()
    V = np.zeros((H + 1, S))
    lists = [[None] * S for _ in range(H)]
    for h in reversed(range(H)):
        for s in range(S):
            d = mdp.transition_model[h][s]
            pair_scores = V[h + 1][:, None] + r[h, s][None, :]  # (S, A)
            ranked = build_ranked_list(pair_scores)
            lists[h][s] = ranked
            if method == "exact-list":
                if d.kind != "product":
                    raise ValueError(
                        "exact-list needs independent transition marginals; "
                        f"(h={h}, s={s}) is an explicit joint")
                marg = np.stack([d.marginal_probs(a) for a in range(A)])
                mu = rank_hit_distribution(ranked, marg)
                V[h, s] = mu @ ranked.scores
            elif method == "exact-joint":
                if d.support_size > support_cap:
                    raise CapacityError(
                        f"transition joint at (h={h}, s={s}) has support "
                        f"{d.support_size} > cap {support_cap}")
                w, x = d.support()
                V[h, s] = w @ np.max(r[h, s][None, :] + V[h + 1][x], axis=1)
            else:
                x = d.sample_many(substream(seed, h, s, "plan-transition"), samples)
                V[h, s] = np.mean(np.max(r[h, s][None, :] + V[h + 1][x], axis=1))
    return ValueTable(V, "transition"), ListPolicy(lists)


# -- exact policy evaluation ------------------------------------------------


def evaluate_lookahead_policy(mdp, policy, support_cap=SUPPORT_CAP):
    """Exact value of a fixed policy under the true model.

    Dispatches on the policy's form: threshold (reward lookahead), ranked
    list (transition lookahead), or state-only Markov.  Evaluation uses the
    true joints; the policy only supplies the decision rule.
    """
    if isinstance(policy, ThresholdPolicy):
        return _evaluate_threshold(mdp, policy, support_cap)
    if isinstance(policy, ListPolicy):
        return _evaluate_list(mdp, policy, support_cap)
    if isinstance(policy, MarkovPolicy):
        return _evaluate_markov(mdp, policy)
    raise TypeError(f"cannot evaluate policy of type {type(policy).__name__}")


def _evaluate_threshold(mdp, policy, support_cap):
    H, S = mdp.horizon, mdp.num_states
    P = mdp.transition_kernels()
    V = np.zeros((H + 1, S))
    for h in reversed(range(H)):
        pv = np.einsum("saj,j->sa", P[h], V[h + 1])
        for s in range(S):
            d = mdp.reward_model[h][s]
            if d.support_size > support_cap:
                raise CapacityError(
                    f"reward joint at (h={h}, s={s}) has support "
                    f"{d.support_size} > cap {support_cap}")
            w, x = d.support()
            a = np.argmax(x + policy.offsets[h, s][None, :], axis=1)
            rows = np.arange(x.shape[0])
            V[h, s] = w @ (x[rows, a] + pv[s][a])
    return ValueTable(V, "reward")


def _evaluate_list(mdp, policy, support_cap):
    H, S = mdp.horizon, mdp.num_states
    r = mdp.mean_rewards()
    V = np.zeros((H + 1, S))
    for h in reversed(range(H)):
        for s in range(S):
            d = mdp.transition_model[h][s]
            ranked = policy.lists[h][s]
            if d.kind == "product":
                marg = np.stack([d.marginal_probs(a) for a in range(mdp.num_actions)])
                mu = rank_hit_distribution(ranked, marg)
                V[h, s] = mu @ (r[h, s][ranked.actions] + V[h + 1][ranked.next_states])
            else:
                if d.support_size > support_cap:
                    raise CapacityError(
                        f"transition joint at (h={h}, s={s}) has support "
                        f"{d.support_size} > cap {support_cap}")
                w, x = d.support()
                a = _list_actions_for_outcomes(ranked, x)
                rows = np.arange(x.shape[0])
                V[h, s] = w @ (r[h, s][a] + V[h + 1][x[rows, a]])
    return ValueTable(V, "transition")


def _list_actions_for_outcomes(ranked, outcomes):
    """Action the list rule takes for each next-state vector (m, A)."""
    m = outcomes.shape[0]
    actions = np.full(m, -1, dtype=int)
    for i in range(len(ranked)):
        a = ranked.actions[i]
        hit = (actions < 0) & (outcomes[:, a] == ranked.next_states[i])
        actions[hit] = a
        if np.all(actions >= 0):
            break
    return actions


def _evaluate_markov(mdp, policy):
    H, S = mdp.horizon, mdp.num_states
    r = mdp.mean_rewards()
    P = mdp.transition_kernels()
    V = np.zeros((H + 1, S))
    s_idx = np.arange(S)
    for h in reversed(range(H)):
        a = policy.actions[h]
        V[h] = r[h, s_idx, a] + np.einsum("sj,j->s", P[h, s_idx, a], V[h + 1])
    return ValueTable(V, policy.regime)
