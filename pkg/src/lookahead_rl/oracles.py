"""Brute-force reference computations used to cross-check the planners.

The lookahead problems can be rewritten as ordinary MDPs of horizon 2H whose
even steps carry the observation inside the state: odd steps hold (s, zero
placeholder), even steps hold (s, realized vector).  Building those extended
MDPs explicitly and running textbook backward induction gives the same values
as the specialized one-pass recursions, through entirely different code.
Only usable for small instances; the extended state count is capped.
"""

import itertools

import numpy as np

from .planning import CapacityError, ValueTable

EXTENDED_STATE_CAP = 100_000


def _layered_backward_induction(layers):
    """Generic finite-horizon DP over explicit layers.

    Each layer is (R, P) with R of shape (n, A) and P of shape (n, A, n_next).
    Returns the list of value vectors per layer, first layer first.
    """
    values = [None] * (len(layers) + 1)
    values[-1] = np.zeros(layers[-1][1].shape[2])
    for t in reversed(range(len(layers))):
        R, P = layers[t]
        Q = R + np.einsum("xan,n->xa", P, values[t + 1])
        values[t] = Q.max(axis=1)
    return values


def oracle_extended_reward(mdp, max_states=EXTENDED_STATE_CAP):
    """Reward-lookahead values via the explicit extended MDP.

    Odd steps: states s, every action moves to (s, realized reward vector)
    with the vector's probability and pays nothing.  Even steps: state
    (s, vector), action a pays vector[a] and moves by the true kernel.
    """
    H, S, A = mdp.horizon, mdp.num_states, mdp.num_actions
    kernels = mdp.transition_kernels()
    layers = []
    total = 0
    for h in range(H):
        supports = [mdp.reward_model[h][s].support() for s in range(S)]
        offsets = np.cumsum([0] + [w.size for w, _ in supports])
        n_even = offsets[-1]
        total += S + n_even
        if total > max_states:
            raise CapacityError(f"extended state count exceeds {max_states}")
        odd_P = np.zeros((S, A, n_even))
        even_R = np.zeros((n_even, A))
        even_P = np.zeros((n_even, A, S))
        for s in range(S):
            w, x = supports[s]
            sl = slice(offsets[s], offsets[s + 1])
            odd_P[s, :, sl] = w[None, :]
            even_R[sl] = x
            even_P[sl] = kernels[h, s][None, :, :]
        layers.append((np.zeros((S, A)), odd_P))
        layers.append((even_R, even_P))
    values = _layered_backward_induction(layers)
    V = np.zeros((H + 1, S))
    for h in range(H):
        V[h] = values[2 * h]
    return ValueTable(V, "reward")


def oracle_extended_transition(mdp, max_states=EXTENDED_STATE_CAP):
    """Transition-lookahead values via the explicit extended MDP.

    Even steps hold (s, realized next-state vector); action a pays the mean
    reward r(s,a) and moves deterministically to vector[a].
    """
    H, S, A = mdp.horizon, mdp.num_states, mdp.num_actions
    r = mdp.mean_rewards()
    layers = []
    total = 0
    for h in range(H):
        supports = [mdp.transition_model[h][s].support() for s in range(S)]
        offsets = np.cumsum([0] + [w.size for w, _ in supports])
        n_even = offsets[-1]
        total += S + n_even
        if total > max_states:
            raise CapacityError(f"extended state count exceeds {max_states}")
        odd_P = np.zeros((S, A, n_even))
        even_R = np.zeros((n_even, A))
        even_P = np.zeros((n_even, A, S))
        for s in range(S):
            w, x = supports[s]
            sl = slice(offsets[s], offsets[s + 1])
            odd_P[s, :, sl] = w[None, :]
            even_R[sl] = r[h, s][None, :]
            rows = np.arange(offsets[s], offsets[s + 1])
            for a in range(A):
                even_P[rows, a, x[:, a]] = 1.0
        layers.append((np.zeros((S, A)), odd_P))
        layers.append((even_R, even_P))
    values = _layered_backward_induction(layers)
    V = np.zeros((H + 1, S))
    for h in range(H):
        V[h] = values[2 * h]
    return ValueTable(V, "transition")


def best_markov_values(mdp, max_policies=1_000_000):
    """Best step-1 value per state over all deterministic Markov policies.

    Exhaustive enumeration; only for tiny instances.  Each policy is valued
    by plain backward evaluation on the marginal means and kernels.
    """
    H, S, A = mdp.horizon, mdp.num_states, mdp.num_actions
    if A ** (H * S) > max_policies:
        raise CapacityError("too many Markov policies to enumerate")
    r = mdp.mean_rewards()
    P = mdp.transition_kernels()
    s_idx = np.arange(S)
    best = np.full(S, -np.inf)
    for flat in itertools.product(range(A), repeat=H * S):
        actions = np.array(flat, dtype=int).reshape(H, S)
        V = np.zeros(S)
        for h in reversed(range(H)):
            a = actions[h]
            V = r[h, s_idx, a] + np.einsum("sj,j->s", P[h, s_idx, a], V)
        best = np.maximum(best, V)
    return best


def rank_hit_by_enumeration(ranked, marginals, max_outcomes=1_000_000):
    """Hit distribution of a ranked list by enumerating all outcome vectors."""
    marginals = np.asarray(marginals, dtype=float)
    A, S = marginals.shape
    if S ** A > max_outcomes:
        raise CapacityError("too many outcome vectors to enumerate")
    mu = np.zeros(len(ranked))
    for vec in itertools.product(range(S), repeat=A):
        p = 1.0
        for a in range(A):
            p *= marginals[a, vec[a]]
        if p == 0.0:
            continue
        for i in range(len(ranked)):
            if vec[ranked.actions[i]] == ranked.next_states[i]:
                mu[i] += p
                break
    return mu
