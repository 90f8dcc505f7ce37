"""Built-in correctness checks runnable from the CLI with no input files.

Each check is hermetic (constructs its own environments), cheap, and named;
the runner stops at the first failure and reports it.  These cover the
closed-form environment values, the rank-hit distribution, agreement between
the specialized planners and the independent extended-state oracles, and
determinism of episode replay.
"""

import time

import numpy as np

from .distributions import bernoulli_marginal
from .envs import (make_fig1_prophet, make_prophet_chain, make_random_mdp,
                   make_transition_chain)
from .harness import ExperimentConfig, FixedPolicyAgent, run_single
from .mdp import run_episode
from .oracles import (best_markov_values, oracle_extended_reward,
                      oracle_extended_transition, rank_hit_by_enumeration)
from .planning import (build_ranked_list, plan_no_lookahead,
                       plan_reward_lookahead, plan_transition_lookahead,
                       rank_hit_distribution)


def _close(got, want, tol, what):
    if abs(got - want) > tol:
        raise AssertionError(f"{what}: got {got!r}, wanted {want!r} +- {tol}")


def check_fig1_closed_form():
    A, H = 5, 20
    mdp = make_fig1_prophet(A, H)
    base, _ = plan_no_lookahead(mdp)
    _close(base.values[0, 0], 1.0 / ((A - 1) * H), 1e-12, "no-lookahead value")
    look, _ = plan_reward_lookahead(mdp, method="exact")
    p = 1.0 / ((A - 1) * H)
    want = 1.0 - (1.0 - p) ** ((A - 1) * H)
    _close(look.values[0, 0], want, 1e-10, "reward-lookahead value")


def check_chain_separation():
    mdp = make_transition_chain(4, 12)
    base, _ = plan_no_lookahead(mdp)
    look, _ = plan_transition_lookahead(mdp, method="exact-list")
    v0, vt = base.values[0, 0], look.values[0, 0]
    if vt < 0.5:
        raise AssertionError(f"transition-lookahead value {vt:.4f} < 0.5")
    if vt / v0 <= 10.0:
        raise AssertionError(f"separation ratio {vt / v0:.2f} <= 10")


def check_mu_distribution():
    # Two actions with Bernoulli({0,1}) next states at probs 0.7 and 0.4,
    # scores ranking (1,a0) > (1,a1) > (0,a0) > (0,a1).
    pair_scores = np.array([[1.0, 0.5], [4.0, 3.0]])
    ranked = build_ranked_list(pair_scores)
    marg = np.array([[0.3, 0.7], [0.6, 0.4]])
    mu = rank_hit_distribution(ranked, marg)
    want = np.array([0.7, 0.12, 0.18, 0.0])
    if np.max(np.abs(mu - want)) > 1e-12:
        raise AssertionError(f"mu {mu.tolist()} != {want.tolist()}")
    rng = np.random.default_rng(7)
    for _ in range(5):
        S, A = 3, 3
        m = rng.dirichlet(np.ones(S), size=A)
        scores = rng.random((S, A))
        rl = build_ranked_list(scores)
        got = rank_hit_distribution(rl, m)
        ref = rank_hit_by_enumeration(rl, m)
        _close(got.sum(), 1.0, 1e-12, "mu total mass")
        if np.max(np.abs(got - ref)) > 1e-12:
            raise AssertionError("rank-hit formula disagrees with enumeration")


def check_extended_oracles():
    for seed, independent in ((11, True), (12, False)):
        mdp = make_random_mdp(3, 2, 2, seed=seed, independent=independent)
        lr, _ = plan_reward_lookahead(mdp, method="exact")
        er = oracle_extended_reward(mdp)
        if np.max(np.abs(lr.values - er.values)) > 1e-12:
            raise AssertionError(f"reward oracle mismatch on seed {seed}")
        lt, _ = plan_transition_lookahead(mdp, method="exact-joint")
        et = oracle_extended_transition(mdp)
        if np.max(np.abs(lt.values - et.values)) > 1e-12:
            raise AssertionError(f"transition oracle mismatch on seed {seed}")
        if independent:
            ll, _ = plan_transition_lookahead(mdp, method="exact-list")
            if np.max(np.abs(ll.values - lt.values)) > 1e-12:
                raise AssertionError("list and joint planners disagree")


def check_markov_brute_force():
    mdp = make_random_mdp(3, 2, 2, seed=21)
    table, _ = plan_no_lookahead(mdp)
    brute = best_markov_values(mdp)
    if np.max(np.abs(table.values[0] - brute)) > 1e-12:
        raise AssertionError("backward induction disagrees with policy enumeration")


def check_prophet_chain_value():
    mdp = make_prophet_chain([bernoulli_marginal(0.5), bernoulli_marginal(0.5)])
    look, _ = plan_reward_lookahead(mdp, method="exact")
    _close(look.values[0, 0], 0.75, 1e-12, "two-coin prophet value")


def check_ranked_list_ties():
    # All-equal scores: order must fall back to (state, action) ascending.
    ranked = build_ranked_list(np.zeros((2, 2)))
    pairs = list(zip(ranked.next_states.tolist(), ranked.actions.tolist()))
    if pairs != [(0, 0), (0, 1), (1, 0), (1, 1)]:
        raise AssertionError(f"tie order {pairs}")


def check_episode_replay():
    mdp = make_random_mdp(3, 2, 3, seed=31)
    _, policy = plan_reward_lookahead(mdp, method="exact")
    agent = FixedPolicyAgent(policy)
    first = run_episode(mdp, agent, "reward", episode=5, seed=123)
    second = run_episode(mdp, agent, "reward", episode=5, seed=123)
    same = (np.array_equal(first.states, second.states)
            and np.array_equal(first.actions, second.actions)
            and np.array_equal(first.rewards, second.rewards)
            and np.array_equal(first.observations, second.observations))
    if not same:
        raise AssertionError("same (seed, episode) replay diverged")


def check_learning_smoke():
    mdp = make_random_mdp(2, 2, 2, seed=41)
    config = ExperimentConfig(config_id="smoke", env=mdp, regime="reward",
                              learner={"algo": "mvp-rl"}, episodes=30)
    curve = run_single(config, seed=1)
    if not np.all(np.isfinite(curve.cum_regret)):
        raise AssertionError("non-finite regret")
    inc = np.diff(np.concatenate(([0.0], curve.cum_regret)))
    if np.min(inc) < -1e-9:
        raise AssertionError(f"regret increment {np.min(inc)} < -1e-9")


CHECKS = (
    ("fig1-closed-form", check_fig1_closed_form),
    ("chain-separation", check_chain_separation),
    ("mu-distribution", check_mu_distribution),
    ("extended-oracle-agreement", check_extended_oracles),
    ("markov-brute-force", check_markov_brute_force),
    ("prophet-chain-value", check_prophet_chain_value),
    ("ranked-list-ties", check_ranked_list_ties),
    ("episode-replay", check_episode_replay),
    ("learning-smoke", check_learning_smoke),
)


def run_selftest(out=print):
    """Run all checks in order; stop at the first failure.  Returns 0 or 1."""
    for name, fn in CHECKS:
        t0 = time.perf_counter()
        try:
            fn()
        except Exception as err:
            out(f"FAIL {name}: {err}")
            return 1
        out(f"PASS {name} ({time.perf_counter() - t0:.2f}s)")
    return 0
