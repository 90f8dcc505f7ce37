"""Optimistic model-based learners for the three observation regimes.

All three learners keep an EmpiricalStore of what they saw, replan from
scratch at the start of every episode, and act greedily on optimistic scores:

  mvp-rl       reward lookahead; plans the expectation (over stored reward
               vectors) of the per-vector best action, with a per-state reward
               bonus and a per-(s,a) Bernstein transition bonus.
  mvp-tl       transition lookahead; plans the expectation (over stored
               next-state vectors) of the per-vector best action, with a
               per-(s,a) reward bonus and a per-state Bernstein bonus.
  mvp-vanilla  ignores the shown vector; standard optimistic value iteration
               on the empirical means, run in whatever regime for comparison.

Counts of zero are floored to one inside every bonus; unvisited states plan
to the horizon H.  Episode indices are 1-based because the confidence widths
grow with k.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .mdp import EpisodeRecord
from .planning import ListPolicy, MarkovPolicy, ThresholdPolicy, build_ranked_list

ALGOS = ("mvp-rl", "mvp-tl", "mvp-vanilla")


def log_term_rl(k, num_states, num_actions, horizon, delta):
    """Confidence log factor for the reward-lookahead learner at episode k."""
    _check_log_args(k, delta)
    S, A, H = num_states, num_actions, horizon
    return math.log(144 * S * S * A * H * H * k ** 3 * (k + 1) / delta)


def log_term_tl(k, num_states, num_actions, horizon, delta):
    """Confidence log factor for the transition-lookahead learner at episode k."""
    _check_log_args(k, delta)
    S, A, H = num_states, num_actions, horizon
    return math.log(16 * S ** 3 * A * A * H * k * k * (k + 1) / delta)


def _check_log_args(k, delta):
    if k < 1:
        raise ValueError("episode index k must be >= 1")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")


@dataclass
class BonusConfig:
    """Learner confidence parameters.

    reward_scale / transition_scale multiply the two bonus families; 1.0
    reproduces the printed formulas and 0.0 switches a bonus off for
    diagnostics.  log_term, if given, replaces the default log factor and is
    called as log_term(k).
    """

    delta: float = 0.1
    reward_scale: float = 1.0
    transition_scale: float = 1.0
    log_term: object = None

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.reward_scale < 0.0 or self.transition_scale < 0.0:
            raise ValueError("bonus scales must be >= 0")


# -- empirical store --------------------------------------------------------


class EmpiricalStore:
    """Append-only record of everything a learner observed, per (h, s).

    Raw observation vectors (reward vectors in reward mode, next-state
    vectors in transition mode) are kept in arrival order; a multiplicity
    table alongside them lets planning average over the list in O(distinct)
    instead of O(n).  Counts and running sums cover both the taken-action
    estimators and, in reward mode, the all-actions reward estimator.
    """

    def __init__(self, num_states, num_actions, horizon, mode):
        if mode not in ("none", "reward", "transition"):
            raise ValueError(f"unknown store mode {mode!r}")
        self.mode = mode
        self.num_states = num_states
        self.num_actions = num_actions
        self.horizon = horizon
        H, S, A = horizon, num_states, num_actions
        self.n_state = np.zeros((H, S), dtype=np.int64)
        self.n_state_action = np.zeros((H, S, A), dtype=np.int64)
        self.reward_sum_taken = np.zeros((H, S, A))
        self.reward_sum_all = np.zeros((H, S, A))
        self.transition_counts = np.zeros((H, S, A, S), dtype=np.int64)
        if mode == "transition":
            self.transition_counts_all = np.zeros((H, S, A, S), dtype=np.int64)
        else:
            self.transition_counts_all = None
        self.vectors = [[[] for _ in range(S)] for _ in range(H)]
        self._multiplicity = [[{} for _ in range(S)] for _ in range(H)]
        self._version = np.zeros((H, S), dtype=np.int64)
        self._cache = {}

    def add_episode(self, record: EpisodeRecord):
        if record.regime != self.mode:
            raise ValueError(
                f"record regime {record.regime!r} does not match store mode {self.mode!r}")
        H = self.horizon
        for h in range(H):
            s = int(record.states[h])
            a = int(record.actions[h])
            s_next = int(record.states[h + 1])
            self.n_state[h, s] += 1
            self.n_state_action[h, s, a] += 1
            self.reward_sum_taken[h, s, a] += record.rewards[h]
            self.transition_counts[h, s, a, s_next] += 1
            if self.mode == "none":
                continue
            vec = tuple(record.observations[h].tolist())
            self.vectors[h][s].append(vec)
            mult = self._multiplicity[h][s]
            mult[vec] = mult.get(vec, 0) + 1
            self._version[h, s] += 1
            if self.mode == "reward":
                self.reward_sum_all[h, s] += record.observations[h]
            else:
                for act in range(self.num_actions):
                    self.transition_counts_all[h, s, act, vec[act]] += 1

    def observed(self, h, s):
        """Distinct stored vectors and multiplicities at (h, s).

        Returns (matrix (m, A), counts (m,)); the matrix dtype follows the
        mode.  Cached until the cell receives new data.
        """
        version, cached = self._cache.get((h, s), (-1, None))
        if version == self._version[h, s]:
            return cached
        mult = self._multiplicity[h][s]
        dtype = int if self.mode == "transition" else float
        if mult:
            matrix = np.array(list(mult.keys()), dtype=dtype)
            counts = np.fromiter(mult.values(), dtype=float, count=len(mult))
        else:
            matrix = np.zeros((0, self.num_actions), dtype=dtype)
            counts = np.zeros(0)
        self._cache[(h, s)] = (int(self._version[h, s]), (matrix, counts))
        return matrix, counts

    def mean_rewards(self, source="auto"):
        """(H, S, A) empirical mean rewards.

        source "taken" averages realized rewards of taken actions; "all"
        averages the full observed vectors (reward mode only); "auto" picks
        "all" in reward mode and "taken" otherwise.
        """
        if source == "auto":
            source = "all" if self.mode == "reward" else "taken"
        if source == "taken":
            return self.reward_sum_taken / np.maximum(self.n_state_action, 1)
        if source != "all":
            raise ValueError(f"unknown source {source!r}")
        if self.mode != "reward":
            raise ValueError("all-actions reward estimate needs reward mode")
        return self.reward_sum_all / np.maximum(self.n_state[..., None], 1)

    def transition_probs(self):
        """(H, S, A, S) empirical next-state marginals.

        In transition mode every visit reveals one next state per action, so
        the estimate is based on all observed vectors (count base n(h,s));
        otherwise it uses realized transitions (count base n(h,s,a)).
        """
        if self.mode == "transition":
            return self.transition_counts_all / np.maximum(
                self.n_state[..., None, None], 1)
        return self.transition_counts / np.maximum(
            self.n_state_action[..., None], 1)

    # -- serialization (checkpointing) --------------------------------------

    def to_json(self):
        payload = {
            "mode": self.mode,
            "shape": [self.horizon, self.num_states, self.num_actions],
            "n_state": self.n_state.tolist(),
            "n_state_action": self.n_state_action.tolist(),
            "reward_sum_taken": self.reward_sum_taken.tolist(),
            "reward_sum_all": self.reward_sum_all.tolist(),
            "transition_counts": self.transition_counts.tolist(),
            "vectors": [[[list(v) for v in cell] for cell in row]
                        for row in self.vectors],
        }
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text):
        payload = json.loads(text)
        H, S, A = payload["shape"]
        store = cls(S, A, H, payload["mode"])
        store.n_state = np.array(payload["n_state"], dtype=np.int64)
        store.n_state_action = np.array(payload["n_state_action"], dtype=np.int64)
        store.reward_sum_taken = np.array(payload["reward_sum_taken"])
        store.reward_sum_all = np.array(payload["reward_sum_all"])
        store.transition_counts = np.array(payload["transition_counts"],
                                           dtype=np.int64)
        for h in range(H):
            for s in range(S):
                for v in payload["vectors"][h][s]:
                    vec = tuple(int(x) if store.mode == "transition" else float(x)
                                for x in v)
                    store.vectors[h][s].append(vec)
                    mult = store._multiplicity[h][s]
                    mult[vec] = mult.get(vec, 0) + 1
                    store._version[h, s] += 1
                    if store.mode == "transition":
                        for a in range(A):
                            store.transition_counts_all[h, s, a, vec[a]] += 1
        return store


# -- bonus terms ------------------------------------------------------------


def rl_reward_bonus(n_state, num_actions, log_term):
    """Per-state reward bonus of the reward-lookahead learner."""
    return 3.0 * math.sqrt(num_actions * log_term / (2.0 * max(n_state, 1)))


def rl_transition_bonus(var, n_state_action, log_term, horizon):
    """Per-(s,a) Bernstein transition bonus (callers clip at H).  Vectorized."""
    n = np.maximum(n_state_action, 1)
    raw = (20.0 / 3.0) * np.sqrt(var * log_term / n) \
        + (400.0 / 9.0) * horizon * log_term / n
    return raw


def tl_reward_bonus(n_state_action, log_term):
    """Per-(s,a) reward bonus of the transition-lookahead learner."""
    return np.minimum(np.sqrt(log_term / np.maximum(n_state_action, 1)), 1.0)


def tl_transition_bonus(var, n_state, log_term, horizon):
    """Per-state Bernstein bonus over stored next-state vectors."""
    n = max(n_state, 1)
    return (20.0 / 3.0) * math.sqrt(var * log_term / n) \
        + (400.0 / 3.0) * horizon * log_term / n


def monotone_backup(p, v, n, log_term, horizon):
    """p . v plus max(Bernstein term, range term): coordinatewise monotone in v.

    This is the structural form behind the transition bonus: increasing any
    entry of v (within [0, H]) never decreases the optimistic backup, which
    is what makes optimism survive the backward recursion.
    """
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    mean = p @ v
    var = p @ (v * v) - mean * mean
    var = max(float(var), 0.0)
    bonus = max((20.0 / 3.0) * math.sqrt(var * log_term / n),
                (400.0 / 9.0) * horizon * log_term / n)
    return float(mean) + bonus


# -- optimistic planning ----------------------------------------------------


@dataclass
class OptimisticPlan:
    """Replanned optimistic values plus the cached per-action scores.

    For mvp-rl, scores[h,s,a] is bonus + empirical continuation and acting
    adds the observed reward vector.  For mvp-tl, scores[h,s,a] is the
    bonus-inflated empirical reward and acting adds values[h+1][observed
    next state].  For mvp-vanilla, scores is the full optimistic Q.
    """

    values: np.ndarray        # (H+1, S), clipped to [0, H]
    action_scores: np.ndarray  # (H, S, A)
    algo: str


def _log_term_for(config, algo, k, S, A, H):
    if config.log_term is not None:
        return float(config.log_term(k))
    if algo == "mvp-tl":
        return log_term_tl(k, S, A, H, config.delta)
    return log_term_rl(k, S, A, H, config.delta)


def mvp_rl_plan(store, k, config):
    """Optimistic backward pass of the reward-lookahead learner at episode k."""
    H, S, A = store.horizon, store.num_states, store.num_actions
    L = _log_term_for(config, "mvp-rl", k, S, A, H)
    phat = store.transition_probs()
    nsa = store.n_state_action
    V = np.zeros((H + 1, S))
    scores = np.zeros((H, S, A))
    for h in reversed(range(H)):
        v_next = V[h + 1]
        pv = np.einsum("saj,j->sa", phat[h], v_next)
        var = np.einsum("saj,j->sa", phat[h], v_next * v_next) - pv * pv
        var = np.clip(var, 0.0, None)
        bp = rl_transition_bonus(var, nsa[h], L, H)
        bp = np.minimum(config.transition_scale * bp, H)
        scores[h] = bp + pv
        for s in range(S):
            n = store.n_state[h, s]
            if n == 0:
                V[h, s] = H
                continue
            matrix, counts = store.observed(h, s)
            best = np.max(matrix + scores[h, s][None, :], axis=1)
            br = config.reward_scale * rl_reward_bonus(n, A, L)
            V[h, s] = min(counts @ best / n + br, H)
    return OptimisticPlan(values=V, action_scores=scores, algo="mvp-rl")


def mvp_tl_plan(store, k, config):
    """Optimistic backward pass of the transition-lookahead learner."""
    H, S, A = store.horizon, store.num_states, store.num_actions
    L = _log_term_for(config, "mvp-tl", k, S, A, H)
    rhat = store.mean_rewards("taken")
    V = np.zeros((H + 1, S))
    scores = np.zeros((H, S, A))
    for h in reversed(range(H)):
        br = config.reward_scale * tl_reward_bonus(store.n_state_action[h], L)
        scores[h] = rhat[h] + br
        for s in range(S):
            n = store.n_state[h, s]
            if n == 0:
                V[h, s] = H
                continue
            matrix, counts = store.observed(h, s)
            vals = np.max(scores[h, s][None, :] + V[h + 1][matrix], axis=1)
            mean = counts @ vals / n
            var = max(float(counts @ (vals * vals) / n - mean * mean), 0.0)
            bp = config.transition_scale * tl_transition_bonus(var, n, L, H)
            V[h, s] = min(mean + bp, H)
    return OptimisticPlan(values=V, action_scores=scores, algo="mvp-tl")


def mvp_vanilla_plan(store, k, config):
    """Standard optimistic value iteration on empirical means (no lookahead)."""
    H, S, A = store.horizon, store.num_states, store.num_actions
    L = _log_term_for(config, "mvp-vanilla", k, S, A, H)
    rhat = store.mean_rewards("auto")
    if store.mode == "reward":
        n_r = np.broadcast_to(store.n_state[..., None], (H, S, A))
    else:
        n_r = store.n_state_action
    phat = store.transition_probs()
    V = np.zeros((H + 1, S))
    scores = np.zeros((H, S, A))
    for h in reversed(range(H)):
        v_next = V[h + 1]
        pv = np.einsum("saj,j->sa", phat[h], v_next)
        var = np.einsum("saj,j->sa", phat[h], v_next * v_next) - pv * pv
        var = np.clip(var, 0.0, None)
        bp = np.minimum(config.transition_scale
                        * rl_transition_bonus(var, store.n_state_action[h], L, H), H)
        br = config.reward_scale * np.minimum(
            np.sqrt(L / (2.0 * np.maximum(n_r[h], 1))), 1.0)
        scores[h] = rhat[h] + br + bp + pv
        V[h] = np.minimum(scores[h].max(axis=1), H)
    return OptimisticPlan(values=V, action_scores=scores, algo="mvp-vanilla")


# -- learner front-ends -----------------------------------------------------


class MvpRlLearner:
    """Reward-lookahead learner: replan, then argmax observed + cached scores."""

    regime = "reward"

    def __init__(self, num_states, num_actions, horizon, config=None):
        self.config = config or BonusConfig()
        self.store = EmpiricalStore(num_states, num_actions, horizon, "reward")
        self.plan = None
        self.episode = 0

    def start_episode(self, k):
        self.episode = k
        self.plan = mvp_rl_plan(self.store, k, self.config)

    def act(self, h, s, observation):
        obs = np.asarray(observation, dtype=float)
        if obs.shape != (self.store.num_actions,):
            raise ValueError("observation must hold one reward per action")
        return int(np.argmax(obs + self.plan.action_scores[h, s]))

    def update(self, record):
        self.store.add_episode(record)

    def policy(self):
        return ThresholdPolicy(self.plan.action_scores)

    def optimistic_value(self, s):
        return float(self.plan.values[0, s])


class MvpTlLearner:
    """Transition-lookahead learner: argmax inflated reward + next-state value.

    Score ties break toward the lowest (observed next state, action) pair,
    the same order the ranked-list form uses, so acting and list-form
    evaluation agree exactly.
    """

    regime = "transition"

    def __init__(self, num_states, num_actions, horizon, config=None):
        self.config = config or BonusConfig()
        self.store = EmpiricalStore(num_states, num_actions, horizon, "transition")
        self.plan = None
        self.episode = 0

    def start_episode(self, k):
        self.episode = k
        self.plan = mvp_tl_plan(self.store, k, self.config)

    def act(self, h, s, observation):
        obs = np.asarray(observation, dtype=int)
        if obs.shape != (self.store.num_actions,):
            raise ValueError("observation must hold one next state per action")
        totals = self.plan.action_scores[h, s] + self.plan.values[h + 1][obs]
        best = np.flatnonzero(totals == totals.max())
        if best.size == 1:
            return int(best[0])
        pairs = sorted((int(obs[a]), int(a)) for a in best)
        return pairs[0][1]

    def update(self, record):
        self.store.add_episode(record)

    def policy(self):
        H, S = self.store.horizon, self.store.num_states
        lists = [[None] * S for _ in range(H)]
        for h in range(H):
            for s in range(S):
                pair_scores = self.plan.values[h + 1][:, None] \
                    + self.plan.action_scores[h, s][None, :]
                lists[h][s] = build_ranked_list(pair_scores)
        return ListPolicy(lists)

    def optimistic_value(self, s):
        return float(self.plan.values[0, s])


class MvpVanillaLearner:
    """Optimism on empirical means only; the shown vector is ignored."""

    def __init__(self, num_states, num_actions, horizon, config=None,
                 regime="reward"):
        self.regime = regime
        self.config = config or BonusConfig()
        self.store = EmpiricalStore(num_states, num_actions, horizon, regime)
        self.plan = None
        self.episode = 0

    def start_episode(self, k):
        self.episode = k
        self.plan = mvp_vanilla_plan(self.store, k, self.config)

    def act(self, h, s, observation):
        return int(np.argmax(self.plan.action_scores[h, s]))

    def update(self, record):
        self.store.add_episode(record)

    def policy(self):
        return MarkovPolicy(np.argmax(self.plan.action_scores, axis=2),
                            regime=self.regime)

    def optimistic_value(self, s):
        return float(self.plan.values[0, s])


def make_learner(spec, num_states, num_actions, horizon, regime=None):
    """Build a learner from its JSON description.

    spec: {"algo": ..., "delta": ..., "bonus_scale": {"reward": ..,
    "transition": ..}}; regime is only needed for mvp-vanilla.
    """
    algo = spec.get("algo")
    if algo not in ALGOS:
        raise ValueError(f"unknown algo {algo!r}; expected one of {ALGOS}")
    scales = spec.get("bonus_scale", {})
    config = BonusConfig(delta=spec.get("delta", 0.1),
                         reward_scale=scales.get("reward", 1.0),
                         transition_scale=scales.get("transition", 1.0))
    if algo == "mvp-rl":
        return MvpRlLearner(num_states, num_actions, horizon, config)
    if algo == "mvp-tl":
        return MvpTlLearner(num_states, num_actions, horizon, config)
    return MvpVanillaLearner(num_states, num_actions, horizon, config,
                             regime=regime or "reward")
