"""Episodic tabular MDPs whose per-step rewards and transitions are joint laws.

The model is time-inhomogeneous with horizon H: at step h in state s the
environment draws one reward vector (one entry per action) from the reward
joint and one next-state vector from the transition joint, independently of
everything else.  The agent may be shown one of those vectors before choosing,
depending on the lookahead regime:

  "none"        no observation
  "reward"      the realized reward vector for every action
  "transition"  the realized next state for every action

Either way the realized reward is the chosen entry of the reward vector and
the next state is the chosen entry of the next-state vector.
"""

import json
import zlib
from dataclasses import dataclass

import numpy as np

from .distributions import (
    JointFiniteDistribution,
    REWARD_DOMAIN,
    STATE_DOMAIN,
)

REGIMES = ("none", "reward", "transition")


class AgentContractError(RuntimeError):
    """An agent violated the acting contract (bad action, wrong regime)."""


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream addressed by (seed, episode, step, purpose).

    Streams with distinct addresses are statistically independent, and the
    same address always yields the same draws, so parallel sweeps reproduce
    run-for-run regardless of scheduling.
    """

    seed: int
    episode: int = 0
    step: int = 0
    purpose: str = ""

    def generator(self):
        key = [self.seed & 0xFFFFFFFFFFFFFFFF, zlib.crc32(self.purpose.encode())]
        counter = [0, 0, self.episode, self.step]
        return np.random.Generator(np.random.Philox(key=key, counter=counter))


def substream(seed, *path):
    """Generator for an ad-hoc address; strings in path are hashed stably."""
    ids = [seed & 0xFFFFFFFFFFFFFFFF]
    for p in path:
        ids.append(zlib.crc32(p.encode()) if isinstance(p, str) else int(p))
    if len(ids) > 6:
        raise ValueError("stream address limited to 6 components")
    ids += [0] * (6 - len(ids))
    return np.random.Generator(np.random.Philox(key=ids[:2], counter=ids[2:6]))


@dataclass
class EpisodeRecord:
    """One realized episode: trajectory, observations shown, and regime."""

    episode: int
    regime: str
    states: np.ndarray        # (H+1,) int
    actions: np.ndarray       # (H,) int
    rewards: np.ndarray       # (H,) float, realized reward of the taken action
    observations: np.ndarray | None  # (H, A) reward or next-state vectors, or None

    @property
    def total_reward(self):
        return float(self.rewards.sum())


class TabularLookaheadMdp:
    """Tabular layered MDP with per-(h,s) joint reward and transition laws.

    reward_model and transition_model are nested lists indexed [h][s].
    Instances are immutable after construction; derived marginal tables are
    cached on first use.
    """

    def __init__(self, num_states, num_actions, horizon, reward_model,
                 transition_model, initial_states=(0,)):
        if num_states < 1 or num_actions < 1 or horizon < 1:
            raise ValueError("num_states, num_actions, horizon must be >= 1")
        self.num_states = int(num_states)
        self.num_actions = int(num_actions)
        self.horizon = int(horizon)
        self.initial_states = tuple(int(s) for s in initial_states)
        if not self.initial_states:
            raise ValueError("initial_states must be non-empty")
        if any(not 0 <= s < num_states for s in self.initial_states):
            raise ValueError("initial state out of range")
        self.reward_model = reward_model
        self.transition_model = transition_model
        self._check_model(reward_model, REWARD_DOMAIN)
        self._check_model(transition_model, STATE_DOMAIN)
        self._mean_rewards = None
        self._kernels = None

    def _check_model(self, model, domain):
        if len(model) != self.horizon:
            raise ValueError("model must have one row per step")
        for row in model:
            if len(row) != self.num_states:
                raise ValueError("model row must have one entry per state")
            for d in row:
                if d.arity != self.num_actions:
                    raise ValueError("distribution arity must equal num_actions")
                if d.domain != domain:
                    raise ValueError(f"expected {domain} distribution")
                if domain == STATE_DOMAIN and d.num_values != self.num_states:
                    raise ValueError("next-state support must match num_states")

    def initial_state(self, episode):
        """Round-robin over the schedule; episodes are 1-based."""
        return self.initial_states[(episode - 1) % len(self.initial_states)]

    def mean_rewards(self):
        """(H, S, A) expected rewards (marginal means of the reward joints)."""
        if self._mean_rewards is None:
            H, S, A = self.horizon, self.num_states, self.num_actions
            out = np.zeros((H, S, A))
            for h in range(H):
                for s in range(S):
                    out[h, s] = self.reward_model[h][s].means()
            self._mean_rewards = out
        return self._mean_rewards

    def transition_kernels(self):
        """(H, S, A, S) marginal next-state kernels of the transition joints."""
        if self._kernels is None:
            H, S, A = self.horizon, self.num_states, self.num_actions
            out = np.zeros((H, S, A, S))
            for h in range(H):
                for s in range(S):
                    d = self.transition_model[h][s]
                    for a in range(A):
                        out[h, s, a] = d.marginal_probs(a)
            self._kernels = out
        return self._kernels

    # -- serialization ------------------------------------------------------

    def to_dict(self):
        return {
            "S": self.num_states,
            "A": self.num_actions,
            "H": self.horizon,
            "initial_states": list(self.initial_states),
            "rewards": [[d.to_dict() for d in row] for row in self.reward_model],
            "transitions": [[d.to_dict() for d in row] for row in self.transition_model],
        }

    @classmethod
    def from_dict(cls, data):
        S, A, H = int(data["S"]), int(data["A"]), int(data["H"])
        rewards = [[JointFiniteDistribution.from_dict(d, REWARD_DOMAIN, A)
                    for d in row] for row in data["rewards"]]
        transitions = [[JointFiniteDistribution.from_dict(d, STATE_DOMAIN, A, num_values=S)
                        for d in row] for row in data["transitions"]]
        return cls(S, A, H, rewards, transitions,
                   initial_states=data.get("initial_states", (0,)))

    def save(self, path):
        with open(path, "w") as f:
            json.dump(self.to_dict(), f)
            f.write("\n")

    @classmethod
    def load(cls, path):
        with open(path) as f:
            return cls.from_dict(json.load(f))


def run_episode(mdp, agent, regime, episode, seed):
    """Roll one episode and return its EpisodeRecord.

    The agent must expose `regime` and `act(h, s, observation) -> action`.
    Rewards and next states are always drawn from the full joints; the regime
    only controls which vector the agent is shown before acting.
    """
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}")
    if getattr(agent, "regime", None) != regime:
        raise AgentContractError(
            f"agent regime {getattr(agent, 'regime', None)!r} does not match {regime!r}")
    if episode < 1:
        raise ValueError("episodes are numbered from 1")

    H, A = mdp.horizon, mdp.num_actions
    states = np.zeros(H + 1, dtype=int)
    actions = np.zeros(H, dtype=int)
    rewards = np.zeros(H)
    if regime == "reward":
        observations = np.zeros((H, A))
    elif regime == "transition":
        observations = np.zeros((H, A), dtype=int)
    else:
        observations = None

    s = mdp.initial_state(episode)
    states[0] = s
    for h in range(H):
        rvec = mdp.reward_model[h][s].sample(
            RngStream(seed, episode, h, "reward").generator())
        svec = mdp.transition_model[h][s].sample(
            RngStream(seed, episode, h, "transition").generator())
        if regime == "reward":
            obs = rvec
        elif regime == "transition":
            obs = svec
        else:
            obs = None
        if observations is not None:
            observations[h] = obs
        a = agent.act(h, s, obs)
        try:
            a = int(a)
        except (TypeError, ValueError):
            raise AgentContractError(f"agent returned non-integer action {a!r}")
        if not 0 <= a < A:
            raise AgentContractError(
                f"agent returned action {a} outside [0, {A}) at step {h}")
        actions[h] = a
        rewards[h] = rvec[a]
        s = int(svec[a])
        states[h + 1] = s

    return EpisodeRecord(episode=episode, regime=regime, states=states,
                         actions=actions, rewards=rewards, observations=observations)
