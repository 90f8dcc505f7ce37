"""Experiment orchestration: episode loops, regret curves, sweeps, CSV files.

Regret is accumulated against the exact lookahead-optimal value of the
episode's start state.  Default mode evaluates each episode's announced
policy exactly under the true model (low variance); realized-return mode
uses the rolled-out return instead, for models whose joint supports are too
large to enumerate.

Per-run CSV: seed,k,vstar,policy_value,cum_regret,elapsed_ms.
Summary CSV: config_id,seeds,K,final_regret_mean,final_regret_se,slope.
Floats are written with shortest-repr so rewrites are byte-identical;
elapsed_ms is wall clock and is the one column that varies across reruns.
"""

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .learners import ALGOS, make_learner
from .mdp import REGIMES, TabularLookaheadMdp, run_episode, substream
from .planning import (SUPPORT_CAP, CapacityError, ListPolicy, MarkovPolicy,
                       ThresholdPolicy, _list_actions_for_outcomes,
                       plan_no_lookahead, plan_reward_lookahead,
                       plan_transition_lookahead, evaluate_lookahead_policy)

RUN_COLUMNS = ("seed", "k", "vstar", "policy_value", "cum_regret", "elapsed_ms")
SUMMARY_COLUMNS = ("config_id", "seeds", "K", "final_regret_mean",
                   "final_regret_se", "slope")
REGRET_MODES = ("exact-eval", "realized-return")


@dataclass
class ExperimentConfig:
    """One learning run: environment, regime, learner, episode budget, seeds."""

    config_id: str
    env: object                  # file path, serialized dict, or mdp object
    regime: str
    learner: dict
    episodes: int
    seeds: tuple = (1,)
    regret_mode: str = "exact-eval"
    out_dir: str = None
    checkpoint_every: int = 0

    def __post_init__(self):
        if not self.config_id:
            raise ValueError("config_id must be non-empty")
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}")
        if self.episodes < 1:
            raise ValueError("episodes must be >= 1")
        self.seeds = tuple(int(s) for s in self.seeds)
        if not self.seeds:
            raise ValueError("seeds must be non-empty")
        if self.regret_mode not in REGRET_MODES:
            raise ValueError(f"unknown regret mode {self.regret_mode!r}")
        if self.checkpoint_every < 0:
            raise ValueError("checkpoint_every must be >= 0")
        algo = self.learner.get("algo")
        if algo not in ALGOS + ("oracle",):
            raise ValueError(f"unknown algo {algo!r}")
        needs = {"mvp-rl": "reward", "mvp-tl": "transition"}.get(algo)
        if needs is not None and self.regime != needs:
            raise ValueError(
                f"{algo} runs in the {needs!r} regime, not {self.regime!r}")

    @classmethod
    def from_dict(cls, data):
        known = {"config_id", "env", "regime", "learner", "episodes", "seeds",
                 "regret_mode", "out_dir", "checkpoint_every"}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**data)


@dataclass
class RegretCurve:
    """Per-episode regret accounting for one (config, seed) run."""

    seed: int
    k: np.ndarray
    vstar: np.ndarray
    policy_value: np.ndarray
    cum_regret: np.ndarray
    elapsed_ms: np.ndarray


def resolve_env(env):
    if isinstance(env, TabularLookaheadMdp):
        return env
    if isinstance(env, dict):
        return TabularLookaheadMdp.from_dict(env)
    return TabularLookaheadMdp.load(env)


def baseline_plan(mdp, regime, support_cap=SUPPORT_CAP):
    """Exact optimal values and policy for the given observation regime."""
    if regime == "none":
        return plan_no_lookahead(mdp)
    if regime == "reward":
        return plan_reward_lookahead(mdp, method="exact",
                                     support_cap=support_cap)
    all_product = all(d.kind == "product"
                     for row in mdp.transition_model for d in row)
    method = "exact-list" if all_product else "exact-joint"
    return plan_transition_lookahead(mdp, method=method,
                                     support_cap=support_cap)


class FixedPolicyAgent:
    """Wraps a fixed decision rule in the learner interface; never updates."""

    def __init__(self, policy):
        self.fixed = policy
        self.regime = policy.regime

    def start_episode(self, k):
        pass

    def act(self, h, s, observation):
        return self.fixed.act(h, s, observation)

    def update(self, record):
        pass

    def policy(self):
        return self.fixed

    def optimistic_value(self, s):
        return float("nan")


def run_single(config: ExperimentConfig, seed: int) -> RegretCurve:
    """One seed of one config, fully sequential (the online protocol)."""
    mdp = resolve_env(config.env)
    table, opt_policy = baseline_plan(mdp, config.regime)
    if config.learner.get("algo") == "oracle":
        agent = FixedPolicyAgent(opt_policy)
    else:
        agent = make_learner(config.learner, mdp.num_states, mdp.num_actions,
                             mdp.horizon, regime=config.regime)
    K = config.episodes
    vstar = np.zeros(K)
    policy_value = np.zeros(K)
    cum_regret = np.zeros(K)
    elapsed_ms = np.zeros(K)
    total = 0.0
    for k in range(1, K + 1):
        t0 = time.perf_counter()
        agent.start_episode(k)
        record = run_episode(mdp, agent, config.regime, k, seed)
        agent.update(record)
        s1 = int(record.states[0])
        vs = float(table.values[0, s1])
        if config.regret_mode == "exact-eval":
            try:
                pv = float(
                    evaluate_lookahead_policy(mdp, agent.policy()).values[0, s1])
            except CapacityError as err:
                raise CapacityError(f"episode {k}: {err}") from err
        else:
            pv = record.total_reward
        total += vs - pv
        vstar[k - 1] = vs
        policy_value[k - 1] = pv
        cum_regret[k - 1] = total
        elapsed_ms[k - 1] = (time.perf_counter() - t0) * 1e3
        if (config.checkpoint_every and config.out_dir
                and k % config.checkpoint_every == 0):
            _write_checkpoint(config, seed, k, agent)
    return RegretCurve(seed=seed, k=np.arange(1, K + 1), vstar=vstar,
                       policy_value=policy_value, cum_regret=cum_regret,
                       elapsed_ms=elapsed_ms)


def _write_checkpoint(config, seed, k, agent):
    store = getattr(agent, "store", None)
    if store is None:
        return
    path = os.path.join(config.out_dir,
                        f"{config.config_id}__seed{seed}.store.json")
    os.makedirs(config.out_dir, exist_ok=True)
    with open(path, "w") as f:
        f.write(store.to_json())


def run_experiment(config: ExperimentConfig, write=True):
    """All seeds of one config; returns (curves, summary row)."""
    curves = [run_single(config, seed) for seed in config.seeds]
    if write and config.out_dir:
        os.makedirs(config.out_dir, exist_ok=True)
        for curve in curves:
            write_run_csv(run_csv_path(config.out_dir, config.config_id,
                                       curve.seed), curve)
    return curves, config_summary(config.config_id, curves)


# -- regret statistics ------------------------------------------------------


def slope_estimate(cum_regret, window=0.5):
    """Log-log slope of cumulative regret over the trailing window fraction.

    Sublinear (roughly sqrt-K) growth shows up as a slope near 0.5; linear
    regret as 1.  Non-positive entries are excluded from the fit.
    """
    reg = np.asarray(cum_regret, dtype=float)
    K = reg.size
    if K < 100:
        raise ValueError("slope estimate needs K >= 100")
    if not 0.0 < window <= 1.0:
        raise ValueError("window must lie in (0, 1]")
    start = int(math.floor(K * (1.0 - window)))
    k = np.arange(1, K + 1)[start:]
    r = reg[start:]
    mask = r > 0
    if mask.sum() < 2:
        raise ValueError("slope undefined: fewer than two positive regret values")
    x = np.log(k[mask])
    y = np.log(r[mask])
    x = x - x.mean()
    denom = x @ x
    if denom <= 0:
        raise ValueError("slope undefined: degenerate abscissa")
    return float(x @ (y - y.mean()) / denom)


def config_summary(config_id, curves):
    """Summary row (dict) over the successful seeds of one config."""
    if not curves:
        raise ValueError("config summary needs at least one curve")
    K = curves[0].cum_regret.size
    if any(c.cum_regret.size != K for c in curves):
        raise ValueError("curves disagree on episode count")
    finals = np.array([c.cum_regret[-1] for c in curves])
    mean = float(finals.mean())
    se = float(finals.std(ddof=1) / math.sqrt(len(finals))) if len(finals) > 1 else 0.0
    mean_curve = np.mean([c.cum_regret for c in curves], axis=0)
    try:
        slope = slope_estimate(mean_curve)
    except ValueError:
        slope = float("nan")
    return {"config_id": config_id, "seeds": len(curves), "K": K,
            "final_regret_mean": mean, "final_regret_se": se, "slope": slope}


# -- sweeps -----------------------------------------------------------------


def default_parallelism():
    raw = os.environ.get("LOOKAHEAD_RL_THREADS", "").strip()
    if raw:
        return max(1, int(raw))
    return os.cpu_count() or 1


def _sweep_job(config, seed):
    return run_single(config, seed)


def sweep(configs, parallelism=None, out_dir=None):
    """Run every (config, seed) pair, write per-run CSVs plus summary.csv.

    Pairs run concurrently up to `parallelism` (default: LOOKAHEAD_RL_THREADS
    or the CPU count); results are aggregated in config order then seed
    order, so output is independent of scheduling.  A failed run is recorded
    as an error string and the sweep continues.

    Returns (summaries, failures): summary rows for configs with at least
    one surviving seed, and {(config_id, seed): message} for the rest.
    """
    ids = [c.config_id for c in configs]
    if len(set(ids)) != len(ids):
        raise ValueError("config_id values must be unique within a sweep")
    if parallelism is None:
        parallelism = default_parallelism()
    jobs = [(i, seed) for i, c in enumerate(configs) for seed in c.seeds]
    outcomes = {}
    if parallelism <= 1 or len(jobs) <= 1:
        for i, seed in jobs:
            try:
                outcomes[(i, seed)] = _sweep_job(configs[i], seed)
            except Exception as err:
                outcomes[(i, seed)] = f"{type(err).__name__}: {err}"
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            futures = {pool.submit(_sweep_job, configs[i], seed): (i, seed)
                       for i, seed in jobs}
            for future, key in futures.items():
                try:
                    outcomes[key] = future.result()
                except Exception as err:
                    outcomes[key] = f"{type(err).__name__}: {err}"

    summaries = []
    failures = {}
    for i, config in enumerate(configs):
        run_dir = config.out_dir or out_dir
        curves = []
        for seed in config.seeds:
            result = outcomes[(i, seed)]
            if isinstance(result, str):
                failures[(config.config_id, seed)] = result
                continue
            curves.append(result)
            if run_dir:
                os.makedirs(run_dir, exist_ok=True)
                write_run_csv(run_csv_path(run_dir, config.config_id, seed),
                              result)
        if curves:
            summaries.append(config_summary(config.config_id, curves))
    summary_dir = out_dir or next((c.out_dir for c in configs if c.out_dir), None)
    if summary_dir:
        os.makedirs(summary_dir, exist_ok=True)
        write_summary_csv(os.path.join(summary_dir, "summary.csv"), summaries)
        if failures:
            _write_failures(os.path.join(summary_dir, "failures.csv"), failures)
    return summaries, failures


def _write_failures(path, failures):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(("config_id", "seed", "error"))
        for (cid, seed), msg in failures.items():
            w.writerow((cid, seed, msg))


# -- CSV persistence --------------------------------------------------------


def run_csv_path(out_dir, config_id, seed):
    return os.path.join(out_dir, f"{config_id}__seed{seed}.csv")


def _fmt(x):
    return repr(float(x))


def write_run_csv(path, curve: RegretCurve):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(RUN_COLUMNS)
        for i in range(curve.k.size):
            w.writerow((curve.seed, int(curve.k[i]), _fmt(curve.vstar[i]),
                        _fmt(curve.policy_value[i]), _fmt(curve.cum_regret[i]),
                        "%.3f" % curve.elapsed_ms[i]))


def read_run_csv(path) -> RegretCurve:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"empty run CSV: {path}") from None
        if tuple(header) != RUN_COLUMNS:
            raise ValueError(f"bad run CSV header in {path}: {header}")
        rows = list(reader)
    if not rows:
        raise ValueError(f"run CSV has no data rows: {path}")
    try:
        data = np.array([[float(v) for v in row] for row in rows])
    except ValueError:
        raise ValueError(f"non-numeric cell in run CSV: {path}") from None
    if data.shape[1] != len(RUN_COLUMNS):
        raise ValueError(f"wrong column count in run CSV: {path}")
    return RegretCurve(seed=int(data[0, 0]), k=data[:, 1].astype(int),
                       vstar=data[:, 2], policy_value=data[:, 3],
                       cum_regret=data[:, 4], elapsed_ms=data[:, 5])


def write_summary_csv(path, summaries):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for row in summaries:
            w.writerow((row["config_id"], row["seeds"], row["K"],
                        _fmt(row["final_regret_mean"]),
                        _fmt(row["final_regret_se"]), _fmt(row["slope"])))


# -- batch simulation -------------------------------------------------------


def rollout_policy(mdp, policy, episodes, seed):
    """Simulate a fixed policy for many episodes at once.

    Draws are grouped by (step, state), so cost scales with H*S joint
    samples of batch width instead of per-episode loops.  Stream addressing
    differs from run_episode; use this for Monte Carlo statistics, not for
    replaying logged episodes.

    Returns (states (n, H+1), actions (n, H), rewards (n, H)).
    """
    n, H, S, A = episodes, mdp.horizon, mdp.num_states, mdp.num_actions
    rng = substream(seed, "rollout")
    states = np.zeros((n, H + 1), dtype=int)
    actions = np.zeros((n, H), dtype=int)
    rewards = np.zeros((n, H))
    init = np.asarray(mdp.initial_states, dtype=int)
    states[:, 0] = init[np.arange(n) % init.size]
    for h in range(H):
        cur = states[:, h]
        for s in range(S):
            idx = np.flatnonzero(cur == s)
            if idx.size == 0:
                continue
            rvec = mdp.reward_model[h][s].sample_many(rng, idx.size)
            svec = mdp.transition_model[h][s].sample_many(rng, idx.size)
            a = _batch_actions(policy, h, s, rvec, svec)
            rows = np.arange(idx.size)
            actions[idx, h] = a
            rewards[idx, h] = rvec[rows, a]
            states[idx, h + 1] = svec[rows, a]
    return states, actions, rewards


def _batch_actions(policy, h, s, rvec, svec):
    if isinstance(policy, ThresholdPolicy):
        return np.argmax(rvec + policy.offsets[h, s][None, :], axis=1)
    if isinstance(policy, ListPolicy):
        return _list_actions_for_outcomes(policy.lists[h][s], svec)
    if isinstance(policy, MarkovPolicy):
        return np.full(rvec.shape[0], int(policy.actions[h, s]), dtype=int)
    raise TypeError(f"cannot batch policy of type {type(policy).__name__}")
