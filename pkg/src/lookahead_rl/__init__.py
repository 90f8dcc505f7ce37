"""Tabular episodic RL with one-step reward or transition lookahead.

Environments are finite MDPs whose per-(step, state) reward and next-state
laws are joint finite distributions over all actions, so an agent can be
shown the realized vector before choosing.  The package provides exact
planners for the three observation regimes, optimistic learners with
sublinear regret, hard instances separating the regimes, and an experiment
harness with deterministic sweeps.
"""

from .distributions import (JointFiniteDistribution, bernoulli_marginal,
                            categorical_marginal, point_marginal)
from .mdp import (REGIMES, AgentContractError, EpisodeRecord, RngStream,
                  TabularLookaheadMdp, run_episode, substream)
from .planning import (CapacityError, ListPolicy, MarkovPolicy, RankedList,
                       ThresholdPolicy, ValueTable, build_ranked_list,
                       evaluate_lookahead_policy, plan_no_lookahead,
                       plan_reward_lookahead, plan_transition_lookahead,
                       rank_hit_distribution)
from .oracles import (best_markov_values, oracle_extended_reward,
                      oracle_extended_transition, rank_hit_by_enumeration)
from .envs import (make_env, make_fig1_prophet, make_prophet_chain,
                   make_random_mdp, make_transition_chain)
from .learners import (ALGOS, BonusConfig, EmpiricalStore, MvpRlLearner,
                       MvpTlLearner, MvpVanillaLearner, OptimisticPlan,
                       log_term_rl, log_term_tl, make_learner,
                       monotone_backup, mvp_rl_plan, mvp_tl_plan,
                       mvp_vanilla_plan)
from .harness import (ExperimentConfig, FixedPolicyAgent, RegretCurve,
                      baseline_plan, read_run_csv, rollout_policy,
                      run_experiment, run_single, slope_estimate, sweep,
                      write_run_csv, write_summary_csv)
from .report import generate_report, regret_chart_svg
from .selftest import run_selftest

__version__ = "0.1.0"

__all__ = [
    "ALGOS", "AgentContractError", "BonusConfig", "CapacityError",
    "EmpiricalStore", "EpisodeRecord", "ExperimentConfig", "FixedPolicyAgent",
    "JointFiniteDistribution", "ListPolicy", "MarkovPolicy", "MvpRlLearner",
    "MvpTlLearner", "MvpVanillaLearner", "OptimisticPlan", "REGIMES",
    "RankedList", "RegretCurve", "RngStream", "TabularLookaheadMdp",
    "ThresholdPolicy", "ValueTable", "baseline_plan", "bernoulli_marginal",
    "best_markov_values", "build_ranked_list", "categorical_marginal",
    "evaluate_lookahead_policy", "generate_report", "log_term_rl",
    "log_term_tl", "make_env", "make_fig1_prophet", "make_learner",
    "make_prophet_chain", "make_random_mdp", "make_transition_chain",
    "monotone_backup", "mvp_rl_plan", "mvp_tl_plan", "mvp_vanilla_plan",
    "oracle_extended_reward", "oracle_extended_transition", "plan_no_lookahead",
    "plan_reward_lookahead", "plan_transition_lookahead", "point_marginal",
    "rank_hit_by_enumeration", "rank_hit_distribution", "read_run_csv",
    "regret_chart_svg", "rollout_policy", "run_episode", "run_experiment",
    "run_selftest", "run_single", "slope_estimate", "substream", "sweep",
    "write_run_csv", "write_summary_csv",
]
