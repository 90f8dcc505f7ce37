"""Command-line front end.

Subcommands: make-env, plan, learn, sweep, report, selftest.  Exit codes:
0 success, 1 check or run failure, 2 input error (bad flags, missing or
corrupt files).
"""

import argparse
import csv
import json
import sys

from .envs import make_env
from .harness import ExperimentConfig, run_experiment, sweep
from .mdp import REGIMES, TabularLookaheadMdp
from .planning import (plan_no_lookahead, plan_reward_lookahead,
                       plan_transition_lookahead)
from .report import generate_report
from .selftest import run_selftest

INPUT_ERRORS = (FileNotFoundError, NotADirectoryError, IsADirectoryError,
                PermissionError, ValueError, KeyError,
                json.JSONDecodeError)


def _parse_floats(text):
    return [float(x) for x in text.split(",") if x.strip() != ""]


def _parse_ints(text):
    return [int(x) for x in text.split(",") if x.strip() != ""]


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lookahead-rl",
        description="Tabular RL with one-step reward or transition lookahead: "
                    "environments, exact planning, learners, sweeps, reports.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("make-env", help="construct an environment JSON file")
    p.add_argument("--family", required=True,
                   choices=["fig1-prophet", "transition-chain",
                            "prophet-chain", "random"])
    p.add_argument("--A", type=int, help="number of actions")
    p.add_argument("--H", type=int, help="horizon")
    p.add_argument("--S", type=int, help="number of states (random family)")
    p.add_argument("--n", type=int, help="stage count (prophet-chain)")
    p.add_argument("--seed", type=int, default=0, help="random family seed")
    p.add_argument("--correlated", action="store_true",
                   help="random family: correlated joint transitions")
    p.add_argument("--bernoulli-means", type=str, default=None,
                   help="prophet-chain: comma list of stage Bernoulli means")
    p.add_argument("--point-values", type=str, default=None,
                   help="prophet-chain: comma list of deterministic offers")
    p.add_argument("--out", required=True, help="output JSON path")
    p.set_defaults(func=cmd_make_env)

    p = sub.add_parser("plan", help="exact or sampled planning on an env file")
    p.add_argument("--env", required=True, help="environment JSON path")
    p.add_argument("--regime", required=True, choices=list(REGIMES))
    p.add_argument("--method", default="exact",
                   choices=["exact", "list", "sample"])
    p.add_argument("--samples", type=int, default=1000,
                   help="draws per (h, s) for --method sample")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="optional CSV path (h,s,value)")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("learn", help="run a learner and record regret curves")
    p.add_argument("--env", required=True, help="environment JSON path")
    p.add_argument("--regime", required=True, choices=list(REGIMES))
    p.add_argument("--algo", required=True,
                   choices=["mvp-rl", "mvp-tl", "mvp-vanilla", "oracle"])
    p.add_argument("--episodes", type=int, required=True)
    p.add_argument("--seeds", type=str, default="1", help="comma list")
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--reward-scale", type=float, default=1.0,
                   help="multiplier on the reward bonus")
    p.add_argument("--transition-scale", type=float, default=1.0,
                   help="multiplier on the transition bonus")
    p.add_argument("--regret-mode", default="exact-eval",
                   choices=["exact-eval", "realized-return"])
    p.add_argument("--config-id", default=None,
                   help="run label (default: the algo name)")
    p.add_argument("--out-dir", default=None, help="where to write run CSVs")
    p.add_argument("--checkpoint-every", type=int, default=0,
                   help="serialize the learner store every N episodes")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("sweep", help="run a JSON list of experiment configs")
    p.add_argument("--config", required=True, help="JSON file: list of configs")
    p.add_argument("--parallelism", type=int, default=None,
                   help="max concurrent (config, seed) runs "
                        "(default: LOOKAHEAD_RL_THREADS or CPU count)")
    p.add_argument("--out-dir", default=None,
                   help="fallback output directory for configs without one")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="summary CSV + SVG chart from run CSVs")
    p.add_argument("--run-dir", required=True)
    p.add_argument("--out-dir", default=None, help="default: the run dir")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("selftest",
                       help="hermetic correctness checks; exit 0 iff all pass")
    p.set_defaults(func=cmd_selftest)
    return parser


def cmd_make_env(args):
    params = {}
    if args.family in ("fig1-prophet", "transition-chain"):
        if args.A is None or args.H is None:
            raise ValueError(f"{args.family} needs --A and --H")
        params = {"num_actions": args.A, "horizon": args.H}
    elif args.family == "prophet-chain":
        if args.bernoulli_means is not None:
            params["bernoulli_means"] = _parse_floats(args.bernoulli_means)
        elif args.point_values is not None:
            params["point_values"] = _parse_floats(args.point_values)
        else:
            raise ValueError(
                "prophet-chain needs --bernoulli-means or --point-values")
        stages = next(iter(params.values()))
        if args.n is not None and args.n != len(stages):
            raise ValueError(f"--n {args.n} does not match the {len(stages)} "
                             "stage values given")
    else:
        if args.S is None or args.A is None or args.H is None:
            raise ValueError("random needs --S, --A and --H")
        params = {"num_states": args.S, "num_actions": args.A,
                  "horizon": args.H, "seed": args.seed,
                  "independent": not args.correlated}
    mdp = make_env(args.family, **params)
    mdp.save(args.out)
    print(f"wrote {args.out} (S={mdp.num_states}, A={mdp.num_actions}, "
          f"H={mdp.horizon})")
    return 0


def cmd_plan(args):
    mdp = TabularLookaheadMdp.load(args.env)
    if args.regime == "none":
        if args.method != "exact":
            raise ValueError("regime none only supports --method exact")
        table, _ = plan_no_lookahead(mdp)
    elif args.regime == "reward":
        if args.method == "list":
            raise ValueError("ranked-list planning is a transition-regime method")
        table, _ = plan_reward_lookahead(mdp, method=args.method,
                                         samples=args.samples, seed=args.seed)
    else:
        method = {"exact": "exact-joint", "list": "exact-list",
                  "sample": "sample"}[args.method]
        table, _ = plan_transition_lookahead(mdp, method=method,
                                             samples=args.samples,
                                             seed=args.seed)
    if args.out:
        with open(args.out, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(("h", "s", "value"))
            for h in range(mdp.horizon):
                for s in range(mdp.num_states):
                    w.writerow((h + 1, s, repr(float(table.values[h, s]))))
        print(f"wrote {args.out}")
    for s in sorted(set(mdp.initial_states)):
        print(f"V1(s={s}) = {float(table.values[0, s])!r}")
    return 0


def cmd_learn(args):
    learner = {"algo": args.algo, "delta": args.delta,
               "bonus_scale": {"reward": args.reward_scale,
                               "transition": args.transition_scale}}
    config = ExperimentConfig(
        config_id=args.config_id or args.algo, env=args.env,
        regime=args.regime, learner=learner, episodes=args.episodes,
        seeds=tuple(_parse_ints(args.seeds)), regret_mode=args.regret_mode,
        out_dir=args.out_dir, checkpoint_every=args.checkpoint_every)
    curves, summary = run_experiment(config)
    for curve in curves:
        print(f"seed {curve.seed}: final regret {curve.cum_regret[-1]:.4f} "
              f"over {curve.k.size} episodes")
    print(f"{summary['config_id']}: mean final regret "
          f"{summary['final_regret_mean']:.4f} "
          f"+- {summary['final_regret_se']:.4f} (slope {summary['slope']:.3f})")
    return 0


def cmd_sweep(args):
    with open(args.config) as f:
        data = json.load(f)
    if isinstance(data, dict):
        data = [data]
    if not isinstance(data, list) or not data:
        raise ValueError("sweep config must be a non-empty JSON list")
    configs = [ExperimentConfig.from_dict(d) for d in data]
    summaries, failures = sweep(configs, parallelism=args.parallelism,
                                out_dir=args.out_dir)
    for row in summaries:
        print(f"{row['config_id']}: seeds={row['seeds']} K={row['K']} "
              f"final={row['final_regret_mean']:.4f}"
              f"+-{row['final_regret_se']:.4f} slope={row['slope']:.3f}")
    for (cid, seed), msg in failures.items():
        print(f"FAILED {cid} seed {seed}: {msg}", file=sys.stderr)
    return 1 if failures else 0


def cmd_report(args):
    summary_path, svg_path = generate_report(args.run_dir, args.out_dir)
    print(f"wrote {summary_path}")
    print(f"wrote {svg_path}")
    return 0


def cmd_selftest(args):
    return run_selftest()


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return 0 if err.code in (0, None) else 2
    try:
        return args.func(args)
    except INPUT_ERRORS as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
