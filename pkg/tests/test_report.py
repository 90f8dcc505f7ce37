import pytest

from lookahead_rl.envs import make_random_mdp
from lookahead_rl.harness import ExperimentConfig, config_summary, sweep
from lookahead_rl.report import collect_runs, generate_report


def _config(**overrides):
    base = dict(config_id="c0", env=make_random_mdp(2, 2, 2, seed=3).to_dict(),
                regime="reward", learner={"algo": "mvp-rl"}, episodes=20)
    base.update(overrides)
    return ExperimentConfig(**base)


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("runs")
    configs = [
        _config(config_id="mvp-rl", episodes=30, seeds=(1, 2), out_dir=str(out)),
        _config(config_id="vanilla", episodes=30, seeds=(1,),
                learner={"algo": "mvp-vanilla"}, out_dir=str(out)),
    ]
    sweep(configs, parallelism=1, out_dir=str(out))
    return out


def test_collect_runs_groups_by_config(run_dir):
    groups = collect_runs(run_dir)
    assert sorted(groups) == ["mvp-rl", "vanilla"]
    assert [c.seed for c in groups["mvp-rl"]] == [1, 2]
    assert all(c.k.size == 30 for c in groups["vanilla"])


def test_generate_report_outputs(run_dir, tmp_path):
    summary_path, svg_path = generate_report(str(run_dir), str(tmp_path))
    summary = (tmp_path / "summary.csv").read_text().splitlines()
    assert summary[0].startswith("config_id,")
    assert len(summary) == 3
    svg = (tmp_path / "regret.svg").read_text()
    assert svg.startswith("<svg")
    assert "mvp-rl" in svg and "vanilla" in svg
    assert svg.count("<polyline") >= 2


def test_report_summary_matches_recomputation(run_dir, tmp_path):
    generate_report(str(run_dir), str(tmp_path))
    groups = collect_runs(run_dir)
    want = config_summary("mvp-rl", groups["mvp-rl"])
    lines = (tmp_path / "summary.csv").read_text().splitlines()
    row = next(line for line in lines if line.startswith("mvp-rl,"))
    cells = row.split(",")
    assert int(cells[1]) == want["seeds"]
    assert float(cells[3]) == want["final_regret_mean"]


def test_report_is_byte_deterministic(run_dir, tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    generate_report(str(run_dir), str(first))
    generate_report(str(run_dir), str(second))
    assert (first / "summary.csv").read_bytes() == (second / "summary.csv").read_bytes()
    assert (first / "regret.svg").read_bytes() == (second / "regret.svg").read_bytes()


def test_report_errors_name_paths(tmp_path):
    with pytest.raises(FileNotFoundError, match="nope"):
        generate_report(str(tmp_path / "nope"))
    empty = tmp_path / "empty"
    empty.mkdir()
    with pytest.raises(FileNotFoundError, match="empty"):
        generate_report(str(empty))
    bad = tmp_path / "bad"
    bad.mkdir()
    victim = bad / "x__seed1.csv"
    victim.write_text("seed,k,vstar,policy_value,cum_regret,elapsed_ms\n"
                      "1,1,0.0,zero,0.0,1.0\n")
    with pytest.raises(ValueError, match="x__seed1"):
        generate_report(str(bad))


def test_collect_runs_ignores_unrelated_files(run_dir):
    (run_dir / "notes.txt").write_text("scratch\n")
    (run_dir / "summary.csv").write_text("config_id\n")
    groups = collect_runs(run_dir)
    assert sorted(groups) == ["mvp-rl", "vanilla"]
