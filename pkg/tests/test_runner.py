import filecmp
from pathlib import Path

import numpy as np
import pytest

from trialbandit import runner as runner_mod
from trialbandit.environment import MissingCellError, OutcomeModel
from trialbandit.ingest import ColumnMapping
from trialbandit.policies import PolicyKind
from trialbandit.runner import (
    ExperimentConfig,
    SyntheticSpec,
    config_from_dict,
    emit_plot_data,
    load_config,
    run_experiment,
)

ROOT = Path(__file__).resolve().parents[1]
FIXTURE = ROOT / "src" / "trialbandit" / "data" / "ist_fixture.csv"
ALL = tuple(PolicyKind)


def synth(theta=((0.55, 0.60, 0.50, 0.65),), horizon=300, **kw):
    kw.setdefault("runs", 3)
    kw.setdefault("seed", 5)
    return ExperimentConfig(synthetic=SyntheticSpec(theta=theta, horizon=horizon), **kw)


def same_files(a: Path, b: Path, pattern="*"):
    names = sorted(p.name for p in a.glob(pattern))
    assert names and names == sorted(p.name for p in b.glob(pattern))
    match, mismatch, errors = filecmp.cmpfiles(a, b, names, shallow=False)
    assert not mismatch and not errors, mismatch
    return names


def test_single_context_modes_give_identical_step_logs(tmp_path):
    for flag in (False, True):
        run_experiment(synth(policies=ALL, contextual=flag, output_dir=tmp_path / str(flag)))
    names = same_files(tmp_path / "False", tmp_path / "True", "steps_*.csv")
    assert len(names) == 4 * 3


def test_replay_single_context_modes_identical(tmp_path):
    mapping = ColumnMapping(context_cols=())
    for flag in (False, True):
        cfg = ExperimentConfig(dataset=FIXTURE, mapping=mapping, runs=2, contextual=flag, policies=ALL, output_dir=tmp_path / str(flag))
        run_experiment(cfg)
    same_files(tmp_path / "False", tmp_path / "True", "steps_*.csv")


def test_rerun_is_byte_identical_and_worker_independent(tmp_path):
    theta = ((0.3, 0.6, 0.5, 0.4), (0.7, 0.2, 0.5, 0.4))
    base = dict(theta=theta, horizon=400, policies=ALL, contextual=True, runs=4, seed=99)
    run_experiment(synth(output_dir=tmp_path / "a", **base))
    run_experiment(synth(output_dir=tmp_path / "b", **base))
    run_experiment(synth(output_dir=tmp_path / "c", workers=2, **base))
    same_files(tmp_path / "a", tmp_path / "b")
    same_files(tmp_path / "a", tmp_path / "c")


def test_policy_isolation(tmp_path):
    run_experiment(synth(policies=ALL, output_dir=tmp_path / "all"))
    run_experiment(synth(policies=("thompson",), output_dir=tmp_path / "one"))
    run_experiment(synth(policies=("ucb", "thompson"), output_dir=tmp_path / "two"))
    same_files(tmp_path / "all", tmp_path / "one", "steps_thompson_*.csv")
    same_files(tmp_path / "all", tmp_path / "two", "steps_thompson_*.csv")


def test_common_random_numbers_across_policies():
    bundle = run_experiment(synth(policies=("random", "ucb"), runs=2), keep_logs=True)
    for run in range(2):
        env, _ = runner_mod.policy_streams(5, run, PolicyKind.RANDOM)
        u = env.random(300)
        for policy in ("random", "ucb"):
            log = bundle.logs[(policy, run)]
            # every outcome is the shared uniform thresholded at the chosen arm's theta
            assert np.array_equal(log.outcome, (u < log.theta_chosen).astype(int))


def test_one_select_draw_update_per_participant(monkeypatch):
    calls = {"select": 0, "draw": 0, "update": 0}
    real_select, real_update, real_draw = runner_mod.select_arm, runner_mod.update, OutcomeModel.draw

    def count(name, fn):
        def wrapped(*a, **kw):
            calls[name] += 1
            return fn(*a, **kw)

        return wrapped

    monkeypatch.setattr(runner_mod, "select_arm", count("select", real_select))
    monkeypatch.setattr(runner_mod, "update", count("update", real_update))
    monkeypatch.setattr(OutcomeModel, "draw", count("draw", real_draw))
    run_experiment(synth(policies=("thompson", "random"), runs=2, horizon=250))
    assert calls == {"select": 1000, "draw": 1000, "update": 1000}


def test_plot_files_shape_and_monotone(tmp_path):
    bundle = run_experiment(synth(runs=3, horizon=120, output_dir=tmp_path))
    for policy in ("random", "thompson", "ucb"):
        for metric in ("regret", "suboptimal"):
            lines = (tmp_path / f"plot_{policy}_{metric}.dat").read_text().splitlines()
            assert lines[0].split() == ["step", "mean", "band_low", "band_high"]
            assert len(lines) == 121
            cols = np.array([[float(v) for v in ln.split()] for ln in lines[1:]])
            assert np.all(np.diff(cols[:, 0]) == 1)
            assert np.all(np.diff(cols[:, 1]) >= -1e-9)
            assert np.all(cols[:, 2] <= cols[:, 3])
    paths = emit_plot_data(bundle, tmp_path / "again")
    assert len(paths) == 6


def test_identical_runs_have_collapsed_band_in_plot(tmp_path):
    # deterministic outcomes make every UCB run identical
    run_experiment(synth(theta=((1.0, 0.0, 0.0, 1.0),), policies=("ucb",), runs=4, horizon=60, output_dir=tmp_path))
    for metric in ("regret", "suboptimal"):
        rows = [ln.split() for ln in (tmp_path / f"plot_ucb_{metric}.dat").read_text().splitlines()[1:]]
        assert all(r[1] == r[2] == r[3] for r in rows)


def test_outputs_and_aggregate_document(tmp_path):
    import tomli

    bundle = run_experiment(synth(runs=2, output_dir=tmp_path))
    doc = tomli.loads((tmp_path / "aggregate.txt").read_text())
    assert doc["mode"] == "context-free"
    names = [p["policy"] for p in doc["policy"]]
    assert names == ["random", "thompson", "ucb"]
    rnd = doc["policy"][0]
    assert rnd["regret_ratio_vs_random_pct"] == 100
    th = doc["policy"][1]
    assert th["mean_final_regret"] == pytest.approx(bundle.aggregates["thompson"].mean_final_regret, rel=1e-8)
    header = (tmp_path / "summary_ucb.csv").read_text().splitlines()[0]
    assert header == "run,seed,final_regret,final_suboptimal,suboptimal_fraction"
    step_header = (tmp_path / "steps_ucb_0.csv").read_text().splitlines()[0]
    assert step_header == "step,context,arm,outcome,optimal_arm,theta_opt,theta_chosen"


def test_no_ratio_without_random_policy():
    bundle = run_experiment(synth(policies=("ucb",), runs=2))
    assert bundle.ratios == {}


def test_pooled_vs_context_truth():
    theta = ((0.5, 0.65, 0.5, 0.5), (0.65, 0.5, 0.5, 0.5))
    pooled = run_experiment(synth(theta=theta, policies=("random",), runs=1, horizon=200), keep_logs=True)
    log = pooled.logs[("random", 0)]
    assert set(log.context.tolist()) == {0}
    assert np.allclose(log.theta_opt, 0.575)
    per_ctx = run_experiment(
        synth(theta=theta, policies=("random",), runs=1, horizon=200, ground_truth="context"), keep_logs=True
    )
    log = per_ctx.logs[("random", 0)]
    assert set(log.context.tolist()) == {0, 1}
    assert np.all(log.optimal == np.where(log.context == 0, 1, 0))


def test_replay_fixture_modes():
    base = dict(dataset=FIXTURE, runs=2, policies=("random", "thompson"))
    ctx = run_experiment(ExperimentConfig(contextual=True, **base), keep_logs=True)
    free = run_experiment(ExperimentConfig(contextual=False, **base), keep_logs=True)
    assert ctx.aggregates["thompson"].horizon == 40
    assert set(ctx.logs[("random", 0)].context.tolist()) == {0, 1}
    assert set(free.logs[("random", 0)].context.tolist()) == {0}


def test_replay_missing_cell_propagates(tmp_path):
    # drop every AF-positive aspirin-only row: cell (context 1, arm 1) is empty
    lines = FIXTURE.read_text().splitlines()
    kept = [ln for ln in lines if not ln.split(",")[4:7] == ["Y", "Y", "N"]]
    assert len(kept) < len(lines)
    path = tmp_path / "holes.csv"
    path.write_text("\n".join(kept) + "\n")
    cfg = ExperimentConfig(dataset=path, contextual=True, runs=1)
    with pytest.raises(MissingCellError) as err:
        run_experiment(cfg)
    assert (err.value.context, err.value.arm) == (1, 1)
    bundle = run_experiment(ExperimentConfig(dataset=path, contextual=True, runs=1, smoothing=True))
    assert bundle.aggregates["random"].horizon == len(kept) - 1


def test_unwritable_output_dir(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        run_experiment(synth(output_dir=blocker / "sub"))


@pytest.mark.parametrize(
    "kw",
    [
        dict(runs=0),
        dict(policies=()),
        dict(policies=("ucb", "ucb")),
        dict(band=(80, 20)),
        dict(regret_mode="expected"),
        dict(ground_truth="pooled"),
        dict(seed=-1),
    ],
)
def test_config_validation(kw):
    with pytest.raises(ValueError):
        synth(**kw)


def test_config_requires_exactly_one_source():
    with pytest.raises(ValueError):
        ExperimentConfig()
    with pytest.raises(ValueError):
        ExperimentConfig(dataset=FIXTURE, synthetic=SyntheticSpec(((0.5,),), 10))


def test_synthetic_spec_validation():
    with pytest.raises(ValueError):
        SyntheticSpec(((0.5, 0.4),), horizon=0)
    with pytest.raises(ValueError):
        SyntheticSpec(((0.5,), (0.4,)), horizon=10, context_freq=(0.7, 0.7))
    with pytest.raises(ValueError):
        SyntheticSpec(((0.5,), (0.4,), (0.3,)), horizon=10)


def test_load_config_files():
    cfg = load_config(ROOT / "configs" / "fixture_replay.toml")
    assert cfg.dataset == (ROOT / "configs" / ".." / "src" / "trialbandit" / "data" / "ist_fixture.csv")
    assert cfg.mapping.context_cols == ("RATRIAL",)
    assert cfg.contextual is True
    syn = load_config(ROOT / "configs" / "synthetic_two_context.toml", runs=3, contextual=False)
    assert syn.runs == 3 and not syn.contextual
    assert syn.synthetic.context_freq == (0.5, 0.5)
    assert syn.ground_truth == "context"
    load_config(ROOT / "configs" / "synthetic_ist.toml")
    load_config(ROOT / "configs" / "ist_replay.toml")


def test_config_unknown_key_and_mode_filter(tmp_path):
    with pytest.raises(ValueError, match="unknown config keys"):
        config_from_dict({"polices": ["ucb"]})
    doc = {"dataset": str(FIXTURE), "synthetic": {"theta": [[0.5, 0.6]], "horizon": 10}}
    assert config_from_dict(doc, mode="synth").dataset is None
    assert config_from_dict(doc, mode="replay").synthetic is None
    with pytest.raises(ValueError):
        config_from_dict(doc)
