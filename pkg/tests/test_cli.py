from pathlib import Path

from trialbandit.cli import main

ROOT = Path(__file__).resolve().parents[1]


def test_synth_subcommand(tmp_path, capsys):
    code = main([
        "synth",
        "--config", str(ROOT / "configs" / "synthetic_ist.toml"),
        "--runs", "2",
        "--seed", "11",
        "--policies", "random,ucb",
        "--out", str(tmp_path),
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "ucb" in out and "of random" in out
    assert sorted(p.name for p in tmp_path.glob("summary_*.csv")) == ["summary_random.csv", "summary_ucb.csv"]
    assert (tmp_path / "plot_ucb_suboptimal.dat").exists()
    assert (tmp_path / "steps_random_1.csv").exists()


def test_replay_subcommand_contextual_flag(tmp_path, capsys):
    code = main([
        "replay",
        "--config", str(ROOT / "configs" / "fixture_replay.toml"),
        "--runs", "2",
        "--contextual", "false",
        "--workers", "1",
        "--out", str(tmp_path),
    ])
    assert code == 0
    assert "mode=context-free" in capsys.readouterr().out
    assert len((tmp_path / "steps_thompson_0.csv").read_text().splitlines()) == 41


def test_errors_exit_nonzero(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text('policies = ["exp3"]\n[synthetic]\ntheta = [[0.5]]\nhorizon = 5\n')
    assert main(["synth", "--config", str(bad)]) == 2
    assert "unknown policy" in capsys.readouterr().err
    assert main(["replay", "--config", str(ROOT / "configs" / "synthetic_ist.toml")]) == 2
