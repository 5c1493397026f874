"""Command-line interface: exit statuses, determinism, table output."""

import filecmp

import pytest

from p300bci.cli import main
from p300bci.sessionio import SIGNAL_FILE, read_session


def run(argv):
    return main(argv)


def simulate_args(out, **overrides):
    # SOA of one full epoch: zero-noise sessions are exactly separable
    args = {
        "sessions": "1",
        "chars": "8",
        "reps": "2",
        "channels": "4",
        "noise-scale": "0.0",
        "soa-ms": "1000",
        "seed": "7",
    }
    args.update(overrides)
    argv = ["simulate", "--out", str(out)]
    for key, value in args.items():
        argv += [f"--{key}", value]
    return argv


class TestSimulate:
    def test_identical_seeds_give_byte_identical_sessions(self, tmp_path, capsys):
        assert run(simulate_args(tmp_path / "a", sessions="2")) == 0
        assert run(simulate_args(tmp_path / "b", sessions="2")) == 0
        for sub in ("sim-00", "sim-01"):
            for name in ("session.json", "signal.f32le", "events.csv"):
                assert filecmp.cmp(
                    tmp_path / "a" / sub / name, tmp_path / "b" / sub / name, shallow=False
                )
        assert len(capsys.readouterr().out.splitlines()) == 4

    def test_trial_counts_match_speller_regime(self, tmp_path):
        # 35 characters at 10 repetitions on a 6x6 grid: 20 target and 100
        # non-target trials per spelled character
        assert run(simulate_args(tmp_path, chars="35", reps="10")) == 0
        session = read_session(tmp_path / "sim-00")
        for episode in session.episode_ids():
            events = session.episode_events(episode)
            n_target = sum(ev.is_target for ev in events)
            assert n_target == 20
            assert len(events) - n_target == 100

    def test_missing_out_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["simulate", "--sessions", "1"])
        assert exc.value.code == 2

    def test_run_json_reproduces_bitwise(self, tmp_path):
        assert run(simulate_args(tmp_path / "a", seed="123")) == 0
        assert (
            run(["simulate", "--out", str(tmp_path / "b"),
                 "--from-run", str(tmp_path / "a" / "run.json")])
            == 0
        )
        for name in ("session.json", "signal.f32le", "events.csv"):
            assert filecmp.cmp(
                tmp_path / "a" / "sim-00" / name, tmp_path / "b" / "sim-00" / name,
                shallow=False,
            )


class TestEvaluate:
    def test_noiseless_table_shows_ones(self, tmp_path, capsys):
        run(simulate_args(tmp_path / "sim"))
        code = main(
            ["evaluate", "--input", str(tmp_path / "sim" / "sim-00"),
             "--out", str(tmp_path / "report"), "--no-traces"]
        )
        assert code == 0
        out = capsys.readouterr().out
        lines = [ln for ln in out.splitlines() if ln.strip()]
        header = next(ln for ln in lines if "rep" in ln)
        assert "ASAP" in header and "MDM+OM" in header
        data_rows = [ln for ln in lines if ln.strip().startswith(("1 ", "2 "))]
        assert len(data_rows) == 2  # two repetitions
        for row in data_rows:
            cells = row.split()
            assert cells[1] == "1.00" and cells[2] == "1.00"
        assert (tmp_path / "report" / "metrics.csv").exists()
        assert (tmp_path / "report" / "run.json").exists()

    def test_multiple_sessions_in_one_run(self, tmp_path, capsys):
        run(simulate_args(tmp_path / "sim", sessions="2"))
        code = main(
            ["evaluate",
             "--input", str(tmp_path / "sim" / "sim-00"), str(tmp_path / "sim" / "sim-01"),
             "--out", str(tmp_path / "report"), "--no-traces"]
        )
        assert code == 0
        for sub in ("sim-00", "sim-01"):
            assert (tmp_path / "report" / sub / "metrics.csv").exists()
        merged = (tmp_path / "report" / "metrics.csv").read_text().splitlines()
        assert len(merged) == 1 + 2 * 2 * 2  # two sessions x two methods x two reps

    def test_corrupt_signal_fails_loudly(self, tmp_path, capsys):
        run(simulate_args(tmp_path / "sim"))
        signal = tmp_path / "sim" / "sim-00" / SIGNAL_FILE
        signal.write_bytes(signal.read_bytes()[:-8])
        code = main(
            ["evaluate", "--input", str(tmp_path / "sim" / "sim-00"),
             "--out", str(tmp_path / "report")]
        )
        assert code == 1
        assert "signal.f32le" in capsys.readouterr().err
        assert not (tmp_path / "report" / "metrics.csv").exists()


class TestTrainReplay:
    def test_train_then_replay_prints_per_flash_posteriors(self, tmp_path, capsys):
        run(simulate_args(tmp_path / "sim"))
        session_dir = str(tmp_path / "sim" / "sim-00")
        model_path = tmp_path / "model.bin"
        assert main(["train", "--input", session_dir, "--model-out", str(model_path)]) == 0
        assert model_path.exists()
        capsys.readouterr()

        assert main(
            ["replay", "--input", session_dir, "--model", str(model_path),
             "--episode", "7"]
        ) == 0
        out = capsys.readouterr().out
        lines = out.splitlines()
        assert lines[0] == "episode 7:"
        flash_lines = [ln for ln in lines if "t=" in ln]
        assert len(flash_lines) == 24  # 2 repetitions x 12 flashes
        assert all("ASAP" in ln and "MDM+OM" in ln for ln in flash_lines)

    def test_replay_missing_model_is_runtime_error(self, tmp_path, capsys):
        run(simulate_args(tmp_path / "sim"))
        code = main(
            ["replay", "--input", str(tmp_path / "sim" / "sim-00"),
             "--model", str(tmp_path / "missing.bin")]
        )
        assert code == 1


class TestReport:
    def test_merges_metric_csvs(self, tmp_path, capsys):
        run(simulate_args(tmp_path / "sim", sessions="2"))
        for i in range(2):
            main(
                ["evaluate", "--input", str(tmp_path / "sim" / f"sim-0{i}"),
                 "--out", str(tmp_path / f"rep{i}"), "--no-traces"]
            )
        capsys.readouterr()
        merged = tmp_path / "merged.csv"
        code = main(
            ["report", "--inputs", str(tmp_path / "rep0" / "metrics.csv"),
             str(tmp_path / "rep1" / "metrics.csv"), "--out", str(merged)]
        )
        assert code == 0
        lines = merged.read_text().splitlines()
        assert lines[0].startswith("method,")
        assert len(lines) == 1 + 2 * 2 * 2  # two files x two methods x two reps
