"""Within-session protocol, ITR arithmetic and report files."""

import numpy as np
import pytest

from p300bci.errors import BadArgument, InsufficientTraining, MissingLabels
from p300bci.evaluate import (
    METHOD_ASAP,
    METHOD_OM,
    PipelineConfig,
    emit_report,
    infer_flashes_per_repetition,
    itr,
    read_metrics_csv,
    run_within_session,
)
from p300bci.features import FlashEvent
from p300bci.sessionio import SessionRecord
from p300bci.simulate import PSEUDO_RANDOM, SimConfig, generate_session

LOG2_36 = 5.169925001442312


def simulated(n_episodes=9, reps=2, seed=0, **kwargs):
    cfg = SimConfig(L=36, C=4, n_repetitions=reps, seed=seed, **kwargs)
    targets = np.random.default_rng(seed).integers(0, 36, size=n_episodes)
    return generate_session(cfg, targets)


class TestItr:
    def test_perfect_accuracy_is_log2_choices(self):
        assert itr(1.0, 36, 60.0) == pytest.approx(LOG2_36, abs=1e-6)

    def test_chance_accuracy_is_zero(self):
        assert itr(1.0 / 36.0, 36, 60.0) == pytest.approx(0.0, abs=1e-12)
        assert itr(1.0 / 36.0, 36, 3.0) == pytest.approx(0.0, abs=1e-12)

    def test_floored_below_chance(self):
        assert itr(0.0, 36, 60.0) >= 0.0
        assert itr(0.01, 36, 60.0) >= 0.0

    def test_strictly_increasing_above_chance(self):
        grid = np.linspace(1.0 / 36.0, 1.0, 50)
        values = [itr(p, 36, 6.0) for p in grid]
        assert all(a < b for a, b in zip(values, values[1:]))

    def test_faster_selections_give_more_bits(self):
        assert itr(0.8, 36, 3.0) == pytest.approx(2.0 * itr(0.8, 36, 6.0))

    @pytest.mark.parametrize(
        "args", [(-0.1, 36, 60.0), (1.1, 36, 60.0), (0.5, 1, 60.0), (0.5, 36, 0.0)]
    )
    def test_bad_arguments(self, args):
        with pytest.raises(BadArgument):
            itr(*args)


class TestFlashesPerRepetition:
    def test_row_column_stream(self):
        session = simulated(n_episodes=2, reps=1)
        assert infer_flashes_per_repetition(session) == 12

    def test_group_stream(self):
        session = simulated(n_episodes=2, reps=1, flash_mode=PSEUDO_RANDOM)
        assert infer_flashes_per_repetition(session) == 6


class TestRunWithinSession:
    def test_noiseless_session_is_perfect_everywhere(self):
        # flashes spaced one epoch apart: without noise the epochs are then
        # exactly separable (overlapping flashes would share the deterministic
        # response and blur the single-trial classes)
        session = simulated(n_episodes=9, reps=2, seed=1, noise_scale=0.0, soa_ms=1000.0)
        report = run_within_session(session)
        assert np.array_equal(report.accuracy[METHOD_ASAP], np.ones(2))
        assert np.array_equal(report.accuracy[METHOD_OM], np.ones(2))
        assert report.n_episodes == 3
        assert report.n_repetitions == 2

    def test_training_set_too_small(self):
        session = simulated(n_episodes=6, reps=1, seed=2)
        with pytest.raises(InsufficientTraining):
            run_within_session(session)

    def test_unlabeled_flashes_rejected(self):
        session = simulated(n_episodes=8, reps=1, seed=3)
        events = [
            FlashEvent(ev.onset, ev.flashed, ev.episode, None) for ev in session.events
        ]
        broken = SessionRecord(
            recording=session.recording,
            events=events,
            L=session.L,
            grid_rows=session.grid_rows,
            grid_cols=session.grid_cols,
            soa_ms=session.soa_ms,
            epoch_seconds=session.epoch_seconds,
        )
        with pytest.raises(MissingLabels):
            run_within_session(broken)

    def test_aggregates_match_independent_recount(self):
        session = simulated(n_episodes=10, reps=3, seed=4, erp_amplitude=0.8)
        report = run_within_session(session)
        for method in (METHOD_ASAP, METHOD_OM):
            for r in range(report.n_repetitions):
                correct = [o.decided[method][r] == o.target for o in report.episodes]
                assert report.accuracy[method][r] == pytest.approx(np.mean(correct))
                expected_itr = itr(
                    report.accuracy[method][r], 36, report.seconds_per_selection[r]
                )
                assert report.itr_bits_per_min[method][r] == pytest.approx(expected_itr)

    def test_seconds_per_selection_uses_flash_timing(self):
        session = simulated(n_episodes=8, reps=2, seed=5)
        report = run_within_session(session)
        # 12 flashes x 0.25 s per repetition, no overhead
        assert np.allclose(report.seconds_per_selection, [3.0, 6.0])
        config = PipelineConfig(overhead_seconds=2.0)
        report = run_within_session(session, config)
        assert np.allclose(report.seconds_per_selection, [5.0, 8.0])

    def test_posterior_snapshots_are_probabilities(self):
        session = simulated(n_episodes=8, reps=2, seed=6)
        report = run_within_session(session)
        for method in (METHOD_ASAP, METHOD_OM):
            assert np.all(report.mean_target_posterior[method] >= 0.0)
            assert np.all(report.mean_target_posterior[method] <= 1.0)
            assert np.all(report.mean_nontarget_posterior[method] >= 0.0)

    def test_traces_cover_every_flash_and_character(self):
        session = simulated(n_episodes=7, reps=1, seed=7)
        report = run_within_session(session, collect_traces=True)
        # one test episode, 12 flashes, 36 characters
        assert len(report.traces[METHOD_ASAP]) == 12 * 36
        final = [p for (_, t, _, p) in report.traces[METHOD_ASAP] if t == 12]
        assert sum(final) == pytest.approx(1.0, abs=1e-9)


class TestEmitReport:
    def test_metrics_rows_and_roundtrip(self, tmp_path):
        session = simulated(n_episodes=9, reps=3, seed=8)
        report = run_within_session(session)
        paths = emit_report(report, tmp_path)
        rows = read_metrics_csv(paths["metrics.csv"])
        assert len(rows) == 2 * 3  # two methods, three repetitions
        by_key = {(r["method"], r["repetition"]): r for r in rows}
        for method in (METHOD_ASAP, METHOD_OM):
            for r in range(3):
                row = by_key[(method, r + 1)]
                assert row["accuracy"] == report.accuracy[method][r]
                assert row["itr_bits_per_min"] == report.itr_bits_per_min[method][r]
                assert row["n_episodes"] == report.n_episodes

    def test_trace_files_written_when_collected(self, tmp_path):
        session = simulated(n_episodes=7, reps=1, seed=9)
        report = run_within_session(session, collect_traces=True)
        paths = emit_report(report, tmp_path)
        assert paths["trace_asap.csv"].exists()
        assert paths["trace_om.csv"].exists()
        header = paths["trace_asap.csv"].read_text().splitlines()[0]
        assert header == "episode_id,t,character,probability"

    def test_insufficient_training_leaves_no_files(self, tmp_path):
        session = simulated(n_episodes=5, reps=1, seed=10)
        out = tmp_path / "report"
        with pytest.raises(InsufficientTraining):
            emit_report(run_within_session(session), out)
        assert not out.exists()
