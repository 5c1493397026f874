"""Synthetic session generator: schedule structure, determinism, injected
signal, and trial-count arithmetic."""

import numpy as np
import pytest
from scipy import stats

from p300bci.classify import fit_mdm
from p300bci.errors import BadConfig
from p300bci.features import TARGET, epoch, estimate_prototype, extended_covariance
from p300bci.simulate import (
    PSEUDO_RANDOM,
    SimConfig,
    erp_template,
    flash_schedule,
    generate_session,
)
from p300bci.spd import squared_affine_distance


class TestFlashSchedule:
    def test_row_column_repetition_structure(self):
        cfg = SimConfig(L=36, n_repetitions=1, seed=1)
        events = flash_schedule(cfg, target=0)
        assert len(events) == 12
        appearances = np.zeros(36, dtype=int)
        for ev in events:
            for c in ev.flashed:
                appearances[c] += 1
        assert np.all(appearances == 2)

    def test_two_target_flashes_per_repetition(self):
        cfg = SimConfig(L=36, n_repetitions=4, seed=2)
        events = flash_schedule(cfg, target=0)
        for r in range(4):
            rep = events[r * 12 : (r + 1) * 12]
            assert sum(ev.is_target for ev in rep) == 2

    def test_deterministic_per_seed(self):
        cfg = SimConfig(L=36, n_repetitions=2, seed=3)
        a = flash_schedule(cfg, target=7)
        b = flash_schedule(cfg, target=7)
        assert a == b
        c = flash_schedule(SimConfig(L=36, n_repetitions=2, seed=4), target=7)
        assert [ev.flashed for ev in a] != [ev.flashed for ev in c]

    def test_pseudo_random_partitions(self):
        cfg = SimConfig(L=36, n_repetitions=3, flash_mode=PSEUDO_RANDOM, seed=5)
        events = flash_schedule(cfg, target=11)
        assert len(events) == 18  # 6 groups per repetition
        for r in range(3):
            rep = events[r * 6 : (r + 1) * 6]
            assert all(len(ev.flashed) == 6 for ev in rep)
            covered = frozenset().union(*[ev.flashed for ev in rep])
            assert covered == frozenset(range(36))
            assert sum(ev.is_target for ev in rep) == 1

    def test_onsets_spaced_by_soa(self):
        cfg = SimConfig(L=36, n_repetitions=1, seed=6)
        events = flash_schedule(cfg, target=0)
        onsets = np.array([ev.onset for ev in events])
        assert np.all(np.diff(onsets) == cfg.soa_samples)

    def test_bad_target(self):
        with pytest.raises(BadConfig):
            flash_schedule(SimConfig(L=36), target=36)


class TestConfigValidation:
    def test_row_column_needs_square_grid(self):
        with pytest.raises(BadConfig):
            SimConfig(L=35).validate()

    def test_soa_must_be_whole_samples(self):
        with pytest.raises(BadConfig):
            SimConfig(soa_ms=251.0, fs=256.0).validate()

    def test_negative_noise(self):
        with pytest.raises(BadConfig):
            SimConfig(noise_scale=-1.0).validate()


class TestGenerateSession:
    def test_bit_identical_for_identical_config(self):
        cfg = SimConfig(L=36, C=4, n_repetitions=2, seed=7)
        a = generate_session(cfg, [0, 5, 9])
        b = generate_session(cfg, [0, 5, 9])
        assert np.array_equal(a.recording.samples, b.recording.samples)
        assert a.events == b.events

    def test_all_epochs_fit_in_recording(self):
        cfg = SimConfig(L=36, C=4, n_repetitions=3, seed=8)
        session = generate_session(cfg, list(range(5)))
        n = cfg.epoch_samples
        for ev in session.events:
            assert 0 <= ev.onset and ev.onset + n <= session.recording.n_samples

    def test_noiseless_target_average_is_the_template(self):
        # SOA = epoch length, so no flash window sees a neighbor's deflection
        cfg = SimConfig(
            L=36, C=4, n_repetitions=3, soa_ms=1000.0, noise_scale=0.0,
            erp_amplitude=1.0, seed=9,
        )
        session = generate_session(cfg, [14, 2])
        trials = epoch(session.recording, session.events, cfg.epoch_seconds)
        template = erp_template(cfg)
        for t in trials:
            if t.label == TARGET:
                assert np.array_equal(t.data, template)
            else:
                assert np.array_equal(t.data, np.zeros_like(t.data))
        average = np.mean([t.data for t in trials if t.label == TARGET], axis=0)
        assert np.allclose(average, template, atol=1e-15)

    def test_zero_amplitude_classes_indistinguishable(self):
        cfg = SimConfig(L=36, C=4, n_repetitions=5, erp_amplitude=0.0, seed=10)
        session = generate_session(cfg, list(range(8)))
        trials = epoch(session.recording, session.events, cfg.epoch_seconds)
        t_means = [t.data.mean() for t in trials if t.label == TARGET]
        nt_means = [t.data.mean() for t in trials if t.label != TARGET]
        assert stats.ttest_ind(t_means, nt_means).pvalue > 0.01

    def test_trial_counts_match_schedule_arithmetic(self):
        reps = 4
        cfg = SimConfig(L=36, C=2, n_repetitions=reps, seed=11)
        targets = list(range(10))
        session = generate_session(cfg, targets)
        for episode, target in enumerate(targets):
            events = session.episode_events(episode)
            n_t = sum(ev.is_target for ev in events)
            assert n_t == 2 * reps
            assert len(events) - n_t == 10 * reps

    def test_template_shape(self):
        cfg = SimConfig(C=8)
        template = erp_template(cfg)
        assert template.shape == (8, 256)
        peak = np.argmax(template[-1])
        assert peak == pytest.approx(0.3 * cfg.fs, abs=2)  # peak near 300 ms
        assert template.min() >= 0.0
        # posterior channels carry more signal
        assert template[-1].max() > template[0].max()

    def test_empty_targets(self):
        with pytest.raises(BadConfig):
            generate_session(SimConfig(), [])


class TestSnrMonotonicity:
    def test_separability_grows_with_amplitude(self):
        separabilities = []
        for amplitude in (0.0, 0.5, 1.0, 2.0):
            cfg = SimConfig(
                L=36, C=4, n_repetitions=2, erp_amplitude=amplitude, seed=12,
            )
            session = generate_session(cfg, list(range(4)))
            trials = epoch(session.recording, session.events, cfg.epoch_seconds)
            prototype = estimate_prototype([t for t in trials if t.label == TARGET])
            features = [extended_covariance(t, prototype) for t in trials]
            labels = [t.label for t in trials]
            model = fit_mdm(features, labels)
            margins = []
            for feat, label in zip(features, labels):
                own = model.center_target if label == TARGET else model.center_nontarget
                other = model.center_nontarget if label == TARGET else model.center_target
                margins.append(
                    squared_affine_distance(feat, other) - squared_affine_distance(feat, own)
                )
            separabilities.append(np.mean(margins))
        assert all(a <= b for a, b in zip(separabilities, separabilities[1:]))
