"""Synthetic source recordings in the public distribution's .mat layout.

Fixtures reproduce the published trial counts exactly (that is what the
converter validates); the sampling rate is reduced so a full dataset stays a
few megabytes.
"""

import numpy as np
import pytest
from scipy.io import savemat

from dataset_bridge.specs import SPECS

FIXTURE_FS = 64.0
SOA_SAMPLES = 16  # 250 ms at 64 Hz
FLASH_SAMPLES = 8
CHARACTER_GAP = 32
LEAD_IN = 8


def make_run(spec, targets, rng):
    """One continuous recording spelling ``targets``, markers included."""
    per_char = spec.flashes_per_character
    reps = per_char // (spec.grid_rows + spec.grid_cols)
    n_codes = spec.grid_rows + spec.grid_cols
    epoch_samples = int(round(spec.epoch_seconds * FIXTURE_FS))

    n_samples = (
        LEAD_IN
        + len(targets) * (per_char * SOA_SAMPLES + CHARACTER_GAP)
        + epoch_samples
    )
    y = np.zeros(n_samples, dtype=np.int8)
    y_stim = np.zeros(n_samples, dtype=np.int8)

    cursor = LEAD_IN
    for target in targets:
        target_col = target % spec.grid_cols + 1
        target_row = spec.grid_cols + target // spec.grid_cols + 1
        for _ in range(reps):
            for code in rng.permutation(n_codes) + 1:
                is_target = code in (target_col, target_row)
                y[cursor : cursor + FLASH_SAMPLES] = 2 if is_target else 1
                y_stim[cursor : cursor + FLASH_SAMPLES] = code
                cursor += SOA_SAMPLES
        cursor += CHARACTER_GAP

    signal = rng.standard_normal((n_samples, spec.n_channels)).astype(np.float32)
    return {
        "X": signal,
        "fs": FIXTURE_FS,
        "y": y,
        "y_stim": y_stim,
        "channels": list(spec.channel_names),
    }


def write_subject(spec, path, subject, runs_targets, rng):
    runs = [make_run(spec, targets, rng) for targets in runs_targets]
    payload = runs[0] if len(runs) == 1 else np.array(runs, dtype=object)
    savemat(path, {"data": payload})
    return path


def build_source_dir(dataset_id, directory, seed=0):
    """A complete fake distribution with the published counts."""
    spec = SPECS[dataset_id]
    rng = np.random.default_rng(seed)
    directory.mkdir(parents=True, exist_ok=True)
    if dataset_id == "bnci2014_008":
        runs_shape = [spec.characters_per_subject]  # one session of 35 characters
    else:
        runs_shape = [6, 6, 6]  # three sessions of 6 characters
    for subject in range(1, spec.n_subjects + 1):
        runs_targets = [
            [int(c) for c in rng.integers(0, spec.n_characters, size=n)] for n in runs_shape
        ]
        write_subject(
            spec,
            directory / spec.file_pattern.format(subject=subject),
            subject,
            runs_targets,
            rng,
        )
    return directory


@pytest.fixture(scope="session")
def source_008(tmp_path_factory):
    return build_source_dir("bnci2014_008", tmp_path_factory.mktemp("src008"))


@pytest.fixture(scope="session")
def source_009(tmp_path_factory):
    return build_source_dir("bnci2014_009", tmp_path_factory.mktemp("src009"))
