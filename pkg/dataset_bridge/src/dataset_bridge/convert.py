"""Convert public speller recordings (.mat) into the neutral session format.

Source files carry the continuous signal plus two per-sample marker tracks:
a stimulus code identifying which row or column is lit (1..grid_cols for
columns, then grid_cols+1.. for rows) and a target track telling whether the
lit group contains the attended character.  The converter detects flash
onsets from the stimulus track, rebuilds the flashed character sets from the
grid layout, groups flashes into spelled-character episodes, and checks every
count against the published dataset description before writing anything.

Signals are exported unfiltered at their native rate; all preprocessing is
left to the consumer so simulated and real sessions share one signal path.
"""

from __future__ import annotations

import csv
import json
import urllib.error
import urllib.request
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import loadmat

from .specs import BASE_URL, SPECS, URL_PATHS, DatasetSpec, DownloadError, SchemaMismatch

NONTARGET_CODE = 1
TARGET_CODE = 2


@dataclass
class RunData:
    """One continuous recording: signal (channels x samples) plus markers."""

    signal: np.ndarray
    fs: float
    target_track: np.ndarray
    stimulus_track: np.ndarray
    channel_names: list[str]


def _as_runs(payload) -> list:
    if isinstance(payload, np.ndarray):
        return [run for run in payload.ravel()]
    return [payload]


def _read_mat(path: Path) -> list[RunData]:
    mat = loadmat(path, struct_as_record=False, squeeze_me=True)
    if "data" not in mat:
        raise SchemaMismatch(f"{path}: no 'data' variable")
    runs = []
    for run in _as_runs(mat["data"]):
        try:
            signal = np.atleast_2d(np.asarray(run.X, dtype=float))
            fs = float(run.fs)
            target_track = np.asarray(run.y).ravel().astype(int)
            stimulus_track = np.asarray(run.y_stim).ravel().astype(int)
            channels = [str(c).strip() for c in np.atleast_1d(run.channels)]
        except AttributeError as exc:
            raise SchemaMismatch(f"{path}: run missing field ({exc})") from None
        if signal.shape[0] == target_track.size and signal.shape[1] != target_track.size:
            signal = signal.T  # stored samples x channels
        runs.append(
            RunData(
                signal=signal,
                fs=fs,
                target_track=target_track,
                stimulus_track=stimulus_track,
                channel_names=channels,
            )
        )
    return runs


def _flash_onsets(stimulus_track: np.ndarray) -> np.ndarray:
    """Samples where the stimulus code switches from 0 to a group code."""
    lit = stimulus_track > 0
    rising = np.flatnonzero(lit & ~np.concatenate(([False], lit[:-1])))
    return rising


def _flashed_characters(code: int, spec: DatasetSpec) -> frozenset[int]:
    """Characters lit by a stimulus code: 1..cols are columns, then rows."""
    n_cols, n_rows = spec.grid_cols, spec.grid_rows
    if 1 <= code <= n_cols:
        col = code - 1
        return frozenset(range(col, n_rows * n_cols, n_cols))
    if n_cols < code <= n_cols + n_rows:
        row = code - n_cols - 1
        return frozenset(range(row * n_cols, (row + 1) * n_cols))
    raise SchemaMismatch(f"stimulus code {code} outside 1..{n_cols + n_rows}")


@dataclass
class FlashRecord:
    onset: int
    episode: int
    flashed: frozenset[int]
    is_target: bool


def _extract_flashes(run: RunData, spec: DatasetSpec, origin: str) -> list[FlashRecord]:
    onsets = _flash_onsets(run.stimulus_track)
    per_char = spec.flashes_per_character
    if len(onsets) == 0 or len(onsets) % per_char != 0:
        raise SchemaMismatch(
            f"{origin}: {len(onsets)} flashes is not a whole number of "
            f"{per_char}-flash characters"
        )
    epoch_samples = int(round(spec.epoch_seconds * run.fs))
    if onsets[-1] + epoch_samples > run.signal.shape[1]:
        raise SchemaMismatch(f"{origin}: last flash has no room for a full epoch")

    flashes = []
    for i, onset in enumerate(onsets):
        episode = i // per_char
        label = run.target_track[onset]
        if label not in (NONTARGET_CODE, TARGET_CODE):
            raise SchemaMismatch(f"{origin}: flash at sample {onset} has target code {label}")
        flashes.append(
            FlashRecord(
                onset=int(onset),
                episode=episode,
                flashed=_flashed_characters(int(run.stimulus_track[onset]), spec),
                is_target=label == TARGET_CODE,
            )
        )

    for episode in range(len(onsets) // per_char):
        group = [f for f in flashes if f.episode == episode]
        n_target = sum(f.is_target for f in group)
        n_nontarget = len(group) - n_target
        if n_target != spec.target_trials_per_character:
            raise SchemaMismatch(
                f"{origin}: character {episode} has {n_target} target flashes, "
                f"expected {spec.target_trials_per_character}"
            )
        if n_nontarget != spec.nontarget_trials_per_character:
            raise SchemaMismatch(
                f"{origin}: character {episode} has {n_nontarget} non-target flashes, "
                f"expected {spec.nontarget_trials_per_character}"
            )
        spelled = frozenset.intersection(*[f.flashed for f in group if f.is_target])
        if len(spelled) != 1:
            raise SchemaMismatch(
                f"{origin}: character {episode} target flashes do not intersect in "
                f"one character"
            )
    return flashes


def _write_session(
    directory: Path,
    spec: DatasetSpec,
    run: RunData,
    flashes: list[FlashRecord],
    subject_id: str,
    session_id: str,
) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    meta = {
        "dataset_id": spec.dataset_id,
        "subject_id": subject_id,
        "session_id": session_id,
        "fs_hz": run.fs,
        "n_channels": run.signal.shape[0],
        "channel_names": run.channel_names,
        "L": spec.n_characters,
        "grid_rows": spec.grid_rows,
        "grid_cols": spec.grid_cols,
        "soa_ms": spec.soa_ms,
        "n_samples": run.signal.shape[1],
        "epoch_seconds": spec.epoch_seconds,
    }
    (directory / "session.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    (directory / "signal.f32le").write_bytes(
        np.ascontiguousarray(run.signal, dtype="<f4").tobytes()
    )
    with open(directory / "events.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["onset_sample", "episode_id", "flashed_characters", "is_target"])
        for flash in flashes:
            writer.writerow(
                [
                    flash.onset,
                    flash.episode,
                    "|".join(str(c) for c in sorted(flash.flashed)),
                    int(flash.is_target),
                ]
            )
    return directory


def convert_subject(
    dataset_id: str, mat_path, out_dir, subject_id: str
) -> list[Path]:
    """Convert one subject's recording file; one directory per session."""
    spec = SPECS[dataset_id]
    mat_path = Path(mat_path)
    runs = _read_mat(mat_path)
    characters = 0
    written = []
    for session_index, run in enumerate(runs):
        origin = f"{mat_path.name}[{session_index}]"
        if run.signal.shape[0] != spec.n_channels:
            raise SchemaMismatch(
                f"{origin}: {run.signal.shape[0]} channels, expected {spec.n_channels}"
            )
        flashes = _extract_flashes(run, spec, origin)
        characters += len({f.episode for f in flashes})
        directory = Path(out_dir) / f"{dataset_id}_s{subject_id}_r{session_index}"
        written.append(
            _write_session(directory, spec, run, flashes, subject_id, str(session_index))
        )
    if characters != spec.characters_per_subject:
        raise SchemaMismatch(
            f"{mat_path.name}: subject spelled {characters} characters, "
            f"expected {spec.characters_per_subject}"
        )
    return written


def _fetch(dataset_id: str, filename: str, source_dir: Path, download: bool) -> Path:
    path = source_dir / filename
    if path.exists():
        return path
    if not download:
        raise DownloadError(
            f"{path} not found; download {filename} from "
            f"{BASE_URL}{URL_PATHS[dataset_id]} or pass download=True"
        )
    url = f"{BASE_URL}{URL_PATHS[dataset_id]}{filename}"
    try:
        source_dir.mkdir(parents=True, exist_ok=True)
        with urllib.request.urlopen(url, timeout=60) as response:
            path.write_bytes(response.read())
    except (urllib.error.URLError, OSError) as exc:
        raise DownloadError(f"could not fetch {url}: {exc}") from None
    return path


def convert(dataset_id: str, source_dir, out_dir, download: bool = False) -> list[Path]:
    """Convert a whole dataset from a local cache (optionally downloading).

    Returns the written session directories.  Counts are validated against
    the published description at every level; any deviation aborts with
    :class:`SchemaMismatch` before partial results can be mistaken for the
    real dataset.
    """
    if dataset_id not in SPECS:
        raise SchemaMismatch(f"unknown dataset {dataset_id!r}; know {sorted(SPECS)}")
    spec = SPECS[dataset_id]
    source_dir = Path(source_dir)
    written = []
    for subject in range(1, spec.n_subjects + 1):
        filename = spec.file_pattern.format(subject=subject)
        mat_path = _fetch(dataset_id, filename, source_dir, download)
        written.extend(convert_subject(dataset_id, mat_path, out_dir, f"{subject:02d}"))
    return written
