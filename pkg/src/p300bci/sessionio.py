"""On-disk session format shared by the simulator, converters and the
evaluation harness.

One directory per session:

* ``session.json`` — metadata (ids, sampling, layout, timing, sizes).
* ``signal.f32le`` — raw little-endian float32, channel-major: all samples of
  channel 0, then channel 1, and so on.
* ``events.csv`` — one row per flash with columns ``onset_sample``,
  ``episode_id``, ``flashed_characters`` (``|``-separated 0-based indices)
  and ``is_target`` (``0``, ``1`` or ``NA``).
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import SessionFormatError
from .features import FlashEvent, RawRecording

__all__ = [
    "SessionRecord",
    "write_session",
    "read_session",
    "SESSION_FILE",
    "SIGNAL_FILE",
    "EVENTS_FILE",
]

SESSION_FILE = "session.json"
SIGNAL_FILE = "signal.f32le"
EVENTS_FILE = "events.csv"

_META_KEYS = (
    "dataset_id",
    "subject_id",
    "session_id",
    "fs_hz",
    "n_channels",
    "channel_names",
    "L",
    "grid_rows",
    "grid_cols",
    "soa_ms",
    "n_samples",
    "epoch_seconds",
)


@dataclass
class SessionRecord:
    """Continuous recording plus its flash events and layout metadata."""

    recording: RawRecording
    events: list[FlashEvent]
    L: int
    grid_rows: int
    grid_cols: int
    soa_ms: float
    epoch_seconds: float
    dataset_id: str = "sim"
    subject_id: str = "00"
    session_id: str = "0"
    channel_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.channel_names:
            self.channel_names = [f"ch{i:02d}" for i in range(self.recording.n_channels)]
        if len(self.channel_names) != self.recording.n_channels:
            raise SessionFormatError(
                f"{len(self.channel_names)} channel names for "
                f"{self.recording.n_channels} channels"
            )

    def episode_ids(self) -> list[int]:
        """Distinct episode ids in stream order."""
        seen: list[int] = []
        for ev in self.events:
            if not seen or ev.episode != seen[-1]:
                seen.append(ev.episode)
        return seen

    def episode_events(self, episode_id: int) -> list[FlashEvent]:
        return [ev for ev in self.events if ev.episode == episode_id]


def _atomic_write(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_session(record: SessionRecord, directory) -> Path:
    """Write one session directory; files land atomically (temp + rename)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    meta = {
        "dataset_id": record.dataset_id,
        "subject_id": record.subject_id,
        "session_id": record.session_id,
        "fs_hz": record.recording.fs,
        "n_channels": record.recording.n_channels,
        "channel_names": list(record.channel_names),
        "L": record.L,
        "grid_rows": record.grid_rows,
        "grid_cols": record.grid_cols,
        "soa_ms": record.soa_ms,
        "n_samples": record.recording.n_samples,
        "epoch_seconds": record.epoch_seconds,
    }
    _atomic_write(
        directory / SESSION_FILE,
        (json.dumps(meta, indent=2, sort_keys=True) + "\n").encode("utf-8"),
    )

    _atomic_write(
        directory / SIGNAL_FILE,
        np.ascontiguousarray(record.recording.samples, dtype="<f4").tobytes(),
    )

    lines = ["onset_sample,episode_id,flashed_characters,is_target"]
    for ev in record.events:
        flashed = "|".join(str(c) for c in sorted(ev.flashed))
        target = "NA" if ev.is_target is None else str(int(ev.is_target))
        lines.append(f"{ev.onset},{ev.episode},{flashed},{target}")
    _atomic_write(directory / EVENTS_FILE, ("\n".join(lines) + "\n").encode("utf-8"))
    return directory


def read_session(directory) -> SessionRecord:
    """Load and validate one session directory.

    Raises :class:`SessionFormatError` naming the offending file whenever the
    contents do not match the metadata.
    """
    directory = Path(directory)
    meta_path = directory / SESSION_FILE
    try:
        with open(meta_path, encoding="utf-8") as fh:
            meta = json.load(fh)
    except FileNotFoundError:
        raise SessionFormatError(f"{meta_path}: missing") from None
    except json.JSONDecodeError as exc:
        raise SessionFormatError(f"{meta_path}: invalid JSON ({exc})") from None
    missing = [k for k in _META_KEYS if k not in meta]
    if missing:
        raise SessionFormatError(f"{meta_path}: missing keys {missing}")

    n_channels = int(meta["n_channels"])
    n_samples = int(meta["n_samples"])
    signal_path = directory / SIGNAL_FILE
    try:
        payload = signal_path.read_bytes()
    except FileNotFoundError:
        raise SessionFormatError(f"{signal_path}: missing") from None
    expected = n_channels * n_samples * 4
    if len(payload) != expected:
        raise SessionFormatError(
            f"{signal_path}: {len(payload)} bytes, expected {expected} "
            f"({n_channels} channels x {n_samples} samples x 4)"
        )
    samples = (
        np.frombuffer(payload, dtype="<f4").reshape(n_channels, n_samples).astype(float)
    )

    events_path = directory / EVENTS_FILE
    events: list[FlashEvent] = []
    try:
        with open(events_path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != [
                "onset_sample",
                "episode_id",
                "flashed_characters",
                "is_target",
            ]:
                raise SessionFormatError(
                    f"{events_path}: unexpected header {reader.fieldnames}"
                )
            for row in reader:
                flashed = frozenset(int(p) for p in row["flashed_characters"].split("|"))
                raw_target = row["is_target"]
                is_target = None if raw_target == "NA" else bool(int(raw_target))
                events.append(
                    FlashEvent(
                        onset=int(row["onset_sample"]),
                        flashed=flashed,
                        episode=int(row["episode_id"]),
                        is_target=is_target,
                    )
                )
    except FileNotFoundError:
        raise SessionFormatError(f"{events_path}: missing") from None
    except (KeyError, ValueError) as exc:
        raise SessionFormatError(f"{events_path}: malformed row ({exc})") from None

    return SessionRecord(
        recording=RawRecording(samples, float(meta["fs_hz"])),
        events=events,
        L=int(meta["L"]),
        grid_rows=int(meta["grid_rows"]),
        grid_cols=int(meta["grid_cols"]),
        soa_ms=float(meta["soa_ms"]),
        epoch_seconds=float(meta["epoch_seconds"]),
        dataset_id=str(meta["dataset_id"]),
        subject_id=str(meta["subject_id"]),
        session_id=str(meta["session_id"]),
        channel_names=[str(c) for c in meta["channel_names"]],
    )
