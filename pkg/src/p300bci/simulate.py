"""Synthetic oddball-paradigm sessions with controllable signal-to-noise.

The generator writes the same session layout as real recordings: a
continuous multichannel signal made of 1/f-shaped background noise, with a
smooth P300-like deflection added at every target flash, plus the flash
schedule (row/column or pseudo-random groups) that produced it.  Everything
is a pure function of the configuration, so identical configs give
bit-identical sessions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadConfig
from .features import FlashEvent, RawRecording
from .sessionio import SessionRecord

__all__ = [
    "SimConfig",
    "flash_schedule",
    "generate_session",
    "erp_template",
    "ROW_COLUMN",
    "PSEUDO_RANDOM",
]

ROW_COLUMN = "row_column"
PSEUDO_RANDOM = "pseudo_random"


@dataclass
class SimConfig:
    L: int = 36
    C: int = 8
    fs: float = 256.0
    n_repetitions: int = 10
    flash_mode: str = ROW_COLUMN
    soa_ms: float = 250.0
    erp_amplitude: float = 1.0
    noise_scale: float = 1.0
    seed: int = 0
    epoch_seconds: float = 1.0

    def validate(self) -> None:
        if self.L < 2 or self.C < 1 or self.fs <= 0 or self.n_repetitions < 1:
            raise BadConfig("L >= 2, C >= 1, fs > 0 and n_repetitions >= 1 required")
        if self.flash_mode not in (ROW_COLUMN, PSEUDO_RANDOM):
            raise BadConfig(f"unknown flash mode {self.flash_mode!r}")
        g = math.isqrt(self.L)
        if g * g != self.L:
            raise BadConfig(f"L = {self.L} is not a perfect square grid")
        soa = self.soa_ms * self.fs / 1000.0
        if abs(soa - round(soa)) > 1e-9 or round(soa) < 1:
            raise BadConfig(
                f"SOA of {self.soa_ms} ms is not a whole number of samples at "
                f"{self.fs} Hz"
            )
        if self.noise_scale < 0 or self.erp_amplitude < 0:
            raise BadConfig("noise_scale and erp_amplitude must be nonnegative")
        if self.epoch_seconds <= 0:
            raise BadConfig("epoch_seconds must be positive")

    @property
    def grid_side(self) -> int:
        return math.isqrt(self.L)

    @property
    def soa_samples(self) -> int:
        return int(round(self.soa_ms * self.fs / 1000.0))

    @property
    def epoch_samples(self) -> int:
        return int(round(self.epoch_seconds * self.fs))

    @property
    def flashes_per_repetition(self) -> int:
        return 2 * self.grid_side if self.flash_mode == ROW_COLUMN else self.grid_side


def _flash_groups(config: SimConfig, rng: np.random.Generator) -> list[frozenset[int]]:
    """Flashed character sets for one repetition."""
    g = config.grid_side
    if config.flash_mode == ROW_COLUMN:
        rows = [frozenset(range(r * g, (r + 1) * g)) for r in range(g)]
        cols = [frozenset(range(c, config.L, g)) for c in range(g)]
        groups = rows + cols
        order = rng.permutation(len(groups))
        return [groups[i] for i in order]
    perm = rng.permutation(config.L)
    return [frozenset(int(c) for c in perm[i * g : (i + 1) * g]) for i in range(g)]


def flash_schedule(
    config: SimConfig, target: int, rng: np.random.Generator | None = None
) -> list[FlashEvent]:
    """Flash events for one character episode, onsets starting at sample 0.

    Row/column mode flashes a random permutation of the rows and columns per
    repetition (every character appears in exactly two groups); pseudo-random
    mode partitions the characters into fresh groups of grid size (every
    character appears once).
    """
    config.validate()
    if not 0 <= target < config.L:
        raise BadConfig(f"target {target} outside [0, {config.L})")
    if rng is None:
        rng = np.random.default_rng(config.seed)
    events = []
    flash_index = 0
    for _ in range(config.n_repetitions):
        for group in _flash_groups(config, rng):
            events.append(
                FlashEvent(
                    onset=flash_index * config.soa_samples,
                    flashed=group,
                    episode=0,
                    is_target=target in group,
                )
            )
            flash_index += 1
    return events


def erp_template(config: SimConfig) -> np.ndarray:
    """The deflection added at each target flash, shape (C, epoch_samples).

    Gamma-shaped positive bump peaking 300 ms after onset with roughly 200 ms
    width, weighted toward the posterior (last) channels.
    """
    t = np.arange(config.epoch_samples) / config.fs
    peak, k = 0.3, 12.0
    theta = peak / (k - 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        bump = np.where(t > 0, (t / peak) ** (k - 1.0) * np.exp((peak - t) / theta), 0.0)
    bump[0] = 0.0
    weights = np.linspace(0.3, 1.0, config.C)
    return np.outer(weights, bump)


def _pink_noise(rng: np.random.Generator, c: int, t: int, fs: float) -> np.ndarray:
    """1/f-shaped noise with unit standard deviation per channel."""
    white = rng.standard_normal((c, t))
    spectrum = np.fft.rfft(white, axis=1)
    freqs = np.fft.rfftfreq(t, d=1.0 / fs)
    shaping = 1.0 / np.sqrt(np.maximum(freqs, 1.0))
    shaped = np.fft.irfft(spectrum * shaping, n=t, axis=1)
    std = shaped.std(axis=1, keepdims=True)
    return shaped / np.where(std > 0, std, 1.0)


def generate_session(config: SimConfig, targets) -> SessionRecord:
    """Simulate one session spelling the given sequence of target characters.

    Each target gets its own episode (accumulators re-initialize at episode
    boundaries); episodes are separated by an epoch-length pause so every
    flash has room for a full epoch.
    """
    config.validate()
    targets = [int(x) for x in targets]
    if not targets:
        raise BadConfig("need at least one target character")
    for target in targets:
        if not 0 <= target < config.L:
            raise BadConfig(f"target {target} outside [0, {config.L})")

    rng = np.random.default_rng(config.seed)
    epoch_n = config.epoch_samples
    events: list[FlashEvent] = []
    t0 = epoch_n  # lead-in
    for episode, target in enumerate(targets):
        for ev in flash_schedule(config, target, rng):
            events.append(
                FlashEvent(
                    onset=t0 + ev.onset,
                    flashed=ev.flashed,
                    episode=episode,
                    is_target=ev.is_target,
                )
            )
        episode_span = (config.n_repetitions * config.flashes_per_repetition - 1) \
            * config.soa_samples + epoch_n
        t0 += episode_span + epoch_n  # inter-episode pause marks re-initialization

    n_samples = events[-1].onset + 2 * epoch_n
    signal = config.noise_scale * _pink_noise(rng, config.C, n_samples, config.fs)
    if config.erp_amplitude > 0:
        template = config.erp_amplitude * erp_template(config)
        for ev in events:
            if ev.is_target:
                signal[:, ev.onset : ev.onset + epoch_n] += template

    return SessionRecord(
        recording=RawRecording(signal, config.fs),
        events=events,
        L=config.L,
        grid_rows=config.grid_side,
        grid_cols=config.grid_side,
        soa_ms=config.soa_ms,
        epoch_seconds=config.epoch_seconds,
        dataset_id="sim",
        subject_id="00",
        session_id=str(config.seed),
    )
