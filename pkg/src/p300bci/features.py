"""From continuous recordings to prototype-extended covariance features.

The feature path is: band-pass filter the multichannel signal, cut one
fixed-length epoch per flash, stack the target-average prototype on top of
each epoch and take the sample covariance of the stacked matrix.  The result
is one SPD matrix of order twice the channel count per flash.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from .errors import (
    DimensionMismatch,
    EmptyInput,
    EventOutOfRange,
    InvalidBand,
    MixedLabels,
)
from .spd import validate_spd

__all__ = [
    "TARGET",
    "NONTARGET",
    "RawRecording",
    "FlashEvent",
    "Trial",
    "bandpass_filter",
    "epoch",
    "estimate_prototype",
    "extended_covariance",
]

# ERP class labels: a trial is a target when the attended character was in
# the flashed set, a non-target otherwise.
TARGET = "T"
NONTARGET = "NT"

# Design order of the zero-phase Butterworth band-pass.
FILTER_ORDER = 4


@dataclass(frozen=True)
class RawRecording:
    """Continuous multichannel signal, shape (n_channels, n_samples)."""

    samples: np.ndarray
    fs: float

    def __post_init__(self):
        if self.samples.ndim != 2:
            raise DimensionMismatch(
                f"expected (channels, samples), got shape {self.samples.shape}"
            )
        if self.samples.shape[1] < 1:
            raise EmptyInput("recording has no samples")
        if self.fs <= 0:
            raise ValueError("sample rate must be positive")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("recording contains non-finite values")

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True)
class FlashEvent:
    """One stimulus flash: onset sample, flashed character set, labels."""

    onset: int
    flashed: frozenset[int]
    episode: int = 0
    is_target: bool | None = None


@dataclass(frozen=True)
class Trial:
    """One epoch (channels x samples) with its flash metadata."""

    data: np.ndarray
    event: FlashEvent
    label: str | None = None


def bandpass_filter(raw: RawRecording, low: float, high: float) -> RawRecording:
    """Zero-phase Butterworth band-pass, applied forward and backward.

    ``low`` and ``high`` are the band edges in Hz and must satisfy
    0 < low < high < fs / 2.  Channels are centered afterwards: the Gaussian
    trial model downstream assumes zero-mean signals, and a finite window
    leaks a little DC past the high-pass edge.
    """
    if not 0.0 < low < high < raw.fs / 2.0:
        raise InvalidBand(
            f"band [{low}, {high}] Hz invalid for fs = {raw.fs} Hz"
        )
    sos = sps.butter(FILTER_ORDER, [low, high], btype="bandpass", fs=raw.fs, output="sos")
    filtered = sps.sosfiltfilt(sos, raw.samples, axis=1)
    filtered -= filtered.mean(axis=1, keepdims=True)
    return RawRecording(np.ascontiguousarray(filtered), raw.fs)


def epoch(raw: RawRecording, events, epoch_seconds: float) -> list[Trial]:
    """Cut one fixed-length trial per flash event, in event order.

    Epochs start at the flash onset and span ``round(epoch_seconds * fs)``
    samples.  Overlapping epochs are fine; each trial owns a copy of its
    slice.
    """
    n = int(round(epoch_seconds * raw.fs))
    if n < 1:
        raise ValueError("epoch length must cover at least one sample")
    trials = []
    for ev in events:
        if ev.onset < 0 or ev.onset + n > raw.n_samples:
            raise EventOutOfRange(
                f"event at sample {ev.onset} with {n}-sample epoch exceeds "
                f"recording of {raw.n_samples} samples"
            )
        label = None
        if ev.is_target is not None:
            label = TARGET if ev.is_target else NONTARGET
        trials.append(Trial(raw.samples[:, ev.onset : ev.onset + n].copy(), ev, label))
    return trials


def estimate_prototype(target_trials) -> np.ndarray:
    """Grand average of the target trials, the prototype ERP response."""
    trials = list(target_trials)
    if not trials:
        raise EmptyInput("no target trials to average")
    shape = trials[0].data.shape
    for t in trials:
        if t.label != TARGET:
            raise MixedLabels(f"expected only {TARGET!r} trials, got {t.label!r}")
        if t.data.shape != shape:
            raise DimensionMismatch(
                f"trial shapes differ: {t.data.shape} vs {shape}"
            )
    return np.mean([t.data for t in trials], axis=0)


def extended_covariance(
    trial: Trial, prototype: np.ndarray, shrinkage: float = 0.01
) -> np.ndarray:
    """Sample covariance of the prototype-extended trial.

    The prototype is stacked on top of the trial data, giving a matrix with
    twice the channel count, and the covariance is taken over time with the
    unbiased 1/(N-1) normalization.  ``shrinkage`` in [0, 1) blends toward
    the identity scaled to the same mean eigenvalue, which keeps the fixed
    prototype block from making the result singular.
    """
    if not 0.0 <= shrinkage < 1.0:
        raise ValueError("shrinkage must be in [0, 1)")
    prototype = np.asarray(prototype, dtype=float)
    if prototype.shape != trial.data.shape:
        raise DimensionMismatch(
            f"prototype shape {prototype.shape} != trial shape {trial.data.shape}"
        )
    n = trial.data.shape[1]
    if n < 2:
        raise ValueError("need at least two samples per epoch")
    stacked = np.vstack([prototype, trial.data])
    cov = stacked @ stacked.T / (n - 1)
    if shrinkage > 0.0:
        order = cov.shape[0]
        cov = (1.0 - shrinkage) * cov + shrinkage * (np.trace(cov) / order) * np.eye(order)
    return validate_spd(cov)
