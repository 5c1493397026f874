"""Character-level sequential inference over the flash stream.

Two accumulators share one interface.  The Bayesian one (ASAP) multiplies
every character's posterior by the target likelihood when the character was
flashed and by the non-target likelihood when it was not, renormalizing after
each flash; all arithmetic is kept in the log domain so long episodes cannot
underflow.  The occurrence-maximization baseline (OM) counts, for each
character, the flashes that contained it and were classified as targets.

States are immutable values: every update returns a fresh state.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import logsumexp

from .errors import (
    BadPrior,
    EmptyFlashSet,
    IndexOutOfRange,
    NoEvidence,
    WrongMode,
)
from .features import TARGET

__all__ = [
    "ASAP",
    "OM",
    "AccumulatorState",
    "init_accumulator",
    "asap_update",
    "om_update",
    "decide",
]

ASAP = "ASAP"
OM = "OM"


@dataclass(frozen=True)
class AccumulatorState:
    """Posterior over the character set after ``t`` flashes."""

    L: int
    log_posterior: np.ndarray
    t: int
    mode: str
    om_counts: np.ndarray | None = None

    def probabilities(self) -> np.ndarray:
        """Per-character probabilities.

        In ASAP mode these sum to one.  In OM mode each entry is the
        per-character score count divided by the number of flashes seen
        (uniform before any target detection), which lives in [0, 1] but is
        not a distribution across characters.
        """
        return np.exp(self.log_posterior)


def init_accumulator(L: int, priors=None, mode: str = ASAP) -> AccumulatorState:
    """Fresh accumulator for one character-spelling episode.

    ``priors`` defaults to uniform; when given it must be a length-``L``
    probability vector (nonnegative, summing to one within 1e-9).
    """
    if L < 1:
        raise BadPrior("need at least one character")
    if mode not in (ASAP, OM):
        raise WrongMode(f"unknown mode {mode!r}")
    if priors is None:
        log_posterior = np.full(L, -np.log(L))
    else:
        priors = np.asarray(priors, dtype=float)
        if priors.shape != (L,):
            raise BadPrior(f"priors have shape {priors.shape}, expected ({L},)")
        if np.any(priors < 0):
            raise BadPrior("priors must be nonnegative")
        if abs(priors.sum() - 1.0) > 1e-9:
            raise BadPrior(f"priors sum to {priors.sum()!r}, expected 1")
        with np.errstate(divide="ignore"):
            log_posterior = np.log(priors)
    counts = np.zeros(L, dtype=int) if mode == OM else None
    return AccumulatorState(L=L, log_posterior=log_posterior, t=0, mode=mode, om_counts=counts)


def _check_flashed(state: AccumulatorState, flashed) -> np.ndarray:
    idx = np.fromiter(flashed, dtype=int)
    if idx.size == 0:
        raise EmptyFlashSet("flashed character set is empty")
    if idx.min() < 0 or idx.max() >= state.L:
        raise IndexOutOfRange(
            f"flashed characters {sorted(flashed)} outside [0, {state.L})"
        )
    return idx


def asap_update(
    state: AccumulatorState, llh_target: float, llh_nontarget: float, flashed
) -> AccumulatorState:
    """One Bayesian step: flashed characters absorb the target log-likelihood,
    all others the non-target one, then the posterior is renormalized."""
    if state.mode != ASAP:
        raise WrongMode(f"asap_update on a {state.mode} accumulator")
    idx = _check_flashed(state, flashed)
    logp = state.log_posterior + llh_nontarget
    logp[idx] += llh_target - llh_nontarget
    logp -= logsumexp(logp)
    return replace(state, log_posterior=logp, t=state.t + 1)


def om_update(state: AccumulatorState, predicted: str, flashed) -> AccumulatorState:
    """One counting step: a target prediction credits every flashed character.

    The mirrored posterior is count / t per character, uniform while the
    counts are all zero.
    """
    if state.mode != OM:
        raise WrongMode(f"om_update on a {state.mode} accumulator")
    idx = _check_flashed(state, flashed)
    counts = state.om_counts.copy()
    if predicted == TARGET:
        counts[idx] += 1
    t = state.t + 1
    if counts.sum() == 0:
        logp = np.full(state.L, -np.log(state.L))
    else:
        with np.errstate(divide="ignore"):
            logp = np.log(counts / t)
    return replace(state, log_posterior=logp, t=t, om_counts=counts)


def decide(state: AccumulatorState) -> tuple[int, float]:
    """Current best character and its probability.

    Argmax of the posterior (ASAP) or of the counts (OM); ties break to the
    lowest index.
    """
    if state.t < 1:
        raise NoEvidence("no flashes accumulated yet")
    if state.mode == OM:
        if state.om_counts.sum() == 0:
            return 0, 1.0 / state.L
        best = int(np.argmax(state.om_counts))
        return best, float(state.om_counts[best] / state.t)
    best = int(np.argmax(state.log_posterior))
    return best, float(np.exp(state.log_posterior[best]))
