"""Within-session evaluation: train on the first characters, replay the rest
flash by flash through both accumulators, and report accuracy and information
transfer rate per repetition.

Both methods share one feature path and one fitted model; they differ only in
how per-flash evidence becomes a character decision, so the comparison is
paired by construction.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .accumulate import ASAP, OM, asap_update, decide, init_accumulator, om_update
from .classify import fit_mdm, mdm_predict, pmdm_log_likelihoods
from .errors import (
    BadArgument,
    InsufficientTraining,
    MissingLabels,
    SessionFormatError,
)
from .features import TARGET, bandpass_filter, epoch, estimate_prototype, extended_covariance
from .sessionio import SessionRecord, _atomic_write

__all__ = [
    "PipelineConfig",
    "EpisodeOutcome",
    "EvalReport",
    "run_within_session",
    "itr",
    "emit_report",
    "read_metrics_csv",
    "infer_flashes_per_repetition",
    "METHOD_ASAP",
    "METHOD_OM",
]

METHOD_ASAP = "ASAP"
METHOD_OM = "MDM+OM"
METHODS = (METHOD_ASAP, METHOD_OM)

METRICS_FILE = "metrics.csv"
SUMMARY_FILE = "summary.json"
TRACE_FILES = {METHOD_ASAP: "trace_asap.csv", METHOD_OM: "trace_om.csv"}


@dataclass
class PipelineConfig:
    """Everything the within-session protocol needs besides the data."""

    low_hz: float = 1.0
    high_hz: float = 20.0
    shrinkage: float = 0.01
    equal_dispersion: bool = True
    priors: np.ndarray | None = None
    n_train_episodes: int = 6
    mean_tol: float = 1e-8
    mean_max_iter: int = 50
    overhead_seconds: float = 0.0
    flashes_per_repetition: int | None = None
    epoch_seconds: float | None = None  # None: use the session's value

    def as_dict(self) -> dict:
        d = {
            "low_hz": self.low_hz,
            "high_hz": self.high_hz,
            "shrinkage": self.shrinkage,
            "equal_dispersion": self.equal_dispersion,
            "priors": None if self.priors is None else [float(p) for p in self.priors],
            "n_train_episodes": self.n_train_episodes,
            "mean_tol": self.mean_tol,
            "mean_max_iter": self.mean_max_iter,
            "overhead_seconds": self.overhead_seconds,
            "flashes_per_repetition": self.flashes_per_repetition,
            "epoch_seconds": self.epoch_seconds,
        }
        return d


@dataclass(frozen=True)
class EpisodeOutcome:
    """Per-repetition snapshots for one test episode, per method."""

    episode_id: int
    target: int
    decided: dict
    decided_probability: dict
    target_posterior: dict
    nontarget_posterior: dict


@dataclass
class EvalReport:
    dataset_id: str
    subject_id: str
    session_id: str
    n_episodes: int
    n_repetitions: int
    seconds_per_selection: np.ndarray
    accuracy: dict
    itr_bits_per_min: dict
    mean_target_posterior: dict
    mean_nontarget_posterior: dict
    episodes: list[EpisodeOutcome]
    single_trial_confusion: dict
    config: dict
    traces: dict | None = None
    methods: tuple = METHODS


def itr(accuracy: float, n_choices: int, seconds_per_selection: float) -> float:
    """Information transfer rate in bits per minute.

    Per-selection bitrate of an ``n_choices``-ary channel at the given
    accuracy, scaled to a minute; floored at zero (the formula dips below
    zero just under chance accuracy).
    """
    if not 0.0 <= accuracy <= 1.0:
        raise BadArgument(f"accuracy {accuracy} outside [0, 1]")
    if n_choices < 2:
        raise BadArgument("need at least two choices")
    if seconds_per_selection <= 0:
        raise BadArgument("seconds_per_selection must be positive")
    bits = np.log2(n_choices)
    if accuracy > 0.0:
        bits += accuracy * np.log2(accuracy)
    if accuracy < 1.0:
        bits += (1.0 - accuracy) * np.log2((1.0 - accuracy) / (n_choices - 1))
    return max(0.0, 60.0 * float(bits) / seconds_per_selection)


def infer_flashes_per_repetition(session: SessionRecord) -> int:
    """How many flashes make one repetition (every character shown once).

    Row/column streams (every flashed set is an exact grid row or column)
    cover each character twice per repetition, so a repetition is
    ``rows + cols`` flashes; group streams cover each character once, so it
    is ``L / group_size`` flashes.
    """
    rows = [
        frozenset(range(r * session.grid_cols, (r + 1) * session.grid_cols))
        for r in range(session.grid_rows)
    ]
    cols = [frozenset(range(c, session.L, session.grid_cols)) for c in range(session.grid_cols)]
    row_col = set(rows) | set(cols)
    if all(ev.flashed in row_col for ev in session.events):
        return session.grid_rows + session.grid_cols
    sizes = {len(ev.flashed) for ev in session.events}
    if len(sizes) != 1:
        raise SessionFormatError(f"mixed flash group sizes {sorted(sizes)}")
    size = sizes.pop()
    if session.L % size != 0:
        raise SessionFormatError(f"group size {size} does not divide L = {session.L}")
    return session.L // size


def _episode_target(events) -> int:
    """The spelled character: common to every flashed set marked target."""
    target_sets = [ev.flashed for ev in events if ev.is_target]
    if not target_sets:
        raise MissingLabels("episode has no target-labeled flashes")
    common = frozenset.intersection(*target_sets)
    if len(common) != 1:
        raise MissingLabels(
            f"target flashes do not pin down one character (candidates {sorted(common)})"
        )
    return next(iter(common))


def run_within_session(
    session: SessionRecord,
    config: PipelineConfig | None = None,
    collect_traces: bool = False,
) -> EvalReport:
    """Evaluate one session: calibrate on the first episodes, replay the rest.

    The prototype and the two class centers are fitted on the first
    ``n_train_episodes`` episodes only.  Each remaining episode is replayed in
    onset order through a fresh pair of accumulators; decisions are
    snapshotted after every completed repetition.  When episodes have unequal
    repetition counts the report is truncated to the shortest.
    """
    if config is None:
        config = PipelineConfig()
    events = sorted(session.events, key=lambda ev: ev.onset)
    episode_ids = []
    for ev in events:
        if ev.episode not in episode_ids:
            episode_ids.append(ev.episode)
    if len(episode_ids) <= config.n_train_episodes:
        raise InsufficientTraining(
            f"{len(episode_ids)} episodes; need more than {config.n_train_episodes}"
        )
    train_ids = episode_ids[: config.n_train_episodes]
    test_ids = episode_ids[config.n_train_episodes :]

    filtered = bandpass_filter(session.recording, config.low_hz, config.high_hz)
    epoch_seconds = config.epoch_seconds if config.epoch_seconds else session.epoch_seconds

    by_episode = {eid: [ev for ev in events if ev.episode == eid] for eid in episode_ids}
    train_events = [ev for eid in train_ids for ev in by_episode[eid]]
    if any(ev.is_target is None for ev in train_events):
        raise MissingLabels("training episodes contain unlabeled flashes")

    train_trials = epoch(filtered, train_events, epoch_seconds)
    prototype = estimate_prototype([t for t in train_trials if t.label == TARGET])
    train_features = [extended_covariance(t, prototype, config.shrinkage) for t in train_trials]
    model = fit_mdm(
        train_features,
        [t.label for t in train_trials],
        tol=config.mean_tol,
        max_iter=config.mean_max_iter,
    )

    flashes_per_rep = config.flashes_per_repetition or infer_flashes_per_repetition(session)
    for eid in test_ids:
        if len(by_episode[eid]) % flashes_per_rep != 0:
            raise SessionFormatError(
                f"episode {eid}: {len(by_episode[eid])} flashes is not a whole "
                f"number of {flashes_per_rep}-flash repetitions"
            )
    n_reps = min(len(by_episode[eid]) // flashes_per_rep for eid in test_ids)

    nontarget_mask = ~np.eye(session.L, dtype=bool)
    confusion = {"tp": 0, "fn": 0, "tn": 0, "fp": 0}
    traces = {m: [] for m in METHODS} if collect_traces else None
    outcomes = []
    for eid in test_ids:
        ep_events = by_episode[eid]
        if any(ev.is_target is None for ev in ep_events):
            raise MissingLabels(f"test episode {eid} contains unlabeled flashes")
        target = _episode_target(ep_events)
        trials = epoch(filtered, ep_events, epoch_seconds)

        asap_state = init_accumulator(session.L, priors=config.priors, mode=ASAP)
        om_state = init_accumulator(session.L, mode=OM)
        snaps = {
            m: {
                "decided": np.zeros(n_reps, dtype=int),
                "prob": np.zeros(n_reps),
                "target_post": np.zeros(n_reps),
                "nontarget_post": np.zeros(n_reps),
            }
            for m in METHODS
        }
        for i, trial in enumerate(trials):
            feature = extended_covariance(trial, prototype, config.shrinkage)
            llh_t, llh_nt = pmdm_log_likelihoods(model, feature, config.equal_dispersion)
            asap_state = asap_update(asap_state, llh_t, llh_nt, trial.event.flashed)
            predicted = mdm_predict(model, feature)
            om_state = om_update(om_state, predicted, trial.event.flashed)

            if trial.label == TARGET:
                confusion["tp" if predicted == TARGET else "fn"] += 1
            else:
                confusion["fp" if predicted == TARGET else "tn"] += 1

            if collect_traces:
                for m, state in ((METHOD_ASAP, asap_state), (METHOD_OM, om_state)):
                    probs = state.probabilities()
                    traces[m].extend(
                        (eid, i + 1, ch, float(probs[ch])) for ch in range(session.L)
                    )

            if (i + 1) % flashes_per_rep == 0:
                r = (i + 1) // flashes_per_rep - 1
                if r < n_reps:
                    for m, state in ((METHOD_ASAP, asap_state), (METHOD_OM, om_state)):
                        ch, prob = decide(state)
                        probs = state.probabilities()
                        snaps[m]["decided"][r] = ch
                        snaps[m]["prob"][r] = prob
                        snaps[m]["target_post"][r] = probs[target]
                        snaps[m]["nontarget_post"][r] = probs[nontarget_mask[target]].mean()
        outcomes.append(
            EpisodeOutcome(
                episode_id=eid,
                target=target,
                decided={m: snaps[m]["decided"] for m in METHODS},
                decided_probability={m: snaps[m]["prob"] for m in METHODS},
                target_posterior={m: snaps[m]["target_post"] for m in METHODS},
                nontarget_posterior={m: snaps[m]["nontarget_post"] for m in METHODS},
            )
        )

    soa_seconds = session.soa_ms / 1000.0
    reps = np.arange(1, n_reps + 1)
    seconds_per_selection = reps * flashes_per_rep * soa_seconds + config.overhead_seconds
    accuracy = {}
    itr_curve = {}
    mean_target = {}
    mean_nontarget = {}
    for m in METHODS:
        correct = np.stack([o.decided[m] == o.target for o in outcomes])
        accuracy[m] = correct.mean(axis=0)
        itr_curve[m] = np.array(
            [itr(a, session.L, s) for a, s in zip(accuracy[m], seconds_per_selection)]
        )
        mean_target[m] = np.stack([o.target_posterior[m] for o in outcomes]).mean(axis=0)
        mean_nontarget[m] = np.stack([o.nontarget_posterior[m] for o in outcomes]).mean(axis=0)

    return EvalReport(
        dataset_id=session.dataset_id,
        subject_id=session.subject_id,
        session_id=session.session_id,
        n_episodes=len(outcomes),
        n_repetitions=n_reps,
        seconds_per_selection=seconds_per_selection,
        accuracy=accuracy,
        itr_bits_per_min=itr_curve,
        mean_target_posterior=mean_target,
        mean_nontarget_posterior=mean_nontarget,
        episodes=outcomes,
        single_trial_confusion=confusion,
        config=config.as_dict(),
        traces=traces,
    )


def single_trial_balanced_accuracy(report: EvalReport) -> float:
    """Mean of target and non-target recall of the hard per-flash classifier."""
    c = report.single_trial_confusion
    tpr = c["tp"] / max(c["tp"] + c["fn"], 1)
    tnr = c["tn"] / max(c["tn"] + c["fp"], 1)
    return 0.5 * (tpr + tnr)


def emit_report(report: EvalReport, out_dir) -> dict:
    """Write the machine-readable report files; returns {name: path}.

    ``metrics.csv`` has one row per (method, repetition); float cells use
    ``repr`` so parsing them back reproduces the in-memory values exactly.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}

    lines = ["method,dataset,subject,session,repetition,accuracy,itr_bits_per_min,n_episodes"]
    for m in report.methods:
        for r in range(report.n_repetitions):
            lines.append(
                ",".join(
                    [
                        m,
                        report.dataset_id,
                        report.subject_id,
                        report.session_id,
                        str(r + 1),
                        repr(float(report.accuracy[m][r])),
                        repr(float(report.itr_bits_per_min[m][r])),
                        str(report.n_episodes),
                    ]
                )
            )
    metrics_path = out_dir / METRICS_FILE
    _atomic_write(metrics_path, ("\n".join(lines) + "\n").encode("utf-8"))
    paths[METRICS_FILE] = metrics_path

    summary = {
        "dataset_id": report.dataset_id,
        "subject_id": report.subject_id,
        "session_id": report.session_id,
        "n_episodes": report.n_episodes,
        "n_repetitions": report.n_repetitions,
        "seconds_per_selection": [float(s) for s in report.seconds_per_selection],
        "config": report.config,
        "accuracy": {m: [float(a) for a in report.accuracy[m]] for m in report.methods},
        "itr_bits_per_min": {
            m: [float(a) for a in report.itr_bits_per_min[m]] for m in report.methods
        },
        "mean_target_posterior": {
            m: [float(a) for a in report.mean_target_posterior[m]] for m in report.methods
        },
        "mean_nontarget_posterior": {
            m: [float(a) for a in report.mean_nontarget_posterior[m]] for m in report.methods
        },
        "single_trial_confusion": report.single_trial_confusion,
    }
    summary_path = out_dir / SUMMARY_FILE
    _atomic_write(
        summary_path, (json.dumps(summary, indent=2, sort_keys=True) + "\n").encode("utf-8")
    )
    paths[SUMMARY_FILE] = summary_path

    if report.traces is not None:
        for m, rows in report.traces.items():
            trace_lines = ["episode_id,t,character,probability"]
            trace_lines.extend(f"{e},{t},{ch},{repr(p)}" for e, t, ch, p in rows)
            trace_path = out_dir / TRACE_FILES[m]
            _atomic_write(trace_path, ("\n".join(trace_lines) + "\n").encode("utf-8"))
            paths[TRACE_FILES[m]] = trace_path
    return paths


def read_metrics_csv(path) -> list[dict]:
    """Parse a metrics.csv back into typed rows."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            rows.append(
                {
                    "method": row["method"],
                    "dataset": row["dataset"],
                    "subject": row["subject"],
                    "session": row["session"],
                    "repetition": int(row["repetition"]),
                    "accuracy": float(row["accuracy"]),
                    "itr_bits_per_min": float(row["itr_bits_per_min"]),
                    "n_episodes": int(row["n_episodes"]),
                }
            )
    return rows
