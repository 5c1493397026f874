"""Command-line entry point: simulate, evaluate, train, replay, report.

Exit statuses: 0 on success, 1 on runtime failure, 2 on usage errors.
Every run drops a ``run.json`` provenance file (full configuration, seed and
package version) next to its outputs; ``simulate --from-run run.json``
reproduces a simulation bit for bit.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .classify import fit_mdm, load_model, mdm_predict, pmdm_log_likelihoods, save_model
from .accumulate import ASAP, OM, asap_update, decide, init_accumulator, om_update
from .errors import PipelineError
from .evaluate import (
    METHOD_ASAP,
    METHOD_OM,
    PipelineConfig,
    emit_report,
    read_metrics_csv,
    run_within_session,
)
from .features import TARGET, bandpass_filter, epoch, estimate_prototype, extended_covariance
from .sessionio import read_session, write_session, _atomic_write
from .simulate import PSEUDO_RANDOM, ROW_COLUMN, SimConfig, generate_session


def _write_run_json(out_dir: Path, command: str, config: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {"command": command, "version": __version__, "config": config}
    _atomic_write(
        out_dir / "run.json",
        (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode("utf-8"),
    )


def _add_pipeline_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--low-hz", type=float, default=1.0, help="band-pass low edge")
    parser.add_argument("--high-hz", type=float, default=20.0, help="band-pass high edge")
    parser.add_argument("--shrinkage", type=float, default=0.01, help="covariance shrinkage in [0,1)")
    parser.add_argument(
        "--unequal-dispersion",
        action="store_true",
        help="scale likelihood exponents by per-class dispersions",
    )
    parser.add_argument(
        "--epoch-seconds",
        type=float,
        default=None,
        help="override the session's epoch length",
    )


def _pipeline_config(args, n_train: int | None = None) -> PipelineConfig:
    cfg = PipelineConfig(
        low_hz=args.low_hz,
        high_hz=args.high_hz,
        shrinkage=args.shrinkage,
        equal_dispersion=not args.unequal_dispersion,
        epoch_seconds=args.epoch_seconds,
    )
    if n_train is not None:
        cfg.n_train_episodes = n_train
    if getattr(args, "overhead_seconds", None) is not None:
        cfg.overhead_seconds = args.overhead_seconds
    return cfg


def cmd_simulate(args) -> int:
    if args.from_run:
        with open(args.from_run, encoding="utf-8") as fh:
            stored = json.load(fh)
        if stored.get("command") != "simulate":
            print(f"error: {args.from_run} is not a simulate run", file=sys.stderr)
            return 1
        cfg = stored["config"]
        for key, value in cfg.items():
            if key != "out" and hasattr(args, key):
                setattr(args, key, value)

    config_echo = {
        "out": str(args.out),
        "sessions": args.sessions,
        "chars": args.chars,
        "reps": args.reps,
        "channels": args.channels,
        "grid_size": args.grid_size,
        "flash_mode": args.flash_mode,
        "fs": args.fs,
        "soa_ms": args.soa_ms,
        "epoch_seconds": args.epoch_seconds,
        "erp_amplitude": args.erp_amplitude,
        "noise_scale": args.noise_scale,
        "seed": args.seed,
    }
    L = args.grid_size * args.grid_size
    configs = []
    for i in range(args.sessions):
        session_seed = args.seed + i
        sim = SimConfig(
            L=L,
            C=args.channels,
            fs=args.fs,
            n_repetitions=args.reps,
            flash_mode=args.flash_mode,
            soa_ms=args.soa_ms,
            erp_amplitude=args.erp_amplitude,
            noise_scale=args.noise_scale,
            seed=session_seed,
            epoch_seconds=args.epoch_seconds if args.epoch_seconds else 1.0,
        )
        sim.validate()
        configs.append(sim)

    out_dir = Path(args.out)
    _write_run_json(out_dir, "simulate", config_echo)
    for i, sim in enumerate(configs):
        session_seed = sim.seed
        targets = np.random.default_rng(session_seed + 10_000).integers(0, L, size=args.chars)
        record = generate_session(sim, targets)
        record.subject_id = f"{i:02d}"
        record.session_id = str(session_seed)
        directory = out_dir / f"sim-{i:02d}"
        write_session(record, directory)
        duration = record.recording.n_samples / record.recording.fs
        print(
            f"{directory}: {args.chars} characters, {len(record.events)} flashes, "
            f"{duration:.1f} s at {sim.fs:g} Hz (seed {session_seed})"
        )
    return 0


def cmd_evaluate(args) -> int:
    config = _pipeline_config(args, n_train=args.train_episodes)
    out_dir = Path(args.out)

    sessions = [read_session(d) for d in args.input]
    reports = [
        run_within_session(s, config, collect_traces=not args.no_traces) for s in sessions
    ]

    _write_run_json(
        out_dir,
        "evaluate",
        {
            "input": [str(d) for d in args.input],
            "out": str(args.out),
            "train_episodes": args.train_episodes,
            "overhead_seconds": args.overhead_seconds,
            "no_traces": args.no_traces,
            **{k: getattr(args, k) for k in ("low_hz", "high_hz", "shrinkage")},
            "equal_dispersion": not args.unequal_dispersion,
        },
    )
    merged_rows = []
    for input_dir, report in zip(args.input, reports):
        emit_report(report, out_dir / Path(input_dir).name)
        for m in report.methods:
            for r in range(report.n_repetitions):
                merged_rows.append((m, report, r))

        print(f"\n{report.dataset_id} subject {report.subject_id} session {report.session_id} "
              f"({report.n_episodes} test episodes)")
        print(f"{'rep':>4}  {METHOD_ASAP:>8}  {METHOD_OM:>8}")
        for r in range(report.n_repetitions):
            print(
                f"{r + 1:>4}  {report.accuracy[METHOD_ASAP][r]:>8.2f}  "
                f"{report.accuracy[METHOD_OM][r]:>8.2f}"
            )

    lines = ["method,dataset,subject,session,repetition,accuracy,itr_bits_per_min,n_episodes"]
    for m, report, r in merged_rows:
        lines.append(
            f"{m},{report.dataset_id},{report.subject_id},{report.session_id},"
            f"{r + 1},{repr(float(report.accuracy[m][r]))},"
            f"{repr(float(report.itr_bits_per_min[m][r]))},{report.n_episodes}"
        )
    _atomic_write(out_dir / "metrics.csv", ("\n".join(lines) + "\n").encode("utf-8"))
    return 0


def cmd_train(args) -> int:
    session = read_session(args.input)
    config = _pipeline_config(args)
    filtered = bandpass_filter(session.recording, config.low_hz, config.high_hz)
    epoch_seconds = config.epoch_seconds if config.epoch_seconds else session.epoch_seconds

    events = sorted(session.events, key=lambda ev: ev.onset)
    episode_ids = sorted({ev.episode for ev in events})
    if args.train_episodes:
        keep = set(episode_ids[: args.train_episodes])
        events = [ev for ev in events if ev.episode in keep]
    labeled = [ev for ev in events if ev.is_target is not None]
    trials = epoch(filtered, labeled, epoch_seconds)
    prototype = estimate_prototype([t for t in trials if t.label == TARGET])
    features = [extended_covariance(t, prototype, config.shrinkage) for t in trials]
    model = fit_mdm(features, [t.label for t in trials])
    save_model(args.model_out, model, prototype)
    n_target = sum(t.label == TARGET for t in trials)
    print(
        f"{args.model_out}: order {model.order}, {n_target}/{len(trials)} target trials, "
        f"sigma T/NT = {model.sigma_target:.3f}/{model.sigma_nontarget:.3f}"
    )
    _write_run_json(
        Path(args.model_out).parent,
        "train",
        {
            "input": str(args.input),
            "model_out": str(args.model_out),
            "train_episodes": args.train_episodes,
            **{k: getattr(args, k) for k in ("low_hz", "high_hz", "shrinkage")},
        },
    )
    return 0


def cmd_replay(args) -> int:
    session = read_session(args.input)
    model, prototype = load_model(args.model)
    config = _pipeline_config(args)
    filtered = bandpass_filter(session.recording, config.low_hz, config.high_hz)
    epoch_seconds = config.epoch_seconds if config.epoch_seconds else session.epoch_seconds

    events = sorted(session.events, key=lambda ev: ev.onset)
    episode_ids = []
    for ev in events:
        if ev.episode not in episode_ids:
            episode_ids.append(ev.episode)
    if args.episode is not None:
        episode_ids = [args.episode]

    for eid in episode_ids:
        ep_events = [ev for ev in events if ev.episode == eid]
        trials = epoch(filtered, ep_events, epoch_seconds)
        asap_state = init_accumulator(session.L, mode=ASAP)
        om_state = init_accumulator(session.L, mode=OM)
        print(f"episode {eid}:")
        for trial in trials:
            feature = extended_covariance(trial, prototype, config.shrinkage)
            llh_t, llh_nt = pmdm_log_likelihoods(model, feature, config.equal_dispersion)
            asap_state = asap_update(asap_state, llh_t, llh_nt, trial.event.flashed)
            om_state = om_update(om_state, mdm_predict(model, feature), trial.event.flashed)
            a_ch, a_p = decide(asap_state)
            o_ch, o_p = decide(om_state)
            print(
                f"  t={asap_state.t:>3}  {METHOD_ASAP}: char {a_ch:>2} p={a_p:.4f}  "
                f"{METHOD_OM}: char {o_ch:>2} p={o_p:.4f}"
            )
    return 0


def cmd_report(args) -> int:
    rows = []
    for path in args.inputs:
        rows.extend(read_metrics_csv(path))
    lines = ["method,dataset,subject,session,repetition,accuracy,itr_bits_per_min,n_episodes"]
    for r in rows:
        lines.append(
            f"{r['method']},{r['dataset']},{r['subject']},{r['session']},"
            f"{r['repetition']},{repr(r['accuracy'])},{repr(r['itr_bits_per_min'])},"
            f"{r['n_episodes']}"
        )
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    _atomic_write(out_path, ("\n".join(lines) + "\n").encode("utf-8"))
    _write_run_json(
        out_path.parent, "report",
        {"inputs": [str(p) for p in args.inputs], "out": str(args.out)},
    )
    print(f"{args.out}: {len(rows)} rows from {len(args.inputs)} files")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="p300bci",
        description="Riemannian P300 speller pipeline",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="write synthetic session directories")
    p_sim.add_argument("--out", required=True, help="output directory")
    p_sim.add_argument("--sessions", type=int, default=1)
    p_sim.add_argument("--chars", type=int, default=10, help="characters spelled per session")
    p_sim.add_argument("--reps", type=int, default=10, help="repetitions per character")
    p_sim.add_argument("--channels", type=int, default=8)
    p_sim.add_argument("--grid-size", type=int, default=6, help="square grid side")
    p_sim.add_argument("--flash-mode", choices=[ROW_COLUMN, PSEUDO_RANDOM], default=ROW_COLUMN)
    p_sim.add_argument("--fs", type=float, default=256.0)
    p_sim.add_argument("--soa-ms", type=float, default=250.0)
    p_sim.add_argument("--epoch-seconds", type=float, default=1.0)
    p_sim.add_argument("--erp-amplitude", type=float, default=1.0)
    p_sim.add_argument("--noise-scale", type=float, default=1.0)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--from-run", default=None, help="reproduce from a run.json")
    p_sim.set_defaults(func=cmd_simulate)

    p_eval = sub.add_parser("evaluate", help="within-session accuracy/ITR per repetition")
    p_eval.add_argument("--input", nargs="+", required=True, help="session directories")
    p_eval.add_argument("--out", required=True, help="report directory")
    p_eval.add_argument("--train-episodes", type=int, default=6)
    p_eval.add_argument("--overhead-seconds", type=float, default=0.0)
    p_eval.add_argument("--no-traces", action="store_true", help="skip posterior trace CSVs")
    _add_pipeline_flags(p_eval)
    p_eval.set_defaults(func=cmd_evaluate)

    p_train = sub.add_parser("train", help="fit and serialize a class model")
    p_train.add_argument("--input", required=True, help="session directory")
    p_train.add_argument("--model-out", required=True, help="model file to write")
    p_train.add_argument(
        "--train-episodes", type=int, default=0, help="labeled episodes to use (0 = all)"
    )
    _add_pipeline_flags(p_train)
    p_train.set_defaults(func=cmd_train)

    p_replay = sub.add_parser("replay", help="stream per-flash posteriors for one session")
    p_replay.add_argument("--input", required=True, help="session directory")
    p_replay.add_argument("--model", required=True, help="model file from `train`")
    p_replay.add_argument("--episode", type=int, default=None)
    _add_pipeline_flags(p_replay)
    p_replay.set_defaults(func=cmd_replay)

    p_report = sub.add_parser("report", help="merge metrics CSVs")
    p_report.add_argument("--inputs", nargs="+", required=True)
    p_report.add_argument("--out", required=True)
    p_report.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (PipelineError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
