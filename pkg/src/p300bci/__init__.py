"""Riemannian P300 speller pipeline.

Prototype-extended covariance features, probabilistic minimum-distance-to-mean
ERP classification, and Bayesian accumulation of character probabilities, with
an occurrence-counting baseline, a synthetic oddball session generator and a
within-session evaluation harness.
"""

from .accumulate import ASAP, OM, AccumulatorState, asap_update, decide, init_accumulator, om_update
from .classify import ClassModel, fit_mdm, load_model, mdm_predict, pmdm_log_likelihoods, save_model
from .features import (
    NONTARGET,
    TARGET,
    FlashEvent,
    RawRecording,
    Trial,
    bandpass_filter,
    epoch,
    estimate_prototype,
    extended_covariance,
)
from .evaluate import (
    METHOD_ASAP,
    METHOD_OM,
    EvalReport,
    PipelineConfig,
    emit_report,
    itr,
    run_within_session,
)
from .sessionio import SessionRecord, read_session, write_session
from .simulate import SimConfig, erp_template, flash_schedule, generate_session
from .spd import affine_distance, karcher_mean, squared_affine_distance, validate_spd

__version__ = "0.1.0"

__all__ = [
    "ASAP",
    "OM",
    "AccumulatorState",
    "ClassModel",
    "EvalReport",
    "FlashEvent",
    "METHOD_ASAP",
    "METHOD_OM",
    "NONTARGET",
    "PipelineConfig",
    "RawRecording",
    "SessionRecord",
    "SimConfig",
    "TARGET",
    "Trial",
    "affine_distance",
    "asap_update",
    "bandpass_filter",
    "decide",
    "emit_report",
    "epoch",
    "erp_template",
    "estimate_prototype",
    "extended_covariance",
    "fit_mdm",
    "flash_schedule",
    "generate_session",
    "init_accumulator",
    "itr",
    "karcher_mean",
    "load_model",
    "mdm_predict",
    "om_update",
    "pmdm_log_likelihoods",
    "read_session",
    "run_within_session",
    "save_model",
    "squared_affine_distance",
    "validate_spd",
    "write_session",
    "__version__",
]
