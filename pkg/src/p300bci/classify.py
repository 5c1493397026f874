"""Two-class Riemannian ERP model: deterministic and probabilistic MDM.

Training estimates one geometric mean per ERP class (target / non-target)
plus a dispersion around each center.  Prediction is either the hard
minimum-distance rule or, for the probabilistic variant, per-class
log-likelihood exponents of a Gaussian on the manifold.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, MissingClass
from .features import NONTARGET, TARGET
from .spd import affine_distance, karcher_mean, squared_affine_distance, validate_spd

__all__ = [
    "ClassModel",
    "fit_mdm",
    "mdm_predict",
    "pmdm_log_likelihoods",
    "save_model",
    "load_model",
    "MODEL_MAGIC",
]

# Dispersion floor; keeps the unequal-dispersion likelihood finite when a
# class collapses onto its center.
SIGMA_FLOOR = 1e-6

MODEL_MAGIC = "ASAPMODEL/1"


@dataclass(frozen=True)
class ClassModel:
    """Per-class geometric centers and dispersions, immutable after fit."""

    center_target: np.ndarray
    center_nontarget: np.ndarray
    sigma_target: float
    sigma_nontarget: float

    @property
    def order(self) -> int:
        return self.center_target.shape[0]


def fit_mdm(features, labels, tol: float = 1e-8, max_iter: int = 50) -> ClassModel:
    """Fit the class centers (geometric means) and dispersions.

    ``features`` and ``labels`` are aligned sequences; labels are
    :data:`~p300bci.features.TARGET` / :data:`~p300bci.features.NONTARGET`.
    The dispersion of a class is the root mean squared distance of its
    features to the class center, floored at ``SIGMA_FLOOR``.
    """
    features = list(features)
    labels = list(labels)
    if len(features) != len(labels):
        raise ValueError("features and labels must be aligned")
    by_class = {TARGET: [], NONTARGET: []}
    for feat, lab in zip(features, labels):
        if lab not in by_class:
            raise ValueError(f"unknown label {lab!r}")
        by_class[lab].append(np.asarray(feat, dtype=float))
    for lab, group in by_class.items():
        if not group:
            raise MissingClass(f"no training samples for class {lab!r}")

    centers = {}
    sigmas = {}
    for lab, group in by_class.items():
        center = karcher_mean(group, tol=tol, max_iter=max_iter)
        mean_sq = np.mean([squared_affine_distance(f, center) for f in group])
        centers[lab] = center
        sigmas[lab] = max(float(np.sqrt(mean_sq)), SIGMA_FLOOR)
    return ClassModel(
        center_target=centers[TARGET],
        center_nontarget=centers[NONTARGET],
        sigma_target=sigmas[TARGET],
        sigma_nontarget=sigmas[NONTARGET],
    )


def _check_order(model: ClassModel, feature: np.ndarray) -> None:
    if feature.shape != model.center_target.shape:
        raise DimensionMismatch(
            f"feature shape {feature.shape} != model order {model.order}"
        )


def mdm_predict(model: ClassModel, feature) -> str:
    """Assign the feature to the class with the closer center.

    Ties go to the non-target class, which dominates the flash stream.
    """
    feature = np.asarray(feature, dtype=float)
    _check_order(model, feature)
    d_target = affine_distance(feature, model.center_target)
    d_nontarget = affine_distance(feature, model.center_nontarget)
    return TARGET if d_target < d_nontarget else NONTARGET


def pmdm_log_likelihoods(
    model: ClassModel, feature, equal_dispersion: bool = True
) -> tuple[float, float]:
    """Log-likelihood exponents of the manifold Gaussian for each class.

    With ``equal_dispersion`` (the default) both classes share one dispersion
    and the exponent reduces to the negative squared distance to the class
    center; the shared scale and the normalization constant cancel once the
    character posterior is normalized.  With ``equal_dispersion=False`` each
    exponent is scaled by its own 1/(2 sigma^2); the normalization constant
    has no closed form and is still omitted, so these values are unnormalized
    and only their differences are meaningful.

    Returns ``(llh_target, llh_nontarget)``, both <= 0.
    """
    feature = np.asarray(feature, dtype=float)
    _check_order(model, feature)
    d2_target = squared_affine_distance(feature, model.center_target)
    d2_nontarget = squared_affine_distance(feature, model.center_nontarget)
    if equal_dispersion:
        return -d2_target, -d2_nontarget
    return (
        -d2_target / (2.0 * model.sigma_target**2),
        -d2_nontarget / (2.0 * model.sigma_nontarget**2),
    )


def save_model(path, model: ClassModel, prototype: np.ndarray) -> None:
    """Serialize a fitted model plus the prototype used at feature time.

    Layout: magic line, one JSON header line with the dimensions and
    dispersions, then the raw matrix payloads as little-endian 64-bit floats
    in row-major order (target center, non-target center, prototype).
    """
    prototype = np.asarray(prototype, dtype=float)
    header = {
        "order": model.order,
        "prototype_channels": int(prototype.shape[0]),
        "prototype_samples": int(prototype.shape[1]),
        "sigma_target": model.sigma_target,
        "sigma_nontarget": model.sigma_nontarget,
    }
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC.encode("ascii") + b"\n")
        fh.write(json.dumps(header, sort_keys=True).encode("ascii") + b"\n")
        fh.write(np.ascontiguousarray(model.center_target, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(model.center_nontarget, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(prototype, dtype="<f8").tobytes())


def load_model(path) -> tuple[ClassModel, np.ndarray]:
    """Inverse of :func:`save_model`; returns ``(model, prototype)``."""
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.readline().strip().decode("ascii", errors="replace")
        if magic != MODEL_MAGIC:
            raise ValueError(f"{path}: not a {MODEL_MAGIC} file (got {magic!r})")
        header = json.loads(fh.readline().decode("ascii"))
        order = int(header["order"])
        channels = int(header["prototype_channels"])
        samples = int(header["prototype_samples"])
        payload = fh.read()
    expected = (2 * order * order + channels * samples) * 8
    if len(payload) != expected:
        raise ValueError(
            f"{path}: payload is {len(payload)} bytes, expected {expected}"
        )
    floats = np.frombuffer(payload, dtype="<f8")
    k = order * order
    center_target = validate_spd(floats[:k].reshape(order, order))
    center_nontarget = validate_spd(floats[k : 2 * k].reshape(order, order))
    prototype = floats[2 * k :].reshape(channels, samples).copy()
    model = ClassModel(
        center_target=center_target,
        center_nontarget=center_nontarget,
        sigma_target=float(header["sigma_target"]),
        sigma_nontarget=float(header["sigma_nontarget"]),
    )
    return model, prototype
