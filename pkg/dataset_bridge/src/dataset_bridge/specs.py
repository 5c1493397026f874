"""Expected shapes of the supported public P300 speller datasets.

Conversion validates every count against this table and fails loudly on any
deviation; a silently truncated dataset would corrupt downstream accuracy
tables.
"""

from __future__ import annotations

from dataclasses import dataclass


class SchemaMismatch(ValueError):
    """Converted data deviates from the published dataset description."""


class DownloadError(RuntimeError):
    """A source recording is neither cached locally nor reachable."""


@dataclass(frozen=True)
class DatasetSpec:
    dataset_id: str
    n_channels: int
    n_subjects: int
    characters_per_subject: int
    target_trials_per_character: int
    nontarget_trials_per_character: int
    grid_rows: int = 6
    grid_cols: int = 6
    soa_ms: float = 250.0
    epoch_seconds: float = 1.0
    file_pattern: str = "A{subject:02d}.mat"
    channel_names: tuple[str, ...] = ()

    @property
    def flashes_per_character(self) -> int:
        return self.target_trials_per_character + self.nontarget_trials_per_character

    @property
    def n_characters(self) -> int:
        return self.grid_rows * self.grid_cols


SPECS = {
    "bnci2014_008": DatasetSpec(
        dataset_id="bnci2014_008",
        n_channels=8,
        n_subjects=8,
        characters_per_subject=35,
        target_trials_per_character=20,
        nontarget_trials_per_character=100,
        file_pattern="A{subject:02d}.mat",
        channel_names=("Fz", "Cz", "Pz", "Oz", "P3", "P4", "PO7", "PO8"),
    ),
    "bnci2014_009": DatasetSpec(
        dataset_id="bnci2014_009",
        n_channels=16,
        n_subjects=10,
        characters_per_subject=18,
        target_trials_per_character=16,
        nontarget_trials_per_character=80,
        file_pattern="A{subject:02d}S.mat",
        channel_names=(
            "Fz", "FCz", "Cz", "CPz", "Pz", "Oz", "F3", "F4",
            "C3", "C4", "CP3", "CP4", "P3", "P4", "PO7", "PO8",
        ),
    ),
}

BASE_URL = "https://lampx.tugraz.at/~bci/database/"
URL_PATHS = {
    "bnci2014_008": "008-2014/",
    "bnci2014_009": "009-2014/",
}
