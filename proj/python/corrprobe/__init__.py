"""Gender-correlation probes for masked language models."""

import os
from pathlib import Path

_packaged = Path(__file__).with_name("data")
if _packaged.is_dir():
    os.environ.setdefault("CORRPROBE_DATA_DIR", str(_packaged))

from ._corrprobe import (  # noqa: E402
    BackendError,
    InputError,
    InvariantError,
    __version__,
    accuracy,
    bios_gap,
    bonferroni_alpha,
    chi_square,
    chi_square_p,
    coref_gender,
    counterfactual,
    data_dir,
    disco,
    disco_null,
    linear_fit,
    pearson_r,
    render_report,
    render_report_files,
    rewrite,
)

__all__ = [
    "BackendError",
    "InputError",
    "InvariantError",
    "__version__",
    "accuracy",
    "bios_gap",
    "bonferroni_alpha",
    "chi_square",
    "chi_square_p",
    "coref_gender",
    "counterfactual",
    "data_dir",
    "disco",
    "disco_null",
    "linear_fit",
    "pearson_r",
    "render_report",
    "render_report_files",
    "rewrite",
]
