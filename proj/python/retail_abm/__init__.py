"""Python bindings for the pharmacy retail agent-based model."""

import os as _os
from pathlib import Path as _Path

# Installed wheels ship the bundled data next to the package.
_packaged = _Path(__file__).resolve().parent / "data"
if _packaged.is_dir():
    _os.environ.setdefault("RETAIL_ABM_DATA", str(_packaged))

from ._core import (
    ContractError,
    EstimationError,
    ParseError,
    ValidationError,
    __version__,
    anova3,
    conjoint_recovery,
    default_data_dir,
    distance_km,
    f_upper_tail,
    generate_town,
    min_sample_size,
    relative_importance,
    run_cli,
    simulate,
)

__all__ = [
    "ContractError",
    "EstimationError",
    "ParseError",
    "ValidationError",
    "__version__",
    "anova3",
    "conjoint_recovery",
    "default_data_dir",
    "distance_km",
    "f_upper_tail",
    "generate_town",
    "min_sample_size",
    "relative_importance",
    "run_cli",
    "simulate",
]
