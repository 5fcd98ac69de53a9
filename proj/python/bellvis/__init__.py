"""Critical visibility of entangled states via local-model LPs."""

from ._core import (
    AngleVector,
    ConfigError,
    ExperimentConfig,
    NumericalError,
    ObservableSetting,
    PureState,
    ShapeError,
    critical_visibility,
    export_mps,
    lp_index_bytes,
    make_ghz,
    minimize_critical_visibility,
    outcome_probability,
)

__all__ = [
    "AngleVector",
    "ConfigError",
    "ExperimentConfig",
    "NumericalError",
    "ObservableSetting",
    "PureState",
    "ShapeError",
    "critical_visibility",
    "export_mps",
    "lp_index_bytes",
    "make_ghz",
    "minimize_critical_visibility",
    "outcome_probability",
]
