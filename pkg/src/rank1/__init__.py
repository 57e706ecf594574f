"""Exact rank-one cutting-and-stacking constructions, correlations and verifiers."""

from .correl import CorrelationResult, averaging_norm, correlation, correlation_series
from .schedule import (
    AlgebraicStageParams,
    ConstructionSchedule,
    StageSpec,
    algebraic_schedule,
    algebraic_spacers,
    decay_rate_schedule,
    derive_heights,
    explicit_schedule,
    sidon_growth_schedule,
)
from .arith import find_primitive_root
from .tower import LevelSet, column_offsets, expand_level, shift_levels

__all__ = [
    "AlgebraicStageParams",
    "ConstructionSchedule",
    "CorrelationResult",
    "LevelSet",
    "StageSpec",
    "algebraic_schedule",
    "algebraic_spacers",
    "averaging_norm",
    "column_offsets",
    "correlation",
    "correlation_series",
    "decay_rate_schedule",
    "derive_heights",
    "expand_level",
    "explicit_schedule",
    "find_primitive_root",
    "shift_levels",
    "sidon_growth_schedule",
]
