"""
transforms - Reversible Level Transforms

Available Transforms:

GEOMETRY:
1. lift1d - Rounded integer 5/3 lifting along pillars and pillar planes
2. fault_geometry - Fault-config OR-prediction and node selection

PROPERTIES:
3. Sum-Haar for continuous fields
4. Modelet (mode + sign-controlled details) for categorical fields

Every analysis step has an exact synthesis inverse on integers.
"""

from transforms.lift1d import LiftPair, analyze_1d, synthesize_1d, analyze_axis, synthesize_axis
from transforms.fault_geometry import (
    FaultConfig,
    FaultConfigMap,
    GeometryDetailPlane,
    derive_config_map,
    predict_config,
    select_node,
    analyze_geometry_level,
    synthesize_geometry_level,
)
from transforms.properties import Direction, FieldPyramid, transform_field

__all__ = [
    "LiftPair",
    "analyze_1d",
    "synthesize_1d",
    "analyze_axis",
    "synthesize_axis",
    "FaultConfig",
    "FaultConfigMap",
    "GeometryDetailPlane",
    "derive_config_map",
    "predict_config",
    "select_node",
    "analyze_geometry_level",
    "synthesize_geometry_level",
    "Direction",
    "FieldPyramid",
    "transform_field",
]
