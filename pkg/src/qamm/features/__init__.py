from .matrix import FeatureMatrix, build_matrix, write_features_csv, write_schema_json
from .schema import (
    ALL_NAMES,
    FEATURE_SETS,
    GROUPS,
    LOOKBACKS,
    WARM_UP,
    feature_set,
)

__all__ = [
    "ALL_NAMES",
    "FEATURE_SETS",
    "FeatureMatrix",
    "GROUPS",
    "LOOKBACKS",
    "WARM_UP",
    "build_matrix",
    "feature_set",
    "write_features_csv",
    "write_schema_json",
]
