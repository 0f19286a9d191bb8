"""labeldist: distance metrics for labeled arrays and the experiments around them."""

__version__ = "0.1.0"

from .core import (
    LabeledArray,
    LabelInventory,
    ParseError,
    RangeError,
    ShapeMismatchError,
    inventory,
    load_array,
    save_array,
)
from .metrics import (
    ContingencyTable,
    MetricNotApplicableError,
    MetricResult,
    RegionMapping,
    bsm_distance,
    build_contingency,
    compare_all,
    compute_metric,
    hamming,
    lad,
    madlad,
    nhd,
    region_mapping,
    rm_distance,
)

__all__ = [
    "LabeledArray",
    "LabelInventory",
    "ParseError",
    "RangeError",
    "ShapeMismatchError",
    "ContingencyTable",
    "MetricNotApplicableError",
    "MetricResult",
    "RegionMapping",
    "inventory",
    "load_array",
    "save_array",
    "bsm_distance",
    "build_contingency",
    "compare_all",
    "compute_metric",
    "hamming",
    "lad",
    "madlad",
    "nhd",
    "region_mapping",
    "rm_distance",
    "__version__",
]
