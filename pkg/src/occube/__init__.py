"""occube: process cubes over object-centric event logs.

Organize event logs with multiple case notions along attribute and
object-type dimensions, slice/dice/re-granularize views, materialize cells
into sublogs, and discover per-object-type annotated directly-follows
models for side-by-side process comparison.
"""

__version__ = "0.1.0"

from occube.errors import BenchError, CubeError, FormatError, ModelError, OccubeError
from occube.model import (
    ACTIVITY,
    TIMESTAMP,
    UNDEFINED,
    AttributeMapping,
    Event,
    EventLog,
    ValidationReport,
    ValueSet,
    ValueSetCollection,
    Violation,
    objects_of_type,
    omap_of,
    validate_log,
    vmap_of,
)

__all__ = [
    "ACTIVITY",
    "TIMESTAMP",
    "UNDEFINED",
    "AttributeMapping",
    "BenchError",
    "CubeError",
    "Event",
    "EventLog",
    "FormatError",
    "ModelError",
    "OccubeError",
    "ValidationReport",
    "ValueSet",
    "ValueSetCollection",
    "Violation",
    "objects_of_type",
    "omap_of",
    "validate_log",
    "vmap_of",
]
