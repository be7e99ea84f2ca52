"""Exception types shared across the toolkit.

Every error carries a short machine-readable ``code`` so the HTTP layer can
map failures onto ``{code, message, context}`` bodies without string parsing.
"""

from __future__ import annotations


class AsBuiltError(Exception):
    """Base class for all toolkit errors."""

    code = "error"

    def __init__(self, message: str, **context):
        super().__init__(message)
        self.context = context


class DegenerateInputError(AsBuiltError):
    """Geometric configuration too degenerate to solve (collinear, coincident...)."""

    code = "degenerate_input"


class BehindCameraError(AsBuiltError):
    """A point to be projected lies at or behind the camera plane."""

    code = "behind_camera"


class ZeroBaselineError(AsBuiltError):
    """Two views are too close (or their rays too parallel) to triangulate."""

    code = "zero_baseline"


class PatchBoundsError(AsBuiltError):
    """A correlation patch extends outside its image."""

    code = "patch_out_of_bounds"


class MatchFailureError(AsBuiltError):
    """Patch matching failed for one or more required points."""

    code = "match_failure"


class EmptyDatabaseError(AsBuiltError):
    """Spatial database has no map points to answer the query."""

    code = "empty_database"


class QueryMissError(AsBuiltError):
    """A pick ray does not intersect the model mesh."""

    code = "query_miss"


class IntegrityError(AsBuiltError):
    """Referential integrity violation (e.g. point tagged to absent keyframe)."""

    code = "integrity"


class NoScaleError(AsBuiltError):
    """No window scale factor available for a metric measurement."""

    code = "no_scale"


class StageOrderError(AsBuiltError):
    """A pipeline command was invoked before its prerequisite stages."""

    code = "stage_order"


class FormatError(AsBuiltError):
    """A project file failed to parse or referenced something missing."""

    code = "format"
