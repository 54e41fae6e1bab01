"""Exception types shared across the package."""


class PolyformError(Exception):
    """Base class for all package errors."""


class DuplicatePoints(PolyformError):
    """Two input points coincide within the coincidence tolerance."""


class CoincidentPoints(PolyformError):
    """A pairwise distance fell below the coincidence tolerance during evaluation."""


class DegenerateHull(PolyformError):
    """Points are collinear or coplanar; no 3D convex hull exists."""


class ConstraintMismatch(PolyformError):
    """Configuration constraint is incompatible with the requested energy model."""


class UnsupportedGradient(PolyformError):
    """The energy model has no smooth gradient (maximin objective)."""


class InfiniteGroup(PolyformError):
    """Group order requested for a continuous (infinite) point group."""
