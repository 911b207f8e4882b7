"""Exception types shared across the toolkit.

Two families matter to callers: InputError for bad files, configs, or
malformed data (CLI exit code 1), and NumericalError for computations
that are degenerate or impossible on otherwise well-formed input
(CLI exit code 2).
"""


class ToolkitError(Exception):
    pass


class InputError(ToolkitError):
    pass


class NumericalError(ToolkitError):
    pass


class AngleAtBranchCut(NumericalError):
    """Rotation angle too close to pi for a principal-branch logarithm."""


class TooFewPoints(InputError):
    """Operation needs more points than the cloud provides."""


class EmptyTarget(InputError):
    """Nearest-neighbor target cloud has no points."""


class DegenerateConfiguration(NumericalError):
    """Rigid fit is not unique (collinear or coincident correspondences)."""


class RankDeficient(NumericalError):
    """Correction system is rank deficient (view graph not connected)."""


class ShapeMismatch(InputError):
    """Inputs disagree in size where they must match."""


class DisconnectedAfterGating(NumericalError):
    """Overlap gating left the view graph disconnected."""


class UnreferencedVertex(InputError):
    """Mesh vertex belongs to no face."""


class DegenerateBoundingBox(NumericalError):
    """Mesh bounding box has zero diagonal."""


class DegenerateTriangle(NumericalError):
    """Triangle vertices are collinear or coincident."""


class MalformedHeader(InputError):
    """PLY header violates the format grammar."""


class CountMismatch(InputError):
    """PLY body length disagrees with header element counts."""


class UnsupportedFormat(InputError):
    """PLY storage format not supported (e.g. binary big endian)."""


class UnknownConfigKey(InputError):
    """Config file contains a key that is not a documented tunable."""
