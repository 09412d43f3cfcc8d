"""PPG fiducial point detection."""

from fiducials.points import (
    DICROTIC_NOTCH,
    FIDUCIAL_COUNT,
    FIDUCIAL_NAMES,
    FiducialSet,
    locate_fiducials,
    locate_in_bundle,
)

__all__ = [
    "DICROTIC_NOTCH",
    "FIDUCIAL_COUNT",
    "FIDUCIAL_NAMES",
    "FiducialSet",
    "locate_fiducials",
    "locate_in_bundle",
]
