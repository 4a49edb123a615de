"""Charged-particle motion in a uniform magnetic field on H3, S3 and E3."""
from .geometry import (
    AmbientPoint,
    CylPoint,
    Plane,
    SpaceModel,
    TransversalShift,
)
from .dynamics import Adaptive, CylState, FixedStep, MotionConstants, Trajectory

__all__ = [
    "AmbientPoint", "CylPoint", "Plane", "SpaceModel", "TransversalShift",
    "Adaptive", "CylState", "FixedStep", "MotionConstants", "Trajectory",
]
__version__ = "0.1.0"
