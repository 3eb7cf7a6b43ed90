"""Software twin of a vision-based tactile sensing foot and gripper fingertip.

Subpackages: skin simulation, dense inverse-search optical flow with a
compiled kernel core, from-scratch pose-regression network, balance and
grasp-force controllers, dataset harness, and a live steering service.
"""

__version__ = "0.1.0"


def flow_backend() -> str:
    """Name of the active flow kernel backend ("cython" or "python")."""
    from .optflow import backend

    return backend.ACTIVE
