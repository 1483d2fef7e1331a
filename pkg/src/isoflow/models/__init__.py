"""Concrete isospectral flow models."""

from .base import IsospectralModel, StaticModel
from .rigid_body import RigidBodyModel, hat, vee
from .zeitlin import ZeitlinModel, default_coefficients, load_coefficients, spin_generators

__all__ = [
    "IsospectralModel",
    "StaticModel",
    "RigidBodyModel",
    "ZeitlinModel",
    "hat",
    "vee",
    "spin_generators",
    "default_coefficients",
    "load_coefficients",
    "make_model",
]


def make_model(name: str, N: int | None = None) -> IsospectralModel:
    """Build a model by its registry name (``zeitlin``, ``rigid_body``, ``static``)."""
    if name == "zeitlin":
        return ZeitlinModel(N)
    if name in ("rigid_body", "rigidbody"):
        return RigidBodyModel()
    if name == "static":
        return StaticModel(N if N is not None else 3)
    raise ValueError(f"unknown model {name!r}")
