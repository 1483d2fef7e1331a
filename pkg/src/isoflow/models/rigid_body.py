"""Free rigid body (Euler top) as an isospectral flow on so(3)."""

from __future__ import annotations

import numpy as np

from ..dense import as_cmat
from ..errors import MembershipError
from ..quadratic import DEFAULT_MEMBERSHIP_TOL, AlgebraElement, QuadraticStructure
from .base import IsospectralModel

__all__ = ["RigidBodyModel", "hat", "vee", "DEFAULT_INERTIA", "DEFAULT_MOMENTUM"]

DEFAULT_INERTIA = (1.0, 2.0, 3.0)
# Close to the unstable intermediate axis.
DEFAULT_MOMENTUM = (0.02, 0.9950041652780258, 0.09983341664682815)


def hat(v) -> np.ndarray:
    """Skew matrix with ``hat(v) @ x == cross(v, x)``; works on stacks ``(..., 3)``."""
    v = np.asarray(v, dtype=np.complex128)
    out = np.zeros(v.shape[:-1] + (3, 3), dtype=np.complex128)
    out[..., 0, 1], out[..., 0, 2] = -v[..., 2], v[..., 1]
    out[..., 1, 0], out[..., 1, 2] = v[..., 2], -v[..., 0]
    out[..., 2, 0], out[..., 2, 1] = -v[..., 1], v[..., 0]
    return out


def vee(W) -> np.ndarray:
    """Inverse of :func:`hat`, read from the antisymmetric part of ``W``."""
    W = np.asarray(W)
    return 0.5 * np.stack(
        (W[..., 2, 1] - W[..., 1, 2], W[..., 0, 2] - W[..., 2, 0], W[..., 1, 0] - W[..., 0, 1]),
        axis=-1,
    )


class RigidBodyModel(IsospectralModel):
    """Euler equations ``dpi/dt = pi x Omega`` with ``Omega = pi / inertia``.

    With ``W = hat(pi)`` the choice ``B(W) = -hat(Omega)`` gives
    ``[B(W), W] = hat(pi x Omega)``, so ``dW/dt = [B(W), W]`` is the Euler top.
    ``H = 1/2 sum pi_k^2 / I_k`` and ``tr(W^2) = -2 |pi|^2``.
    """

    name = "rigid_body"

    def __init__(self, inertia=DEFAULT_INERTIA):
        inertia = np.asarray(inertia, dtype=np.float64)
        if inertia.shape != (3,) or (inertia <= 0).any():
            raise ValueError("inertia must be three positive numbers")
        if len(set(inertia.tolist())) != 3:
            raise ValueError("inertia moments must be distinct")
        self.inertia = inertia
        self.structure = QuadraticStructure.identity(3)

    def B_stack(self, X, in_algebra=False):
        return -hat(vee(X) / self.inertia)

    def _checked(self, W, tol: float = DEFAULT_MEMBERSHIP_TOL):
        W = super()._checked(W, tol)
        im = float(np.abs(W.imag).max())
        if im > tol:
            raise MembershipError(f"rigid body state must be real, imaginary part {im:.3e}", im)
        return W

    def H(self, W):
        pi = vee(as_cmat(getattr(W, "matrix", W))).real
        return 0.5 * float(np.sum(pi**2 / self.inertia))

    def initial_state(self, momentum=DEFAULT_MOMENTUM) -> AlgebraElement:
        return AlgebraElement(self.structure, hat(np.asarray(momentum, dtype=np.float64)))
