"""Structure-preserving integrators for isospectral flows on quadratic Lie algebras."""

__version__ = "0.1.0"
