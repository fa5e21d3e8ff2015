"""Exact verification of the supersymmetric qKZ-Ruijsenaars and KZ-Calogero correspondences."""

__version__ = "0.1.0"
