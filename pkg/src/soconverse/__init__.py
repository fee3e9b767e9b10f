"""Finite-field split orthogonal groups: generic representations, Bessel
functions, Rankin-Selberg type zeta integrals and gamma factors."""

__version__ = "0.1.0"
