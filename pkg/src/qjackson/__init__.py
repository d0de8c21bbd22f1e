"""Numerics and identity checks for multi-dimensional Jackson integrals."""
