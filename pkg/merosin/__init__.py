"""Dynamics of the meromorphic family f(z) = sin z / (z² + λ)."""
