"""Exact computation with Virasoro minimal models: modules, Zhu algebras,
conformal blocks on the projective line, and the integrable connection."""

__version__ = "0.1.0"
