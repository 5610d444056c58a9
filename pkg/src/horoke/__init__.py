"""Existence criteria for canonical Kähler metrics on Fano horosymmetric manifolds.

Exact rational geometry and certified quadrature decide Kähler-Einstein,
soliton, Mabuchi and coupled existence from combinatorial data; masolver
runs the real Monge-Ampère continuity path numerically at rank one.
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
