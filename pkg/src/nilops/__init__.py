"""Computations with unstable modules over the mod 2 Steenrod algebra, their
nilpotent filtration, and the polynomial functors attached to them."""

__version__ = "0.1.0"
