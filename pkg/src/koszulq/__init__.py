"""koszulq: exact verification of Koszul duality for quadratic deformation quantizations."""

__version__ = "0.1.0"
