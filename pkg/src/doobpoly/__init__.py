"""Exact polynomial operator algebra for Doob h-transforms of diffusion models."""
from .diffop import DiffusionModel, h_transform
from .polyring import GaussRat, Poly, format_poly, parse_poly

__all__ = ["DiffusionModel", "GaussRat", "Poly", "format_poly", "h_transform", "parse_poly"]
__version__ = "0.1.0"
