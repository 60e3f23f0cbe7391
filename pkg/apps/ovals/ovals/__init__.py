"""Numerical lab for symmetry-reduced mean curvature flow of ancient ovals."""
from ovals.definitions import TOOL_VERSION as __version__
