"""Finite-scale experiments on approximate homomorphisms, their stabilizer statistics and
pattern-Bernoulli extensions."""
from .approx import ApproxHom, from_action
from .groups import Element, GroupSpec, Window, ball
from .perm import Permutation

__version__ = "0.1.0"
__all__ = ["ApproxHom", "Element", "GroupSpec", "Permutation", "Window", "ball", "from_action"]
