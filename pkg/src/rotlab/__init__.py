"""rotlab: a numerical laboratory for asymptotic homology on tori.

Rotation vectors of flows and torus maps, stable norms and homology cones,
Hamiltonian integration with lift tracking, minimal average actions, and the
exact algebra of totally irrational rotation vectors, with a scenario CLI.
"""

from ._backend import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
