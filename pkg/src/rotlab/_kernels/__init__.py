"""Hot numeric loops, each with a numba and a pure numpy/Python variant."""
