"""Hard-instance generator for graph-isomorphism solvers.

Random uniquely-satisfiable homogeneous 3-XOR systems, lifted through
clause gadgets into asymmetric graphs that resist
individualization-refinement search.
"""

__version__ = "0.1.0"
