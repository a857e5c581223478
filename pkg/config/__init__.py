# Configuration package for hyperbolic marking computations
