# Tests for marked hyperbolic structure computations
