"""
Error taxonomy for marked hyperbolic structure computations.

Every error carries the process exit code the command line front end reports for it.
"""


class MarkingsError(Exception):
    """Base class for all library errors"""

    exit_code = 2


class InputError(MarkingsError):
    """Malformed file, schema violation or bad argument"""


# Moebius calculus
class NotHyperbolic(MarkingsError):
    """Operation needs a hyperbolic element"""


class DegenerateTriple(MarkingsError):
    """Two of three boundary points coincide"""


class NegativelyOriented(MarkingsError):
    """Boundary triple is clockwise"""


# Groups
class UnknownGenerator(MarkingsError):
    """Word refers to a generator the representation does not have"""


class BallTooLarge(MarkingsError):
    """Word ball exceeds the depth cap or element budget"""


class EllipticFound(MarkingsError):
    """Representation contains an elliptic element, so it is not torsion-free discrete"""

    def __init__(self, message, word=None):
        super().__init__(message)
        self.word = word


class EmptySample(MarkingsError):
    """Sink sample holds no points"""


# Pants gluing
class InvalidGluing(MarkingsError):
    """Pants decomposition violates a gluing rule"""

    def __init__(self, message, slot=None):
        super().__init__(message)
        self.slot = slot


class UnknownCuff(MarkingsError):
    """No twist metadata exists for the requested cuff"""


# Boundary maps
class InsufficientSamples(MarkingsError):
    """A sampled circle map needs at least three pairs"""


class TypeMismatch(MarkingsError):
    """A word is hyperbolic in one representation but not in the other"""

    exit_code = 3

    def __init__(self, message, word=None):
        super().__init__(message)
        self.word = word


class MonotonicityViolation(MarkingsError):
    """Sampled images fail the cyclic order of their sources"""

    exit_code = 4

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


# Characters
class AnchorNotHyperbolic(MarkingsError):
    """An anchor word is not hyperbolic in the target"""


class AnchorSinksDegenerate(MarkingsError):
    """Anchor sinks are not pairwise distinct"""


class AnchorOrientationNegative(MarkingsError):
    """Anchor sinks form a clockwise triple"""


class AnchorMismatch(MarkingsError):
    """Characters were normalized with different anchors or generators"""


# Mapping classes
class InvalidAutomorphism(MarkingsError):
    """Generator images do not define a peripheral-preserving automorphism"""

    exit_code = 5


# Douady-Earle
class NoConvergence(MarkingsError):
    """Barycenter iteration exhausted its budget"""


class DegenerateMeasure(MarkingsError):
    """Boundary measure is concentrated in a tiny arc"""
