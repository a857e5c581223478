"""
PSL(2,R) calculus on the upper half-plane and its boundary circle.

Boundary points are stored as disk-model angles obtained through the Cayley transform
z -> (z - i)/(z + i); half-plane extended reals are an input/output convenience only.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np

from .exceptions import (
    DegenerateTriple,
    InputError,
    NegativelyOriented,
    NotHyperbolic,
)

TWO_PI = 2.0 * math.pi
DET_TOLERANCE = 1e-12
ANGLE_TOLERANCE = 1e-12
DEFAULT_TOLERANCE = 1e-9

logger = logging.getLogger(__name__)

# Cayley transform half-plane -> disk and back
CAYLEY = np.array([[1.0, -1.0j], [1.0, 1.0j]])
CAYLEY_INVERSE = np.linalg.inv(CAYLEY)


class ElementClass(Enum):
    IDENTITY = "identity"
    HYPERBOLIC = "hyperbolic"
    PARABOLIC = "parabolic"
    ELLIPTIC = "elliptic"


class Orientation(Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    DEGENERATE = "degenerate"


def normalize_angle(theta: float) -> float:
    theta = math.fmod(theta, TWO_PI)
    if theta < 0.0:
        theta += TWO_PI
    if theta >= TWO_PI:
        theta = 0.0
    return theta


def normalize_angles(thetas: np.ndarray) -> np.ndarray:
    """Vectorized normalize_angle"""
    result = np.mod(np.asarray(thetas, dtype=float), TWO_PI)
    return np.where(result >= TWO_PI, 0.0, result)


@dataclass(frozen=True)
class BoundaryPoint:
    """A point of the boundary circle, stored as an angle in [0, 2pi)"""

    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", normalize_angle(float(self.theta)))

    @classmethod
    def from_angle(cls, theta: float) -> "BoundaryPoint":
        return cls(theta)

    @classmethod
    def from_real(cls, x: float) -> "BoundaryPoint":
        """Cayley image of an extended real; infinity lands exactly on angle 0"""
        if math.isinf(x):
            return cls(0.0)
        return cls(2.0 * math.atan2(1.0, -x))

    @classmethod
    def infinity(cls) -> "BoundaryPoint":
        return cls(0.0)

    @classmethod
    def from_disk(cls, w: complex) -> "BoundaryPoint":
        return cls(math.atan2(w.imag, w.real))

    @property
    def disk(self) -> complex:
        return complex(math.cos(self.theta), math.sin(self.theta))

    @property
    def is_infinity(self) -> bool:
        return self.theta == 0.0

    def to_extended_real(self) -> float:
        if self.theta == 0.0:
            return math.inf
        return -1.0 / math.tan(self.theta / 2.0)

    def __repr__(self):
        return f"BoundaryPoint(theta={self.theta:.12g})"


def _psl_sign(a: float, b: float, c: float, d: float) -> Tuple[float, float, float, float]:
    """Representative with nonnegative trace (near-zero trace: a >= 0, then b >= 0)"""
    trace = a + d
    if abs(trace) > DET_TOLERANCE:
        flip = trace < 0.0
    elif abs(a) > DET_TOLERANCE:
        flip = a < 0.0
    else:
        flip = b < 0.0
    return (-a, -b, -c, -d) if flip else (a, b, c, d)


@dataclass(frozen=True)
class MoebiusTransform:
    """
    Orientation preserving isometry z -> (az + b)/(cz + d) of the upper half-plane.

    Entries given to the constructor are rescaled to determinant 1; products and inverses
    are kept as computed. The sign is fixed so that the trace is nonnegative, making equality
    well defined in PSL(2,R).
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        a, b, c, d = (float(v) for v in (self.a, self.b, self.c, self.d))
        det = a * d - b * c
        if not det > 0.0 or not math.isfinite(det):
            raise InputError(f"Matrix [[{a}, {b}], [{c}, {d}]] has determinant {det}, not in PSL(2,R)")
        scale = math.sqrt(det)
        self._store(*_psl_sign(a / scale, b / scale, c / scale, d / scale))

    def _store(self, a: float, b: float, c: float, d: float):
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    @classmethod
    def _unimodular(cls, a: float, b: float, c: float, d: float) -> "MoebiusTransform":
        """Entries known to have determinant 1 up to rounding: only the sign is fixed"""
        transform = object.__new__(cls)
        transform._store(*_psl_sign(float(a), float(b), float(c), float(d)))
        return transform

    # Construction
    @classmethod
    def identity(cls) -> "MoebiusTransform":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_matrix(cls, matrix) -> "MoebiusTransform":
        entries = np.asarray(matrix, dtype=float).reshape(-1)
        if entries.size != 4:
            raise InputError(f"Expected four matrix entries, got {entries.size}")
        return cls(*entries)

    @classmethod
    def diagonal(cls, length: float) -> "MoebiusTransform":
        """Translation of the given length along the imaginary axis, towards infinity"""
        return cls(math.exp(length / 2.0), 0.0, 0.0, math.exp(-length / 2.0))

    @classmethod
    def rotation(cls, angle: float) -> "MoebiusTransform":
        """Elliptic element rotating about i by the given angle"""
        half = angle / 2.0
        return cls(math.cos(half), -math.sin(half), math.sin(half), math.cos(half))

    # Algebra
    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def trace(self) -> float:
        return self.a + self.d

    def __matmul__(self, other: "MoebiusTransform") -> "MoebiusTransform":
        return MoebiusTransform._unimodular(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "MoebiusTransform":
        return MoebiusTransform._unimodular(self.d, -self.b, -self.c, self.a)

    def conjugate_by(self, sigma: "MoebiusTransform") -> "MoebiusTransform":
        """sigma o self o sigma^-1"""
        return sigma @ self @ sigma.inverse()

    def power(self, k: int) -> "MoebiusTransform":
        result = MoebiusTransform.identity()
        base = self if k >= 0 else self.inverse()
        for _ in range(abs(k)):
            result = result @ base
        return result

    def distance(self, other: "MoebiusTransform") -> float:
        """Entrywise max distance, minimized over the PSL sign"""
        plus = max(abs(self.a - other.a), abs(self.b - other.b), abs(self.c - other.c), abs(self.d - other.d))
        minus = max(abs(self.a + other.a), abs(self.b + other.b), abs(self.c + other.c), abs(self.d + other.d))
        return min(plus, minus)

    def is_close(self, other: "MoebiusTransform", tol: float = 1e-8) -> bool:
        return self.distance(other) < tol

    def to_list(self):
        return [self.a, self.b, self.c, self.d]

    # Actions
    def disk_coefficients(self) -> Tuple[complex, complex]:
        """(alpha, beta) of the conjugate disk map w -> (alpha w + beta)/(conj(beta) w + conj(alpha))"""
        alpha = complex(self.a + self.d, self.b - self.c) / 2.0
        beta = complex(self.a - self.d, -(self.b + self.c)) / 2.0
        return alpha, beta

    def apply(self, z: complex) -> complex:
        """Action on an upper half-plane point"""
        return (self.a * z + self.b) / (self.c * z + self.d)

    def apply_disk(self, w):
        """Action on disk points (scalars or numpy arrays), interior or boundary"""
        alpha, beta = self.disk_coefficients()
        return (alpha * w + beta) / (beta.conjugate() * w + alpha.conjugate())

    def apply_angles(self, thetas: np.ndarray) -> np.ndarray:
        """Boundary action on an array of angles"""
        images = self.apply_disk(np.exp(1j * np.asarray(thetas, dtype=float)))
        return normalize_angles(np.angle(images))

    def __repr__(self):
        return f"MoebiusTransform([[{self.a:.10g}, {self.b:.10g}], [{self.c:.10g}, {self.d:.10g}]])"


# Classification
def classify(m: MoebiusTransform, tol: float = DEFAULT_TOLERANCE) -> ElementClass:
    """Identity, Hyperbolic, Parabolic or Elliptic by trace, with tolerance tol"""
    to_identity = max(abs(m.a - 1.0), abs(m.b), abs(m.c), abs(m.d - 1.0))
    to_minus_identity = max(abs(m.a + 1.0), abs(m.b), abs(m.c), abs(m.d + 1.0))
    if min(to_identity, to_minus_identity) < tol:
        return ElementClass.IDENTITY
    trace = abs(m.trace)
    if trace > 2.0 + tol:
        return ElementClass.HYPERBOLIC
    if abs(trace - 2.0) <= tol:
        return ElementClass.PARABOLIC
    return ElementClass.ELLIPTIC


def _require_hyperbolic(m: MoebiusTransform, tol: float):
    kind = classify(m, tol)
    if kind is not ElementClass.HYPERBOLIC:
        logger.error(f"Expected a hyperbolic element, got {kind.value}: {m}")
        raise NotHyperbolic(f"{m} is {kind.value}, not hyperbolic")


def fixed_points(m: MoebiusTransform, tol: float = DEFAULT_TOLERANCE) -> Tuple[BoundaryPoint, ...]:
    """
    Boundary fixed points.

    Returns:
        (sink, source) for hyperbolic elements, a single point for parabolic ones,
        and an empty tuple otherwise.
    """
    kind = classify(m, tol)
    alpha, beta = m.disk_coefficients()
    if kind is ElementClass.HYPERBOLIC:
        spread = math.sqrt(alpha.real * alpha.real - 1.0)
        sign = 1.0 if alpha.real > 0.0 else -1.0
        conj_beta = beta.conjugate()
        sink_point = complex(sign * spread, alpha.imag) / conj_beta
        source_point = complex(-sign * spread, alpha.imag) / conj_beta
        return BoundaryPoint.from_disk(sink_point), BoundaryPoint.from_disk(source_point)
    if kind is ElementClass.PARABOLIC:
        return (BoundaryPoint.from_disk(complex(0.0, alpha.imag) / beta.conjugate()),)
    return ()


def sink(m: MoebiusTransform, tol: float = DEFAULT_TOLERANCE) -> BoundaryPoint:
    """Attracting fixed point of a hyperbolic element"""
    _require_hyperbolic(m, tol)
    return fixed_points(m, tol)[0]


def source(m: MoebiusTransform, tol: float = DEFAULT_TOLERANCE) -> BoundaryPoint:
    """Repelling fixed point of a hyperbolic element"""
    _require_hyperbolic(m, tol)
    return fixed_points(m, tol)[1]


def translation_length(m: MoebiusTransform, tol: float = DEFAULT_TOLERANCE) -> float:
    _require_hyperbolic(m, tol)
    return 2.0 * float(np.arccosh(abs(m.trace) / 2.0))


# Boundary geometry
def apply_boundary(m: MoebiusTransform, x: BoundaryPoint) -> BoundaryPoint:
    return BoundaryPoint.from_disk(m.apply_disk(x.disk))


def visual_distance(x: BoundaryPoint, y: BoundaryPoint) -> float:
    """Shorter arc length between two boundary points, in [0, pi]"""
    gap = abs(x.theta - y.theta) % TWO_PI
    return min(gap, TWO_PI - gap)


def angle_distances(thetas: np.ndarray, others: np.ndarray) -> np.ndarray:
    """Vectorized visual_distance on raw angles"""
    gap = np.mod(np.abs(np.asarray(thetas) - np.asarray(others)), TWO_PI)
    return np.minimum(gap, TWO_PI - gap)


def ccw_arc(x: BoundaryPoint, y: BoundaryPoint) -> float:
    """Counterclockwise arc length from x to y"""
    return (y.theta - x.theta) % TWO_PI


def circular_order(
    a: BoundaryPoint, b: BoundaryPoint, c: BoundaryPoint, tol: float = ANGLE_TOLERANCE
) -> Orientation:
    """Positive iff walking counterclockwise from a reaches b before c"""
    if min(visual_distance(a, b), visual_distance(b, c), visual_distance(a, c)) < tol:
        return Orientation.DEGENERATE
    return Orientation.POSITIVE if ccw_arc(a, b) < ccw_arc(a, c) else Orientation.NEGATIVE


def moebius_from_triple(a: BoundaryPoint, b: BoundaryPoint, c: BoundaryPoint) -> MoebiusTransform:
    """The element M with M(0) = a, M(1) = b, M(infinity) = c"""
    orientation = circular_order(a, b, c)
    if orientation is Orientation.DEGENERATE:
        raise DegenerateTriple(f"Boundary points {a}, {b}, {c} are not distinct")
    if orientation is Orientation.NEGATIVE:
        raise NegativelyOriented(f"Boundary points {a}, {b}, {c} are negatively oriented")

    def to_infinity_chart(p, q, r):
        # w -> (w - p)(q - r) / ((w - r)(q - p)) sends p, q, r to 0, 1, infinity
        return np.array([[q - r, -p * (q - r)], [q - p, -r * (q - p)]])

    base = to_infinity_chart(-1.0 + 0j, -1j, 1.0 + 0j)  # disk images of 0, 1, infinity
    target = to_infinity_chart(a.disk, b.disk, c.disk)
    disk_map = np.linalg.solve(target, base)
    half_plane = CAYLEY_INVERSE @ disk_map @ CAYLEY

    flat = half_plane.reshape(-1)
    pivot = flat[np.argmax(np.abs(flat))]
    real_form = half_plane * (abs(pivot) / pivot)
    return MoebiusTransform.from_matrix(real_form.real)


# Hyperbolic geometry helpers
def hyperbolic_distance(z: complex, w: complex) -> float:
    """Distance between two upper half-plane points"""
    return float(np.arccosh(1.0 + abs(z - w) ** 2 / (2.0 * z.imag * w.imag)))


def disk_distance(z: complex, w: complex) -> float:
    """Distance between two open-disk points"""
    ratio = abs(z - w) / abs(1.0 - z.conjugate() * w)
    return 2.0 * float(np.arctanh(min(ratio, 1.0 - 1e-16)))


def axis_point(m: MoebiusTransform, tol: float = DEFAULT_TOLERANCE) -> complex:
    """Disk point of the translation axis closest to the origin"""
    attracting, repelling = fixed_points(m, tol)
    half_gap = visual_distance(attracting, repelling) / 2.0
    first = attracting.theta
    bisector = first + (half_gap if ccw_arc(attracting, repelling) <= math.pi else -half_gap)
    radius = math.tan(math.pi / 4.0 - half_gap / 2.0)
    return radius * complex(math.cos(bisector), math.sin(bisector))


def axis_displacement(m: MoebiusTransform, tol: float = DEFAULT_TOLERANCE) -> float:
    """Distance a point on the axis is moved; equals the translation length"""
    _require_hyperbolic(m, tol)
    point = axis_point(m, tol)
    return disk_distance(point, m.apply_disk(point))


def translation(start: BoundaryPoint, end: BoundaryPoint, distance: float) -> MoebiusTransform:
    """Translation by a signed distance along the geodesic oriented from start to end"""
    third = BoundaryPoint(start.theta + ccw_arc(start, end) / 2.0)
    frame = moebius_from_triple(start, third, end)
    return frame @ MoebiusTransform.diagonal(distance) @ frame.inverse()


def translation_along(m: MoebiusTransform, distance: float, tol: float = DEFAULT_TOLERANCE) -> MoebiusTransform:
    """Translation along the axis of m, positive in the direction m translates"""
    _require_hyperbolic(m, tol)
    attracting, repelling = fixed_points(m, tol)
    return translation(repelling, attracting, distance)


# Random elements for diagnostics and tests
def random_psl(rng: np.random.Generator, spread: float = 1.0) -> MoebiusTransform:
    """Random element rotation * diagonal * rotation with bounded stretch"""
    first = MoebiusTransform.rotation(rng.uniform(0.0, TWO_PI))
    second = MoebiusTransform.rotation(rng.uniform(0.0, TWO_PI))
    return first @ MoebiusTransform.diagonal(rng.uniform(-spread, spread)) @ second


def random_hyperbolic(
    rng: np.random.Generator, min_length: float = 0.5, max_length: float = 3.0
) -> MoebiusTransform:
    length = rng.uniform(min_length, max_length)
    return MoebiusTransform.diagonal(length).conjugate_by(random_psl(rng))


def random_positive_triple(
    rng: np.random.Generator, min_gap: float = 1e-3
) -> Tuple[BoundaryPoint, BoundaryPoint, BoundaryPoint]:
    while True:
        angles = np.sort(rng.uniform(0.0, TWO_PI, size=3))
        gaps = np.diff(np.append(angles, angles[0] + TWO_PI))
        if gaps.min() > min_gap:
            return tuple(BoundaryPoint(theta) for theta in angles)

