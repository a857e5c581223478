"""
Douady-Earle extension of sampled circle maps into the unit disk.

The extension at z is the conformal barycenter of the image of harmonic measure seen from z,
approximated by pushing N equally spaced angles forward through m_z.
"""

import logging
import math
from typing import Sequence, Union

import numpy as np

from .boundary_map import SampledCircleMap
from .exceptions import DegenerateMeasure, InputError, NoConvergence
from .fuchsian import GroupRepresentation, Word, circular_gaps, shortlex_key
from .moebius import TWO_PI, BoundaryPoint, MoebiusTransform, disk_distance

DISK_MARGIN = 1e-12
DEGENERATE_ARC = 1e-3
DEFAULT_STEP = 0.5
DEFAULT_TOLERANCE = 1e-10
DEFAULT_MAX_ITERATIONS = 500
DEFAULT_QUADRATURE = 64
MIN_QUADRATURE = 16

logger = logging.getLogger(__name__)


def disk_point(z: complex) -> complex:
    """Validate an open-disk point"""
    z = complex(z)
    if not abs(z) < 1.0 - DISK_MARGIN:
        raise InputError(f"Point {z} is not inside the open unit disk")
    return z


def from_disk_coefficients(alpha: complex, beta: complex) -> MoebiusTransform:
    """Half-plane element whose disk action is w -> (alpha w + beta)/(conj(beta) w + conj(alpha))"""
    return MoebiusTransform(
        alpha.real + beta.real,
        alpha.imag - beta.imag,
        -alpha.imag - beta.imag,
        alpha.real - beta.real,
    )


def mobius_disk(z: complex) -> MoebiusTransform:
    """m_z(w) = (w + z)/(1 + conj(z) w), the disk automorphism sending 0 to z"""
    z = disk_point(z)
    scale = 1.0 / math.sqrt(1.0 - abs(z) ** 2)
    return from_disk_coefficients(complex(scale), z * scale)


def hyperbolic_distance_disk(z: complex, w: complex) -> float:
    return disk_distance(z, w)


def _as_angles(points: Sequence[Union[BoundaryPoint, float]]) -> np.ndarray:
    return np.array([p.theta if isinstance(p, BoundaryPoint) else float(p) for p in points], dtype=float)


def barycenter_field(zeta: np.ndarray, w: complex) -> complex:
    """V(w) = mean of (zeta - w)/(1 - conj(w) zeta)"""
    return complex(np.mean((zeta - w) / (1.0 - np.conj(w) * zeta)))


def conformal_barycenter(
    points: Sequence[Union[BoundaryPoint, float]],
    initial: complex = 0j,
    step: float = DEFAULT_STEP,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> complex:
    """
    Unique zero of V for the uniform measure on the given boundary points.

    Damped iteration w <- m_w(s V(w)) rather than the Euclidean step w + s V(w); both have the
    same fixed point. The step s is halved whenever |V| would grow or the update would leave the disk.

    Raises:
        DegenerateMeasure: fewer than 3 points, or all points inside one tiny arc
        NoConvergence: iteration budget exhausted
    """
    angles = _as_angles(points)
    if len(angles) < 3:
        raise DegenerateMeasure(f"Barycenter needs at least 3 points, got {len(angles)}")
    if circular_gaps(angles).max() >= TWO_PI - DEGENERATE_ARC:
        raise DegenerateMeasure("Boundary points are concentrated in an arc shorter than 1e-3")

    zeta = np.exp(1j * angles)
    w = disk_point(initial)
    field = barycenter_field(zeta, w)
    scale = step
    for iteration in range(max_iterations):
        if abs(field) < tolerance:
            logger.debug(f"Barycenter {w:.6g} after {iteration} iterations")
            return w
        while True:
            move = scale * field
            candidate = (w + move) / (1.0 + np.conj(w) * move)
            if abs(candidate) < 1.0 - DISK_MARGIN:
                candidate_field = barycenter_field(zeta, candidate)
                if abs(candidate_field) <= abs(field):
                    break
            scale /= 2.0
            if scale < 1e-16:
                raise NoConvergence(f"Barycenter step collapsed at w = {w} with |V| = {abs(field):.3e}")
        w, field = candidate, candidate_field
        scale = min(step, 2.0 * scale)

    if abs(field) < tolerance:
        return w
    logger.error(f"Barycenter iteration stopped at |V| = {abs(field):.3e}")
    raise NoConvergence(f"No barycenter within {max_iterations} iterations (|V| = {abs(field):.3e})")


def harmonic_angles(z: complex, count: int, phase: float = 0.0) -> np.ndarray:
    """Angles m_z(phase + 2 pi k / count), the harmonic measure at z pushed to the circle"""
    base = np.exp(1j * (phase + TWO_PI * np.arange(count) / count))
    return np.angle((base + z) / (1.0 + np.conj(z) * base))


def quadrature_phase(f: SampledCircleMap, z: complex) -> float:
    """
    Angle of m_z^-1 at the source of the shortlex-least labelled sample; 0 for unlabelled maps.

    With this phase the nodes used at sigma(z) for f o sigma^-1 are sigma of the nodes used at z for f.
    """
    labelled = [(shortlex_key(label), index) for index, label in enumerate(f.labels or ()) if label is not None]
    if not labelled:
        return 0.0
    _, index = min(labelled)
    zeta = np.exp(1j * f.xs[index])
    return float(np.angle((zeta - z) / (1.0 - np.conj(z) * zeta)))


def extend(
    f: SampledCircleMap,
    z: complex,
    count: int = DEFAULT_QUADRATURE,
    **barycenter_options,
) -> complex:
    """Douady-Earle extension of f evaluated at the disk point z"""
    if count < MIN_QUADRATURE:
        raise InputError(f"Quadrature needs at least {MIN_QUADRATURE} points, got {count}")
    z = disk_point(z)
    images = f.evaluate_angles(harmonic_angles(z, count, quadrature_phase(f, z)))
    barycenter_options.setdefault("initial", z)
    return conformal_barycenter(images, **barycenter_options)


def equivariance_check(
    f: SampledCircleMap,
    base: GroupRepresentation,
    target: GroupRepresentation,
    test_points: Sequence[complex],
    words: Sequence[Word],
    count: int = DEFAULT_QUADRATURE,
    **barycenter_options,
) -> float:
    """Max hyperbolic distance between DE(f)(base(g) z) and target(g) DE(f)(z)"""
    defect = 0.0
    for z in test_points:
        extended = extend(f, z, count, **barycenter_options)
        for word in words:
            moved = extend(f, base.evaluate(word).apply_disk(z), count, **barycenter_options)
            expected = target.evaluate(word).apply_disk(extended)
            defect = max(defect, disk_distance(moved, expected))
    logger.info(f"Douady-Earle equivariance defect over {len(test_points)} points: {defect:.3e}")
    return defect
