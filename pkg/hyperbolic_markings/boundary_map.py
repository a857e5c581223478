"""
Boundary homeomorphisms as finitely sampled monotone circle maps.

A map is stored as circularly sorted source angles xs with image angles ys in the same
cyclic order. Between samples it is extended linearly in angle ("linear", the default) or by
the Moebius map through the three nearest samples ("mobius", exact on graphs of PSL(2,R) elements).
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import InputError, InsufficientSamples, MonotonicityViolation, TypeMismatch
from .fuchsian import DEFAULT_SAMPLE_TOLERANCE, GroupRepresentation, Word, circular_gaps, shortlex_key
from .moebius import (
    TWO_PI,
    BoundaryPoint,
    ElementClass,
    MoebiusTransform,
    angle_distances,
    classify,
    moebius_from_triple,
    normalize_angles,
    sink,
)

DEFAULT_TOLERANCE = 1e-10
DUPLICATE_IMAGE_TOLERANCE = 1e-8
WINDING_TOLERANCE = 1e-6
INTERPOLATIONS = ("mobius", "linear")

# Half-plane 0, 1 and infinity as disk angles
ZERO_ANGLE = np.pi
ONE_ANGLE = 1.5 * np.pi
INFINITY_ANGLE = 0.0

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SampledCircleMap:
    """Monotone circle map known on finitely many sample pairs"""

    xs: np.ndarray
    ys: np.ndarray
    labels: Optional[Tuple[Optional[Word], ...]] = None
    tolerance: float = DEFAULT_TOLERANCE
    interpolation: str = "linear"

    def __post_init__(self):
        xs = np.array(self.xs, dtype=float)
        ys = np.array(self.ys, dtype=float)
        if xs.shape != ys.shape or xs.ndim != 1:
            raise InputError(f"Sample arrays differ in shape: {xs.shape} vs {ys.shape}")
        if len(xs) < 3:
            raise InsufficientSamples(f"A sampled circle map needs at least 3 pairs, got {len(xs)}")
        if self.interpolation not in INTERPOLATIONS:
            raise InputError(f"Unknown interpolation mode: {self.interpolation}")
        xs.setflags(write=False)
        ys.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))

    def __len__(self):
        return len(self.xs)

    @property
    def pairs(self) -> List[Tuple[BoundaryPoint, BoundaryPoint]]:
        return [(BoundaryPoint(x), BoundaryPoint(y)) for x, y in zip(self.xs, self.ys)]

    def label(self, index: int) -> Optional[Word]:
        return self.labels[index] if self.labels is not None else None

    # Interpolation data per gap k = (x_k, x_{k+1})
    @cached_property
    def _gap_widths(self) -> np.ndarray:
        return np.mod(np.roll(self.xs, -1) - self.xs, TWO_PI)

    @cached_property
    def _image_steps(self) -> np.ndarray:
        return np.mod(np.roll(self.ys, -1) - self.ys, TWO_PI)

    @cached_property
    def _mobius_usable(self) -> np.ndarray:
        previous, current, following = np.roll(self.ys, 1), self.ys, np.roll(self.ys, -1)
        first = np.mod(current - previous, TWO_PI)
        second = np.mod(following - current, TWO_PI)
        return (first > 1e-13) & (second > 1e-13) & (first + second < TWO_PI - 1e-13)

    def evaluate_angles(self, thetas) -> np.ndarray:
        """Image angles of an array of source angles"""
        thetas = normalize_angles(np.atleast_1d(np.asarray(thetas, dtype=float)))
        n = len(self.xs)
        index = np.searchsorted(self.xs, thetas, side="right") - 1
        index = np.where(index < 0, n - 1, index)
        offset = np.mod(thetas - self.xs[index], TWO_PI)
        exact = offset == 0.0

        widths = self._gap_widths[index]
        fraction = np.divide(offset, widths, out=np.zeros_like(offset), where=widths > 0)
        result = self.ys[index] + fraction * self._image_steps[index]

        if self.interpolation == "mobius":
            use = self._mobius_usable[index] & ~exact
            if np.any(use):
                k = index[use]
                p, q, r = (np.exp(1j * self.xs[(k + shift) % n]) for shift in (-1, 0, 1))
                big_p, big_q, big_r = (np.exp(1j * self.ys[(k + shift) % n]) for shift in (-1, 0, 1))
                w = np.exp(1j * thetas[use])
                with np.errstate(divide="ignore", invalid="ignore"):
                    s = (w - p) * (q - r) / ((w - r) * (q - p))
                    image = (s * big_r * (big_q - big_p) - big_p * (big_q - big_r)) / (
                        s * (big_q - big_p) - (big_q - big_r)
                    )
                good = np.isfinite(image)
                values = result[use]
                values[good] = np.angle(image[good])
                result[use] = values

        result = normalize_angles(result)
        result[exact] = self.ys[index[exact]]
        return result

    def evaluate(self, x: BoundaryPoint) -> BoundaryPoint:
        return BoundaryPoint(float(self.evaluate_angles([x.theta])[0]))

    def with_samples(self, xs, ys, labels=None) -> "SampledCircleMap":
        return SampledCircleMap(xs, ys, labels, self.tolerance, self.interpolation)


# Construction
def _witness(xs, ys, labels, indices) -> List[dict]:
    return [
        {"x": float(xs[i]), "y": float(ys[i]), "word": labels[i] if labels is not None else None}
        for i in indices
    ]


def enforce_monotone(xs: np.ndarray, ys: np.ndarray, labels, tolerance: float) -> np.ndarray:
    """
    Check that ys follow the cyclic order of the sorted xs.

    Backward steps shorter than tolerance are clamped (floating point); anything larger
    raises MonotonicityViolation with a witness triple.
    """
    ys = np.array(ys, dtype=float)
    n = len(ys)
    clamped = 0
    for k in range(n):
        following = (k + 1) % n
        backward = (ys[k] - ys[following]) % TWO_PI
        if 0.0 < backward < tolerance:
            ys[following] = ys[k]
            clamped += 1
    if clamped:
        logger.warning(f"Clamped {clamped} sub-tolerance image inversions")

    steps = np.mod(np.roll(ys, -1) - ys, TWO_PI)
    total = steps.sum()
    if abs(total - TWO_PI) > WINDING_TOLERANCE:
        if total < WINDING_TOLERANCE:
            indices = (0, 1, 2)
        else:
            crossing = int(np.argmax(np.cumsum(steps) > TWO_PI + WINDING_TOLERANCE))
            indices = (0, crossing, (crossing + 1) % n)
        witness = _witness(xs, ys, labels, indices)
        logger.error(f"Monotonicity violated, images wind {total / TWO_PI:.3f} times; witness {witness}")
        raise MonotonicityViolation(
            f"Sample images wind {total / TWO_PI:.3f} times around the circle; witness triple {witness}",
            witness=witness,
        )
    return ys


def from_pairs(
    xs: Sequence[float],
    ys: Sequence[float],
    labels: Optional[Sequence[Optional[Word]]] = None,
    tolerance: float = DEFAULT_TOLERANCE,
    interpolation: str = "linear",
    check: bool = True,
) -> SampledCircleMap:
    """
    Sort by source angle, merge coincident sources and (optionally) enforce monotonicity.

    Sources closer than tolerance keep the sample with the shortlex-least label; the cyclic
    order check then runs on the surviving samples, so a strongly expanding map whose merged
    images spread beyond tolerance is not rejected.
    """
    xs = normalize_angles(np.asarray(xs, dtype=float))
    ys = normalize_angles(np.asarray(ys, dtype=float))
    labels = list(labels) if labels is not None else None
    order = np.argsort(xs, kind="stable")
    xs, ys = xs[order], ys[order]
    if labels is not None:
        labels = [labels[i] for i in order]

    def preferred(i: int, j: int) -> bool:
        if labels is None or labels[i] is None:
            return False
        return labels[j] is None or shortlex_key(labels[i]) < shortlex_key(labels[j])

    keep: List[int] = []
    spread = 0.0
    for i in range(len(xs)):
        if keep and xs[i] - xs[keep[-1]] < tolerance:
            j = keep[-1]
            spread = max(spread, float(angle_distances(ys[i], ys[j])))
            if preferred(i, j):
                keep[-1] = i
            continue
        keep.append(i)
    if len(keep) > 1 and xs[keep[0]] + TWO_PI - xs[keep[-1]] < tolerance:
        last = keep.pop()
        spread = max(spread, float(angle_distances(ys[last], ys[keep[0]])))
        if preferred(last, keep[0]):
            keep = keep[1:] + [last]
    if spread > DUPLICATE_IMAGE_TOLERANCE:
        logger.debug(f"Merged coincident sources whose images differ by up to {spread:.2e}")
    xs, ys = xs[keep], ys[keep]
    if labels is not None:
        labels = [labels[i] for i in keep]

    if len(xs) < 3:
        raise InsufficientSamples(f"Only {len(xs)} distinct sample pairs; at least 3 are needed")
    if check:
        ys = enforce_monotone(xs, ys, labels, tolerance)
    return SampledCircleMap(xs, ys, tuple(labels) if labels is not None else None, tolerance, interpolation)


def is_proper_power(word: Word) -> bool:
    n = len(word)
    for period in range(1, n // 2 + 1):
        if n % period == 0 and word == word[:period] * (n // period):
            return True
    return False


def from_representations(
    base: GroupRepresentation,
    target: GroupRepresentation,
    words: Sequence[Word],
    tol: float = DEFAULT_SAMPLE_TOLERANCE,
    tolerance: float = DEFAULT_TOLERANCE,
    interpolation: str = "linear",
) -> SampledCircleMap:
    """
    Pairs (sink of base(w), sink of target(w)) over the given words.

    Words that are non-hyperbolic in both representations are skipped; a word that is
    hyperbolic in exactly one of them raises TypeMismatch.
    """
    if not base.same_generators(target):
        raise InputError(f"Generator names differ: {base.generator_names} vs {target.generator_names}")

    xs, ys, labels = [], [], []
    for word in words:
        if not word or is_proper_power(word):
            continue
        base_element, target_element = base.evaluate(word), target.evaluate(word)
        base_kind, target_kind = classify(base_element, tol), classify(target_element, tol)
        base_hyperbolic = base_kind is ElementClass.HYPERBOLIC
        target_hyperbolic = target_kind is ElementClass.HYPERBOLIC
        if base_hyperbolic != target_hyperbolic:
            logger.error(f"Word {base.format(word)} is {base_kind.value} in base, {target_kind.value} in target")
            raise TypeMismatch(
                f"Word {base.format(word)} is {base_kind.value} in the base but {target_kind.value} in the target",
                word=base.format(word),
            )
        if not base_hyperbolic:
            continue
        xs.append(sink(base_element, tol).theta)
        ys.append(sink(target_element, tol).theta)
        labels.append(word)

    logger.info(f"Boundary map from {len(xs)} hyperbolic words")
    return from_pairs(xs, ys, labels, tolerance, interpolation)


def mobius_graph(sigma: MoebiusTransform, xs: Sequence[float], interpolation: str = "linear") -> SampledCircleMap:
    """Samples of the boundary action of sigma on the given angles"""
    xs = normalize_angles(np.asarray(xs, dtype=float))
    return from_pairs(xs, sigma.apply_angles(xs), interpolation=interpolation)


def identity_map(xs: Sequence[float], interpolation: str = "linear") -> SampledCircleMap:
    return from_pairs(xs, xs, interpolation=interpolation)


def uniform_angles(count: int, phase: float = 0.0) -> np.ndarray:
    return normalize_angles(phase + TWO_PI * np.arange(count) / count)


# Operations
def evaluate(f: SampledCircleMap, x: BoundaryPoint) -> BoundaryPoint:
    return f.evaluate(x)


def compose(g: SampledCircleMap, f: SampledCircleMap) -> SampledCircleMap:
    """g o f sampled over the pairs of f"""
    return SampledCircleMap(f.xs, g.evaluate_angles(f.ys), f.labels, f.tolerance, f.interpolation)


def invert(f: SampledCircleMap) -> SampledCircleMap:
    return from_pairs(f.ys, f.xs, f.labels, f.tolerance, f.interpolation, check=False)


def post_compose(sigma: MoebiusTransform, f: SampledCircleMap) -> SampledCircleMap:
    """sigma o f"""
    return f.with_samples(f.xs, sigma.apply_angles(f.ys), f.labels)


def mobius_sandwich(left: MoebiusTransform, f: SampledCircleMap, right: MoebiusTransform) -> SampledCircleMap:
    """left o f o right"""
    return from_pairs(
        right.inverse().apply_angles(f.xs), left.apply_angles(f.ys), f.labels, f.tolerance, f.interpolation, check=False
    )


def sup_distance(f: SampledCircleMap, g: SampledCircleMap) -> float:
    """Max visual distance between f and g over the union of their sample grids"""
    grid = np.union1d(f.xs, g.xs)
    return float(angle_distances(f.evaluate_angles(grid), g.evaluate_angles(grid)).max())


def max_sample_gap(f: SampledCircleMap) -> float:
    """Largest gap in either the source or the image samples"""
    return float(max(circular_gaps(f.xs).max(), circular_gaps(f.ys).max()))


def monotonicity_defect(f: SampledCircleMap) -> float:
    """Excess winding of the image samples; zero for a monotone degree-one map"""
    steps = np.mod(np.roll(f.ys, -1) - f.ys, TWO_PI)
    return float(abs(steps.sum() - TWO_PI))


def check_equivariance(
    f: SampledCircleMap,
    base: GroupRepresentation,
    target: GroupRepresentation,
    testers: Sequence[Word],
) -> float:
    """
    Max over testers and samples of the distance between f(base(g) x) and target(g) f(x).
    """
    defect = 0.0
    for word in testers:
        moved = base.evaluate(word).apply_angles(f.xs)
        lhs = f.evaluate_angles(moved)
        rhs = target.evaluate(word).apply_angles(f.ys)
        defect = max(defect, float(angle_distances(lhs, rhs).max()))
    logger.info(f"Equivariance defect over {len(testers)} testers: {defect:.3e}")
    return defect


def sigma1_normalize(f: SampledCircleMap) -> SampledCircleMap:
    """
    Post-compose with the inverse of M(f(0), f(1), f(infinity)) so that 0, 1 and infinity are fixed.

    The anchor images are read through the Moebius fit of the neighbouring samples whatever
    the map's interpolation, so normalizing sigma o f and f give the same samples.
    """
    anchors = np.array([ZERO_ANGLE, ONE_ANGLE, INFINITY_ANGLE])
    fitted = SampledCircleMap(f.xs, f.ys, None, f.tolerance, "mobius")
    zero, one, infinity = (BoundaryPoint(theta) for theta in fitted.evaluate_angles(anchors))
    normalizer = moebius_from_triple(zero, one, infinity).inverse()

    grid = np.union1d(f.xs, anchors)
    grid = grid[np.concatenate(([True], np.diff(grid) > 1e-12))]
    labels = None
    if f.labels is not None:
        lookup = dict(zip(f.xs.tolist(), f.labels))
        labels = tuple(lookup.get(x) for x in grid.tolist())
    images = normalizer.apply_angles(f.evaluate_angles(grid))
    for theta in anchors:
        images[np.argmin(angle_distances(grid, theta))] = theta
    return SampledCircleMap(grid, images, labels, f.tolerance, f.interpolation)
